import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from apps.partialk.exceptions import ConfigurationError
from apps.partialk.forms import EstimationConfigForm, ScenarioForm, build_estimation_config, read_params_file


class EstimationConfigFormTest(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def _file(self, text: str) -> Path:
        path = self.dir / 'estimator.conf'
        path.write_text(text, encoding='utf-8')
        return path

    def test_file_values(self):
        path = self._file('# estimador\nn_tapers = 6\nkmax = 0.4,0.3\ndebias = false\nroute = direct\n')
        config = build_estimation_config(path)
        self.assertEqual(config.n_tapers, 6)
        self.assertEqual(config.kmax, (0.4, 0.3))
        self.assertFalse(config.debias)
        self.assertEqual(config.route, 'direct')

    def test_flags_override_file(self):
        path = self._file('n_tapers = 6\nr-count = 12\n')
        config = build_estimation_config(path, {'n_tapers': 10, 'kmax': None})
        self.assertEqual(config.n_tapers, 10)
        self.assertEqual(config.r_count, 12)
        self.assertEqual(config.kmax, (0.5,))

    def test_unknown_key_reports_line(self):
        path = self._file('n_tapers = 6\ntapers = 3\n')
        with self.assertRaisesMessage(ConfigurationError, 'línea 2'):
            build_estimation_config(path)

    def test_invalid_choice(self):
        with self.assertRaises(ConfigurationError):
            build_estimation_config(overrides={'route': 'hankel'})

    def test_radii_must_increase(self):
        form = EstimationConfigForm({'r_start': 5.0, 'r_stop': 2.0})
        self.assertFalse(form.is_valid())
        self.assertIn('r_stop', form.errors)

    def test_kmax_from_text(self):
        config = EstimationConfigForm({'kmax': '0.25, 0.5'}).to_config()
        self.assertEqual(config.kmax, (0.25, 0.5))

    def test_negative_kmax(self):
        self.assertFalse(EstimationConfigForm({'kmax': '-1'}).is_valid())


class ScenarioFormTest(SimpleTestCase):
    def test_builds_spec(self):
        form = ScenarioForm({'scenario': 'biv-packs', 'seed': 4, 'window': '0 50 0 50'}, params={'mu_x': 2.0})
        spec = form.to_spec()
        self.assertEqual(spec.params['mu_x'], 2.0)
        self.assertEqual(spec.window.bounds(), (0.0, 50.0, 0.0, 50.0))
        self.assertEqual(spec.seed, 4)

    def test_unknown_parameter(self):
        form = ScenarioForm({'scenario': 'poisson'}, params={'sigma': 1.0})
        self.assertFalse(form.is_valid())
        with self.assertRaises(ConfigurationError):
            form.to_spec()

    def test_params_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'params.conf'
            path.write_text('lambda_z = 0.02\nshift = 10,0\n', encoding='utf-8')
            params = read_params_file(path)
        self.assertEqual(params['lambda_z'], 0.02)
        self.assertEqual(list(params['shift']), [10.0, 0.0])
