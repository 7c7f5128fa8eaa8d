import numpy as np
from django.test import SimpleTestCase

from apps.partialk.exceptions import ConfigurationError, UsageError
from apps.partialk.services.estimation_service import EstimationConfig, EstimationService
from apps.partialk.services.pattern_service import MultiTypePattern, Window
from apps.partialk.services.simulation_service import SimulationService


def _poisson_pattern(labels=('X', 'Y'), seed=5, side=100.0):
    rng = np.random.default_rng(seed)
    window = Window.box(0, side, 0, side)
    return MultiTypePattern.from_groups(
        window, {label: SimulationService.sim_poisson(window, 0.01, rng) for label in labels}
    )


CONFIG = EstimationConfig(n_tapers=4, kmax=(0.3,), r_start=1.0, r_stop=10.0, r_count=10)


class EstimationConfigTest(SimpleTestCase):
    def test_defaults(self):
        config = EstimationConfig()
        self.assertEqual(config.n_tapers, 8)
        self.assertEqual(config.route, 'rotational')
        self.assertEqual(config.radii.count, 40)

    def test_unknown_route(self):
        with self.assertRaises(ConfigurationError):
            EstimationConfig(route='hankel')

    def test_dict_form(self):
        config = EstimationConfig(kmax=[0.4, 0.2], spacing=0.01)
        data = config.to_dict()
        data['kmax'] = list(data['kmax'])
        self.assertEqual(EstimationConfig.from_dict(data), config)


class EstimateTest(SimpleTestCase):
    def setUp(self):
        self.pattern = _poisson_pattern()

    def test_marginal_l(self):
        curve, report = EstimationService.estimate(self.pattern, ('X',), (), 'L', CONFIG)
        self.assertEqual(curve.values.shape, (10,))
        self.assertTrue(np.all(np.isfinite(curve.values)))
        self.assertEqual(report.info['debias_factor'], 1.0)
        self.assertEqual(report.info['atom'], self.pattern.count('X') / 1e4)
        for stage in ('intensities', 'tapers', 'grid', 'spectra', 'partial', 'invert', 'total'):
            self.assertIn(stage, report.stages)

    def test_partial_records_debias_factor(self):
        curve, report = EstimationService.estimate(self.pattern, ('X',), ('Y',), 'K', CONFIG)
        self.assertAlmostEqual(report.info['debias_factor'], 4 / 3)
        self.assertTrue(curve.is_partial)
        self.assertEqual(curve.metadata['covariates'], ('Y',))
        comments = report.as_comments()
        self.assertIn('time_total', comments)
        self.assertEqual(comments['covariates'], 'Y')

    def test_routes_and_statistics(self):
        for route in ('direct', 'rotational'):
            for stat in ('C', 'K', 'L', 'pcf'):
                curve, _ = EstimationService.estimate(
                    self.pattern, ('X', 'Y'), (), stat, EstimationConfig(**{**CONFIG.to_dict(), 'route': route})
                )
                self.assertEqual(curve.kind, stat)
                self.assertTrue(np.all(np.isfinite(curve.values)), f'{route} {stat}')

    def test_fast_and_schur_routes_agree(self):
        pattern = _poisson_pattern(labels=('X', 'Y', 'Z'))
        schur, _ = EstimationService.estimate(pattern, ('X', 'Y'), ('Z',), 'K', CONFIG)
        fast, _ = EstimationService.estimate(
            pattern, ('X', 'Y'), ('Z',), 'K', EstimationConfig(**{**CONFIG.to_dict(), 'partial_route': 'fast'})
        )
        np.testing.assert_allclose(fast.values, schur.values, rtol=1e-8)

    def test_too_few_tapers_names_the_stage(self):
        config = EstimationConfig(**{**CONFIG.to_dict(), 'n_tapers': 1})
        with self.assertRaisesMessage(ConfigurationError, '[spectra]'):
            EstimationService.estimate(self.pattern, ('X',), ('Y',), 'L', config)

    def test_unknown_statistic(self):
        with self.assertRaises(UsageError):
            EstimationService.estimate(self.pattern, ('X',), (), 'G', CONFIG)

    def test_three_targets(self):
        with self.assertRaises(UsageError):
            EstimationService.resolve_pair(('X', 'Y', 'Z'))

    def test_empty_type(self):
        pattern = MultiTypePattern.from_points(Window.box(0, 10, 0, 10), [[1, 1]], ['Y'], labels=['X', 'Y'])
        with self.assertRaises(UsageError):
            EstimationService.estimate(pattern, ('X',), (), 'K', CONFIG)


class DiagnosticsTest(SimpleTestCase):
    def test_kmax_diagnostic(self):
        result = EstimationService.kmax_diagnostic(_poisson_pattern(), ('X',), (), CONFIG, threshold=0.5)
        self.assertEqual(result['kmax'], (0.3,))
        self.assertEqual(result['kmax_doubled'], (0.6,))
        self.assertEqual(result['l_base'].shape, result['l_doubled'].shape)
        self.assertEqual(result['converged'], result['max_difference'] < 0.5)

    def test_all_pairs(self):
        pattern = _poisson_pattern(labels=('X', 'Y', 'Z'))
        curves = EstimationService.estimate_all_pairs(pattern, CONFIG)
        self.assertEqual(
            sorted(curves), [('X', 'X'), ('X', 'Y'), ('X', 'Z'), ('Y', 'Y'), ('Y', 'Z'), ('Z', 'Z')]
        )
        self.assertEqual(curves[('X', 'Y')].covariates, ('Z',))
        self.assertEqual(curves[('Y', 'Y')].covariates, ('X', 'Z'))
