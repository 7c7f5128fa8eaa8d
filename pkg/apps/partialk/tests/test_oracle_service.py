import math

import numpy as np
from django.test import SimpleTestCase

from apps.partialk.exceptions import ConfigurationError
from apps.partialk.services.oracle_service import ClusterModelSpec, OracleService
from apps.partialk.services.partial_service import PartialService, PartialSpec
from apps.partialk.services.pattern_service import Window
from apps.partialk.services.spectral_service import SpectralService


class ClusterSpectraTest(SimpleTestCase):
    def setUp(self):
        self.spec = ClusterModelSpec(0.01, 3.0, 2.0, 2.0, 1.0)

    def test_origin_value(self):
        f = OracleService.cluster_spectra(self.spec, 0.0)
        self.assertAlmostEqual(f[0, 0].real, 3 * 0.01 + 9 * 0.01)
        self.assertAlmostEqual(f[2, 2].real, 0.01)

    def test_high_frequency_limit(self):
        f = OracleService.cluster_spectra(self.spec, [5.0, 0.0])
        self.assertAlmostEqual(f[0, 0].real, 0.03)
        self.assertAlmostEqual(abs(f[0, 1]), 0.0)

    def test_partial_identities_match_schur(self):
        grid = SpectralService.make_grid(Window.box(0, 20, 0, 20), 0.5)
        rng = np.random.default_rng(12)
        for _ in range(20):
            lz, mu_x, mu_y = rng.uniform(0.005, 0.05), rng.uniform(0.5, 5), rng.uniform(0.5, 5)
            sx, sy = rng.uniform(0.5, 3), rng.uniform(0.5, 3)
            spec = ClusterModelSpec(lz, mu_x, mu_y, sx, sy)
            field = OracleService.analytic_field(spec, grid)
            closed = OracleService.cluster_partial_spectra(spec, grid.nodes())
            cases = {
                'XY.Z': (('X', 'Y'), ('Z',), ('X', 'Y')),
                'XX.YZ': (('X',), ('Y', 'Z'), ('X', 'X')),
                'XZ.Y': (('X', 'Z'), ('Y',), ('X', 'Z')),
                'ZZ.XY': (('Z',), ('X', 'Y'), ('Z', 'Z')),
            }
            for key, (targets, covariates, entry) in cases.items():
                partial = PartialService.partial_matrix_schur(field, PartialSpec(targets, covariates, debias=False))
                np.testing.assert_allclose(partial.entry(*entry), closed[key], rtol=1e-9, atol=1e-12, err_msg=key)

    def test_invalid_model(self):
        with self.assertRaises(ConfigurationError):
            ClusterModelSpec(0.0, 3.0, 3.0, 1.0, 1.0)


class CoxSquaredTest(SimpleTestCase):
    def test_positive_and_decreasing(self):
        values = OracleService.cox_squared_partial_spectrum(0.01, 1.0, np.array([[0.0, 0.0], [0.1, 0.0], [0.3, 0.0]]))
        self.assertGreater(values[0], 0.0)
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_origin_value(self):
        d, a, lz = 2, 1.0, 0.01
        expected = 2 * lz ** 2 * (2 * math.pi * a * a) ** (2 * d) * (8 * math.pi * a * a) ** (-d / 2)
        self.assertAlmostEqual(float(OracleService.cox_squared_partial_spectrum(lz, a, [0.0, 0.0])), expected)

    def test_partial_field(self):
        grid = SpectralService.make_grid(Window.box(0, 10, 0, 10), 0.5)
        field = OracleService.cox_squared_partial_field(0.01, 1.0, grid)
        self.assertEqual(field.labels, ('X', 'Y'))
        np.testing.assert_allclose(field.entry('X', 'X'), OracleService.cox_squared_intensity(0.01, 1.0))
        np.testing.assert_allclose(
            field.entry('X', 'Y'), OracleService.cox_squared_partial_spectrum(0.01, 1.0, grid.nodes())
        )

    def test_scale_must_be_positive(self):
        with self.assertRaises(ConfigurationError):
            OracleService.cox_squared_partial_spectrum(0.01, 0.0, [0.0, 0.0])


class OracleSummaryTest(SimpleTestCase):
    def test_poisson_k(self):
        entry = OracleService.poisson_entry(0.01)
        radii = np.array([1.0, 5.0, 12.0])
        np.testing.assert_allclose(OracleService.oracle_curve(entry, 'K', radii), math.pi * radii ** 2)
        np.testing.assert_allclose(OracleService.oracle_curve(entry, 'L', radii), radii)
        np.testing.assert_allclose(OracleService.oracle_curve(entry, 'pcf', radii), 1.0)

    def test_cross_partial_given_parents_is_poisson(self):
        spec = ClusterModelSpec(0.01, 3.0, 3.0, 2.0, 2.0)
        entry = OracleService.cluster_partial_entry(spec, ('X', 'Y'), ('Z',))
        for r in (2.0, 8.0):
            self.assertAlmostEqual(OracleService.oracle_summary(entry, 'K', r), math.pi * r * r, places=6)

    def test_thomas_closed_form(self):
        spec = ClusterModelSpec.thomas(0.01, 3.0, 1.5)
        entry = OracleService.cluster_partial_entry(spec, ('X', 'X'))
        radii = np.array([1.0, 5.0, 10.0, 15.0])
        np.testing.assert_allclose(
            OracleService.oracle_curve(entry, 'K', radii),
            OracleService.thomas_k(radii, 0.01, 1.5),
            rtol=1e-6,
        )

    def test_thomas_closed_form_value(self):
        expected = 25 * math.pi + 100 * (1 - math.exp(-25 / 9))
        self.assertAlmostEqual(float(OracleService.thomas_k(5.0, 0.01, 1.5)), expected)

    def test_thomas_pcf(self):
        spec = ClusterModelSpec.thomas(0.01, 3.0, 1.5)
        entry = OracleService.cluster_partial_entry(spec, ('X', 'X'))
        expected = 1 + math.exp(-4 / 9) / (4 * math.pi * 1.5 ** 2 * 0.01)
        self.assertAlmostEqual(OracleService.oracle_summary(entry, 'pcf', 2.0), expected, places=6)

    def test_unknown_statistic(self):
        with self.assertRaises(ConfigurationError):
            OracleService.oracle_summary(OracleService.poisson_entry(0.01), 'F', 1.0)
