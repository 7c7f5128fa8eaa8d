import numpy as np
from django.test import SimpleTestCase, tag

from apps.partialk.exceptions import UsageError
from apps.partialk.services.classical_service import ClassicalService
from apps.partialk.services.inversion_service import InversionService, RadiiGrid
from apps.partialk.services.pattern_service import MultiTypePattern, Window
from apps.partialk.services.simulation_service import SimulationService


class BorderCorrectedKTest(SimpleTestCase):
    def setUp(self):
        self.window = Window.box(0, 1000, 0, 1000)

    def test_single_pair_at_unit_distance(self):
        pattern = MultiTypePattern.from_points(self.window, [[500, 500], [501, 500]], ['X', 'Y'])
        k = ClassicalService.border_corrected_k(pattern, 'X', 'Y', RadiiGrid([0.5, 1.0, 2.0]))
        lambda_x = 1 / 1e6
        np.testing.assert_allclose(k * lambda_x, [0.0, 1.0, 1.0])

    def test_single_point_excludes_itself(self):
        pattern = MultiTypePattern.from_points(self.window, [[500, 500]], ['X'])
        k = ClassicalService.border_corrected_k(pattern, 'X', 'X', RadiiGrid([1.0, 10.0]))
        np.testing.assert_allclose(k, [0.0, 0.0])

    def test_no_eligible_points(self):
        pattern = MultiTypePattern.from_points(self.window, [[2, 2], [3, 2]], ['X', 'Y'])
        k = ClassicalService.border_corrected_k(pattern, 'X', 'Y', RadiiGrid([1.0, 5.0]))
        self.assertFalse(np.isnan(k[0]))
        self.assertTrue(np.isnan(k[1]))

    def test_missing_x(self):
        pattern = MultiTypePattern.from_points(self.window, [[2, 2]], ['Y'], labels=['X', 'Y'])
        with self.assertRaises(UsageError):
            ClassicalService.border_corrected_k(pattern, 'X', 'Y', RadiiGrid([1.0]))

    @tag('slow')
    def test_poisson_mean_l_is_identity(self):
        window = Window.box(0, 300, 0, 300)
        radii = RadiiGrid.linspace(1, 20, 20)
        seeds = np.random.SeedSequence(2024).spawn(100)
        curves = []
        for child in seeds:
            rng = np.random.default_rng(child)
            points = SimulationService.sim_poisson(window, 0.01, rng)
            pattern = MultiTypePattern.from_points(window, points, ['X'] * len(points))
            k = ClassicalService.border_corrected_k(pattern, 'X', 'X', radii)
            curves.append(InversionService.signed_l(k, 2))
        mean = np.mean(curves, axis=0)
        np.testing.assert_allclose(mean, radii.radii, atol=0.3)
