import numpy as np
from django.test import SimpleTestCase, tag

from apps.partialk.exceptions import ConfigurationError
from apps.partialk.services.pattern_service import Window
from apps.partialk.services.simulation_service import (
    SCENARIOS,
    ScenarioSpec,
    SimulationService,
    UnknownScenarioError,
)


class PrimitivesTest(SimpleTestCase):
    def setUp(self):
        self.window = Window.box(0, 10, 0, 10)

    def test_zero_intensity_is_empty(self):
        points = SimulationService.sim_poisson(self.window, 0.0, np.random.default_rng(0))
        self.assertEqual(points.shape, (0, 2))

    def test_negative_intensity(self):
        with self.assertRaises(ConfigurationError):
            SimulationService.sim_poisson(self.window, -1.0, np.random.default_rng(0))

    def test_poisson_points_inside_window(self):
        points = SimulationService.sim_poisson(Window.box(5, 15, -3, 2), 2.0, np.random.default_rng(1))
        self.assertGreater(len(points), 0)
        self.assertTrue(np.all(Window.box(5, 15, -3, 2).contains(points)))

    def test_cluster_without_offspring(self):
        parents = np.array([[5.0, 5.0], [2.0, 2.0]])
        offspring = SimulationService.sim_cluster(parents, 0.0, 1.0, self.window, np.random.default_rng(0))
        self.assertEqual(len(offspring), 0)

    def test_cluster_keeps_offspring_inside(self):
        parents = np.array([[0.5, 0.5]])
        offspring = SimulationService.sim_cluster(parents, 50.0, 2.0, self.window, np.random.default_rng(3))
        self.assertTrue(np.all(self.window.contains(offspring)))

    def test_thinning_with_certain_survival(self):
        points = SimulationService.sim_poisson(self.window, 1.0, np.random.default_rng(2))
        kept = SimulationService.sim_mark_thinning(points, 3.0, 1.0, np.random.default_rng(4))
        np.testing.assert_array_equal(kept, points)

    def test_thinning_with_zero_radius(self):
        points = SimulationService.sim_poisson(self.window, 1.0, np.random.default_rng(2))
        kept = SimulationService.sim_mark_thinning(points, 0.0, 0.0, np.random.default_rng(4))
        np.testing.assert_array_equal(kept, points)

    def test_higher_mark_survives(self):
        points = np.array([[1.0, 1.0], [2.0, 1.0]])
        marks = np.random.default_rng(7).uniform(size=2)
        kept = SimulationService.sim_mark_thinning(points, 3.0, 0.0, np.random.default_rng(7))
        np.testing.assert_array_equal(kept, points[[int(np.argmax(marks))]])

    def test_distance_thinning_removes_close_points(self):
        points = np.array([[1.0, 1.0], [8.0, 8.0]])
        kept = SimulationService.sim_distance_thinning(points, [[1.5, 1.0]], 2.0, 0.0, np.random.default_rng(0))
        np.testing.assert_array_equal(kept, [[8.0, 8.0]])

    def test_shift(self):
        moved = SimulationService.sim_shift([[1.0, 1.0]], (2.0, 3.0), self.window)
        np.testing.assert_allclose(moved, [[3.0, 4.0]])

    def test_shift_wraps_around(self):
        moved = SimulationService.sim_shift([[9.0, 9.0]], (2.0, 0.0), self.window)
        np.testing.assert_allclose(moved, [[1.0, 9.0]])

    def test_cox_squared_without_parents(self):
        pattern = SimulationService.sim_cox_squared(self.window, 1e-9, 1.0, np.random.default_rng(0))
        self.assertEqual(pattern.labels, ('X', 'Y', 'Z'))
        self.assertEqual(len(pattern), 0)

    def test_cox_squared_points_follow_parents(self):
        window = Window.box(0, 50, 0, 50)
        pattern = SimulationService.sim_cox_squared(window, 0.01, 1.0, np.random.default_rng(8))
        z = pattern.points_of('Z')
        x = pattern.points_of('X')
        self.assertGreater(len(z), 0)
        if len(x):
            distances = np.min(np.linalg.norm(x[:, None, :] - z[None, :, :], axis=-1), axis=1)
            self.assertLess(float(distances.max()), 8.0)

    def test_mark_thinning_is_coupled_across_probabilities(self):
        points = SimulationService.sim_poisson(Window.box(0, 50, 0, 50), 0.2, np.random.default_rng(12))
        survivors = [
            {tuple(p) for p in SimulationService.sim_mark_thinning(points, 3.0, p_x, np.random.default_rng(13))}
            for p_x in (1.0, 0.5, 0.2, 0.0)
        ]
        for larger, smaller in zip(survivors, survivors[1:]):
            self.assertTrue(smaller <= larger)
        self.assertLess(len(survivors[-1]), len(survivors[0]))

    def test_distance_thinning_is_coupled_across_probabilities(self):
        rng = np.random.default_rng(14)
        points = SimulationService.sim_poisson(Window.box(0, 50, 0, 50), 0.2, rng)
        reference = SimulationService.sim_poisson(Window.box(0, 50, 0, 50), 0.02, rng)
        survivors = [
            {tuple(p) for p in SimulationService.sim_distance_thinning(points, reference, 3.0, p_x, np.random.default_rng(15))}
            for p_x in (1.0, 0.5, 0.2, 0.0)
        ]
        for larger, smaller in zip(survivors, survivors[1:]):
            self.assertTrue(smaller <= larger)
        self.assertLess(len(survivors[-1]), len(survivors[0]))

    @tag('slow')
    def test_cox_squared_types_are_conditionally_independent(self):
        window = Window.box(0, 60, 0, 60)
        step, cells = 0.25, 6
        mids = np.arange(step / 2, 60, step)
        mesh = np.stack(np.meshgrid(mids, mids, indexing='ij'), axis=-1).reshape(-1, 2)
        edges = np.linspace(0, 60, cells + 1)
        counts_x, counts_y, integrals = [], [], []
        for seed in range(40):
            pattern = SimulationService.sim_cox_squared(window, 0.01, 1.0, np.random.default_rng(200 + seed))
            z = pattern.points_of('Z')
            squared = np.sum((mesh[:, None, :] - z[None, :, :]) ** 2, axis=-1)
            driving = np.exp(-squared / 2).sum(axis=1) ** 2
            per_cell = driving.reshape(cells, len(mids) // cells, cells, len(mids) // cells).sum(axis=(1, 3))
            integrals.append(per_cell.ravel() * step ** 2)
            for label, store in (('X', counts_x), ('Y', counts_y)):
                points = pattern.points_of(label)
                store.append(np.histogram2d(points[:, 0], points[:, 1], bins=[edges, edges])[0].ravel())
        counts_x, counts_y, integrals = (np.concatenate(v) for v in (counts_x, counts_y, integrals))
        self.assertGreater(np.corrcoef(counts_x, counts_y)[0, 1], 0.3)
        self.assertLess(abs(np.corrcoef(counts_x - integrals, counts_y - integrals)[0, 1]), 0.1)


class ScenarioTest(SimpleTestCase):
    def test_same_seed_same_pattern(self):
        spec = SimulationService.scenario_spec('tri-independent', seed=42)
        first = SimulationService.sim_scenario(spec)
        second = SimulationService.sim_scenario(spec)
        np.testing.assert_array_equal(first.coordinates, second.coordinates)
        self.assertEqual(first.labels, ('X', 'Y', 'Z'))

    def test_defaults_recorded_in_header(self):
        spec = SimulationService.scenario_spec('biv-solitary', seed=1)
        header = spec.header()
        self.assertEqual(header['scenario'], 'biv-solitary')
        self.assertEqual(header['mu_x0'], '15')
        self.assertEqual(header['r_x'], '3')
        self.assertEqual(header['p_x'], '0.1')
        self.assertEqual(spec.window.bounds(), (0.0, 300.0, 0.0, 300.0))

    def test_unknown_scenario(self):
        with self.assertRaisesMessage(UnknownScenarioError, 'biv-independent'):
            SimulationService.scenario_spec('biv-unknown')

    def test_unknown_parameter(self):
        with self.assertRaises(ConfigurationError):
            ScenarioSpec('poisson', params={'mu': 3})

    def test_probability_range(self):
        with self.assertRaises(ConfigurationError):
            ScenarioSpec('biv-solitary', params={'p_x': 1.5})

    def test_every_scenario_simulates(self):
        window = Window.box(0, 60, 0, 60)
        for scenario in SCENARIOS:
            params = {'shift': (5.0, 0.0)} if scenario == 'custom' else None
            pattern = SimulationService.sim_scenario(
                SimulationService.scenario_spec(scenario, params, window=window, seed=3)
            )
            self.assertIn('X', pattern.labels, scenario)

    def test_custom_shift_moves_x_only(self):
        window = Window.box(0, 100, 0, 100)
        plain = SimulationService.sim_scenario(SimulationService.scenario_spec('custom', window=window, seed=9))
        shifted = SimulationService.sim_scenario(
            SimulationService.scenario_spec('custom', {'shift': (10.0, 0.0)}, window=window, seed=9)
        )
        np.testing.assert_array_equal(plain.points_of('Z'), shifted.points_of('Z'))
        expected = SimulationService.sim_shift(plain.points_of('X'), (10.0, 0.0), window)
        np.testing.assert_allclose(np.sort(shifted.points_of('X'), axis=0), np.sort(expected, axis=0))
