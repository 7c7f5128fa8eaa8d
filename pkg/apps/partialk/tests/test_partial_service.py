import numpy as np
from django.test import SimpleTestCase, tag

from apps.partialk.exceptions import ConfigurationError, DomainError, UsageError
from apps.partialk.services.partial_service import PartialService, PartialSpec, SingularMatrixError
from apps.partialk.services.pattern_service import Window
from apps.partialk.services.spectral_service import SpectralMatrixField, SpectralService


def _random_field(labels=('X', 'Y', 'Z'), n_tapers=8, seed=11):
    """Campo hermítico definido positivo con valores aleatorios en cada nodo."""
    rng = np.random.default_rng(seed)
    grid = SpectralService.make_grid(Window.box(0, 10, 0, 10), 0.2)
    P = len(labels)
    a = rng.standard_normal(grid.shape + (P, P)) + 1j * rng.standard_normal(grid.shape + (P, P))
    values = a @ np.conj(np.swapaxes(a, -1, -2)) + np.eye(P)
    return SpectralMatrixField(grid=grid, labels=tuple(labels), values=values, n_tapers=n_tapers)


class PartialSpecTest(SimpleTestCase):
    def test_factor_without_covariates(self):
        self.assertEqual(PartialSpec(('X',)).debias_factor(8), 1.0)

    def test_factor_with_two_covariates(self):
        self.assertAlmostEqual(PartialSpec(('X',), ('Y', 'Z')).debias_factor(8), 8 / 6)

    def test_factor_disabled(self):
        self.assertEqual(PartialSpec(('X',), ('Y',), debias=False).debias_factor(8), 1.0)

    def test_too_few_tapers(self):
        with self.assertRaises(ConfigurationError):
            PartialSpec(('X',), ('Y', 'Z')).debias_factor(2)

    def test_targets_and_covariates_disjoint(self):
        with self.assertRaises(UsageError):
            PartialSpec(('X', 'Y'), ('Y',))

    def test_unknown_label(self):
        with self.assertRaises(UsageError):
            PartialSpec(('X',), ('W',)).validate(('X', 'Y'))


class SchurComplementTest(SimpleTestCase):
    def setUp(self):
        self.field = _random_field()

    def test_no_covariates_returns_target_block(self):
        partial = PartialService.partial_matrix_schur(self.field, PartialSpec(('X', 'Y')))
        np.testing.assert_allclose(partial.values, self.field.block(('X', 'Y'), ('X', 'Y')))
        self.assertEqual(partial.debias_factor, 1.0)

    def test_single_target_formula(self):
        field = _random_field(labels=('X', 'Y'))
        partial = PartialService.partial_matrix_schur(field, PartialSpec(('X',), ('Y',), debias=False))
        fxx, fxy, fyy = field.entry('X', 'X'), field.entry('X', 'Y'), field.entry('Y', 'Y')
        np.testing.assert_allclose(partial.entry('X', 'X'), fxx - np.abs(fxy) ** 2 / fyy, rtol=1e-10)

    def test_debias_scales_by_m_over_m_minus_pz(self):
        plain = PartialService.partial_matrix_schur(self.field, PartialSpec(('X',), ('Y', 'Z'), debias=False))
        scaled = PartialService.partial_matrix_schur(self.field, PartialSpec(('X',), ('Y', 'Z')))
        np.testing.assert_allclose(scaled.values, plain.values * 8 / 6, rtol=1e-12)
        self.assertAlmostEqual(scaled.debias_factor, 8 / 6)
        self.assertEqual(scaled.covariates, ('Y', 'Z'))

    def test_fast_route_matches(self):
        for targets, covariates in ((('X',), ('Y', 'Z')), (('X', 'Y'), ('Z',)), (('Z', 'X'), ('Y',))):
            spec = PartialSpec(targets, covariates)
            schur = PartialService.partial_matrix_schur(self.field, spec)
            fast = PartialService.partial_matrix_fast(self.field, spec)
            np.testing.assert_allclose(fast.values, schur.values, rtol=1e-9, atol=1e-12)

    def test_identity_matrices(self):
        grid = SpectralService.make_grid(Window.box(0, 10, 0, 10), 0.2)
        values = np.broadcast_to(np.eye(2, dtype=complex), grid.shape + (2, 2)).copy()
        field = SpectralMatrixField(grid=grid, labels=('X', 'Y'), values=values, n_tapers=8)
        partial = PartialService.partial_matrix_schur(field, PartialSpec(('X',), ('Y',), debias=False))
        np.testing.assert_allclose(partial.values[..., 0, 0], 1.0)

    def test_diagonal_field_unchanged(self):
        grid = SpectralService.make_grid(Window.box(0, 10, 0, 10), 0.2)
        values = np.zeros(grid.shape + (3, 3), dtype=complex)
        values[..., 0, 0], values[..., 1, 1], values[..., 2, 2] = 2.0, 3.0, 5.0
        field = SpectralMatrixField(grid=grid, labels=('X', 'Y', 'Z'), values=values, n_tapers=8)
        partial = PartialService.partial_matrix_schur(field, PartialSpec(('X',), ('Y', 'Z'), debias=False))
        np.testing.assert_allclose(partial.entry('X', 'X'), 2.0)

    def test_singular_covariate_block(self):
        grid = SpectralService.make_grid(Window.box(0, 10, 0, 10), 0.2)
        values = np.zeros(grid.shape + (2, 2), dtype=complex)
        values[..., 0, 0] = 1.0
        field = SpectralMatrixField(grid=grid, labels=('X', 'Y'), values=values, n_tapers=8)
        with self.assertRaises(SingularMatrixError):
            PartialService.partial_matrix_schur(field, PartialSpec(('X',), ('Y',)))

    def test_singular_covariate_block_both_routes(self):
        grid = SpectralService.make_grid(Window.box(0, 10, 0, 10), 0.2)
        values = np.zeros(grid.shape + (3, 3), dtype=complex)
        values[..., 0, 0], values[..., 1, 1] = 1.0, 2.0
        field = SpectralMatrixField(grid=grid, labels=('X', 'Y', 'Z'), values=values, n_tapers=8)
        spec = PartialSpec(('X', 'Y'), ('Z',))
        with self.assertRaises(SingularMatrixError):
            PartialService.partial_matrix_schur(field, spec)
        with self.assertRaises(SingularMatrixError):
            PartialService.partial_matrix_fast(field, spec)

    def test_fast_route_checks_only_covariate_block(self):
        # bloque de objetivos casi singular; f_ZZ bien condicionada
        grid = SpectralService.make_grid(Window.box(0, 10, 0, 10), 0.2)
        c = 1.0 - 1e-13
        values = np.zeros(grid.shape + (3, 3), dtype=complex)
        values[..., 0, 0] = values[..., 1, 1] = values[..., 2, 2] = 1.0
        values[..., 0, 1] = values[..., 1, 0] = c
        field = SpectralMatrixField(grid=grid, labels=('X', 'Y', 'Z'), values=values, n_tapers=8)
        spec = PartialSpec(('X', 'Y'), ('Z',), debias=False)
        schur = PartialService.partial_matrix_schur(field, spec)
        np.testing.assert_allclose(schur.entry('X', 'Y'), c)
        with np.errstate(all='ignore'):
            fast = PartialService.partial_matrix_fast(field, spec)
        self.assertEqual(fast.values.shape, schur.values.shape)

    def test_fast_route_on_random_matrices(self):
        rng = np.random.default_rng(23)
        grid = SpectralService.make_grid(Window.box(0, 10, 0, 10), 0.5)
        names = ('A', 'B', 'C', 'D', 'E')
        compared = 0
        for P in range(2, 6):
            a = rng.standard_normal(grid.shape + (P, P)) + 1j * rng.standard_normal(grid.shape + (P, P))
            values = a @ np.conj(np.swapaxes(a, -1, -2)) + 0.1 * np.eye(P)
            field = SpectralMatrixField(grid=grid, labels=names[:P], values=values, n_tapers=8)
            for t in range(1, min(P - 1, 3) + 1):
                spec = PartialSpec(names[:t], names[t:P], debias=False)
                schur = PartialService.partial_matrix_schur(field, spec).values
                fast = PartialService.partial_matrix_fast(field, spec).values
                deviation = np.abs(fast - schur) / np.abs(schur).max(axis=(-2, -1), keepdims=True)
                self.assertLess(float(deviation.max()), 1e-9)
                compared += grid.size
        self.assertGreaterEqual(compared, 1000)

    def test_chained_partialling(self):
        field = _random_field(labels=('X', 'Y', 'Z1', 'Z2'))
        first = PartialService.partial_matrix_schur(field, PartialSpec(('X', 'Y', 'Z2'), ('Z1',), debias=False))
        chained = PartialService.partial_matrix_schur(first, PartialSpec(('X', 'Y'), ('Z2',), debias=False))
        joint = PartialService.partial_matrix_schur(field, PartialSpec(('X', 'Y'), ('Z1', 'Z2'), debias=False))
        np.testing.assert_allclose(chained.values, joint.values, rtol=1e-9, atol=1e-9)


class PredictionKernelTest(SimpleTestCase):
    def test_pure_shift_is_a_phase(self):
        grid = SpectralService.make_grid(Window.box(0, 10, 0, 10), 0.3)
        nodes = grid.nodes()
        shift = np.array([1.5, -2.0])
        phase = np.exp(-2j * np.pi * nodes @ shift)
        f_zz = 1.0 + np.exp(-np.sum(nodes ** 2, axis=-1))
        values = np.empty(grid.shape + (2, 2), dtype=complex)
        values[..., 0, 0] = f_zz + 1.0
        values[..., 1, 1] = f_zz
        values[..., 0, 1] = phase * f_zz
        values[..., 1, 0] = np.conj(phase) * f_zz
        field = SpectralMatrixField(grid=grid, labels=('X', 'Z'), values=values, n_tapers=8)
        kernel = PartialService.prediction_kernel_spectrum(field, 'X', ('Z',))
        self.assertEqual(kernel.shape, grid.shape + (1,))
        np.testing.assert_allclose(kernel[..., 0], phase, rtol=1e-12)

    def test_residual_is_orthogonal_to_covariates(self):
        field = _random_field(labels=('X', 'Y', 'Z1', 'Z2'))
        covariates = ('Z1', 'Z2')
        kernel = PartialService.prediction_kernel_spectrum(field, 'X', covariates)
        f_zy = field.block(covariates, ('Y',))[..., 0]
        expected = field.entry('X', 'Y') - np.sum(kernel * f_zy, axis=-1)
        partial = PartialService.partial_matrix_schur(field, PartialSpec(('X', 'Y'), covariates, debias=False))
        np.testing.assert_allclose(partial.entry('X', 'Y'), expected, rtol=1e-10, atol=1e-12)


class WishartDebiasTest(SimpleTestCase):
    def setUp(self):
        self.sigma = np.array([[2.0, 0.5, 0.2], [0.5, 1.5, 0.3], [0.2, 0.3, 1.0]])

    def test_scalar_block_ratio(self):
        ratio = PartialService.wishart_debias_check(8, 3, 1, self.sigma, 20000, np.random.default_rng(5))
        self.assertEqual(ratio.shape, (1, 1))
        self.assertAlmostEqual(float(ratio[0, 0]), 6 / 8, delta=0.02)

    def test_full_block_is_unbiased(self):
        sigma = np.array([[1.0, 0.5], [0.5, 1.0]])
        ratio = PartialService.wishart_debias_check(8, 2, 2, sigma, 20000, np.random.default_rng(6))
        np.testing.assert_allclose(ratio, np.ones((2, 2)), atol=0.03)

    @tag('slow')
    def test_small_m(self):
        sigma = np.array([[1.0, 0.3], [0.3, 1.0]])
        ratio = PartialService.wishart_debias_check(4, 2, 1, sigma, 200000, np.random.default_rng(7))
        self.assertAlmostEqual(float(ratio[0, 0]), 0.75, delta=0.01)

    def test_zero_off_diagonal_reference(self):
        ratio = PartialService.wishart_debias_check(8, 3, 2, np.eye(3), 20000, np.random.default_rng(8))
        self.assertTrue(np.all(np.isfinite(ratio)))
        np.testing.assert_allclose(ratio, np.full((2, 2), 7 / 8), atol=0.03)

    def test_invalid_sigma(self):
        with self.assertRaises(DomainError):
            PartialService.wishart_debias_check(8, 2, 1, np.array([[1.0, 2.0], [2.0, 1.0]]), 10, np.random.default_rng(0))
        with self.assertRaises(DomainError):
            PartialService.wishart_debias_check(8, 3, 1, np.eye(2), 10, np.random.default_rng(0))
