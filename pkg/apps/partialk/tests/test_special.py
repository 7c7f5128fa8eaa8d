import math

import numpy as np
from django.test import SimpleTestCase
from scipy import integrate, special

from apps.partialk.exceptions import DomainError
from apps.partialk.utils.special import (
    annulus_weight,
    annulus_weight_derivative,
    ball_volume,
    bessel_j,
    c_kernel,
    check_dimension,
    derivative_kernel,
    special_si,
    sphere_area,
)


class SineIntegralTest(SimpleTestCase):
    def test_origin(self):
        self.assertEqual(float(special_si(0.0)), 0.0)

    def test_large_argument(self):
        self.assertAlmostEqual(float(special_si(1e6)), math.pi / 2, places=5)

    def test_quadrature(self):
        for x in (0.1, 1.0, 4.0, 12.5):
            expected, _ = integrate.quad(lambda t: np.sinc(t / np.pi), 0, x, limit=200)
            self.assertAlmostEqual(float(special_si(x)), expected, places=10)

    def test_odd(self):
        np.testing.assert_allclose(special_si(-2.5), -special_si(2.5))


class BesselTest(SimpleTestCase):
    def test_half_integer_orders_match_scipy(self):
        x = np.array([1e-4, 0.3, 2.0, 15.0])
        for order in (0.5, 1.5):
            np.testing.assert_allclose(bessel_j(order, x), special.jv(order, x), rtol=1e-10, atol=1e-14)

    def test_integer_orders(self):
        x = np.linspace(0, 20, 11)
        np.testing.assert_allclose(bessel_j(0, x), special.j0(x))
        np.testing.assert_allclose(bessel_j(1, x), special.j1(x))


class GeometryTest(SimpleTestCase):
    def test_ball_volumes(self):
        self.assertAlmostEqual(ball_volume(1), 2.0)
        self.assertAlmostEqual(ball_volume(2), math.pi)
        self.assertAlmostEqual(ball_volume(3), 4 * math.pi / 3)
        self.assertAlmostEqual(sphere_area(2), 2 * math.pi)

    def test_dimension_out_of_range(self):
        with self.assertRaises(DomainError):
            check_dimension(4)


class KernelTest(SimpleTestCase):
    def test_kernel_limit_at_zero(self):
        small = c_kernel(2.0, 1e-9, 2)
        self.assertAlmostEqual(float(small), float(c_kernel(2.0, 0.0, 2)), places=6)
        self.assertAlmostEqual(float(c_kernel(2.0, 0.0, 2)), 4 * math.pi)

    def test_derivative_kernel_by_finite_difference(self):
        h = 1e-6
        for d in (1, 2, 3):
            for kappa in (0.0, 0.07, 0.4):
                numeric = (c_kernel(3.0 + h, kappa, d) - c_kernel(3.0 - h, kappa, d)) / (2 * h)
                self.assertAlmostEqual(float(derivative_kernel(3.0, kappa, d)), float(numeric), places=5)

    def test_annulus_weight_integrates_kernel(self):
        r, y = 2.5, 0.3
        for d in (1, 2, 3):
            integrand = lambda x: sphere_area(d) * x ** (d - 1) * c_kernel(r, x, d)
            expected, _ = integrate.quad(integrand, 0, y, limit=200)
            self.assertAlmostEqual(float(annulus_weight(r, y, d)), expected, places=8)

    def test_annulus_derivative(self):
        h = 1e-6
        for d in (1, 2, 3):
            numeric = (annulus_weight(1.7 + h, 0.2, d) - annulus_weight(1.7 - h, 0.2, d)) / (2 * h)
            self.assertAlmostEqual(float(annulus_weight_derivative(1.7, 0.2, d)), float(numeric), places=5)
