"""
Funciones especiales para la inversión tipo Hankel.

Núcleos de Bessel de orden entero y semientero, integral seno, volumen de la
bola unidad, área de la esfera y los pesos anulares w_d para d en {1, 2, 3}.
"""

import math
from typing import Union

import numpy as np
from scipy import special as sp_special

from apps.partialk.exceptions import DomainError

ArrayLike = Union[float, np.ndarray]

SUPPORTED_DIMENSIONS = (1, 2, 3)

# Por debajo de este argumento las formas cerradas de J_{1/2}, J_{3/2}
# pierden precisión por cancelación; se usa la serie de Taylor.
_SMALL_ARGUMENT = 1e-2


def check_dimension(d: int) -> int:
    if d not in SUPPORTED_DIMENSIONS:
        raise DomainError(f"Dimensión {d} no soportada; se admite {SUPPORTED_DIMENSIONS}.")
    return int(d)


def ball_volume(d: int) -> float:
    """|b^d| = pi^{d/2} / Gamma(d/2 + 1)."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def sphere_area(d: int) -> float:
    """A_{d-1} = 2 pi^{d/2} / Gamma(d/2)."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def ball_measure(r: ArrayLike, d: int) -> np.ndarray:
    """Volumen de la bola de radio r: 2r, pi r^2, 4/3 pi r^3."""
    return ball_volume(d) * np.abs(np.asarray(r, dtype=float)) ** d


def special_si(x: ArrayLike) -> np.ndarray:
    """
    Integral seno Si(x) = int_0^x sin(y)/y dy.

    scipy.special.sici combina serie y expansión asintótica con precisión de
    máquina en toda la recta real.
    """
    si, _ = sp_special.sici(np.asarray(x, dtype=float))
    return si


def bessel_j(order: float, x: ArrayLike) -> np.ndarray:
    """
    Función de Bessel de primera especie J_order(x) para x >= 0 (los órdenes
    semienteros no son reales para x < 0).

    Órdenes 0 y 1 usan las rutinas dedicadas de scipy; los órdenes semienteros
    -1/2, 1/2 y 3/2 usan sus formas esféricas cerradas con serie para x pequeño.
    """
    x = np.asarray(x, dtype=float)
    if order == 0:
        return sp_special.j0(x)
    if order == 1:
        return sp_special.j1(x)
    if order in (-0.5, 0.5, 1.5):
        return _half_integer_bessel(order, x)
    return sp_special.jv(order, x)


def _half_integer_bessel(order: float, x: np.ndarray) -> np.ndarray:
    shape = np.shape(x)
    x = np.array(x, dtype=float, ndmin=1)
    if order == -0.5:
        # Singular en el origen: J_{-1/2}(0) = inf
        with np.errstate(divide='ignore'):
            return (np.sqrt(2.0 / (np.pi * x)) * np.cos(x)).reshape(shape)

    out = np.zeros_like(x)
    small = x < _SMALL_ARGUMENT
    big = ~small
    xb = x[big]
    root = np.sqrt(2.0 / (np.pi * xb))
    xs = x[small]
    x2 = xs * xs
    if order == 0.5:
        out[big] = root * np.sin(xb)
        # sqrt(2x/pi) (1 - x^2/6 + x^4/120 - x^6/5040)
        out[small] = np.sqrt(2 * xs / np.pi) * (1 - x2 / 6 + x2 * x2 / 120 - x2 ** 3 / 5040)
    else:
        out[big] = root * (np.sin(xb) / xb - np.cos(xb))
        # sqrt(2x/pi) x/3 (1 - x^2/10 + x^4/280 - x^6/15120)
        out[small] = np.sqrt(2 * xs / np.pi) * xs / 3 * (1 - x2 / 10 + x2 * x2 / 280 - x2 ** 3 / 15120)
    return out.reshape(shape)


# =============================================================================
# NÚCLEOS DE INVERSIÓN
# =============================================================================

def c_kernel(r: ArrayLike, kappa: ArrayLike, d: int) -> np.ndarray:
    """
    Núcleo (r/kappa)^{d/2} J_{d/2}(2 pi kappa r) con su límite en kappa = 0.

    El límite en el origen es el volumen de la bola de radio r.
    """
    r, kappa = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(kappa, dtype=float))
    out = np.empty(r.shape, dtype=float)
    zero = kappa == 0
    out[zero] = ball_measure(r[zero], d)
    kz, rz = kappa[~zero], r[~zero]
    if d == 1:
        out[~zero] = np.sin(2 * np.pi * kz * rz) / (np.pi * kz)
    elif d == 2:
        out[~zero] = rz / kz * sp_special.j1(2 * np.pi * kz * rz)
    else:
        out[~zero] = (rz / kz) ** 1.5 * bessel_j(1.5, 2 * np.pi * kz * rz)
    return out


def derivative_kernel(r: ArrayLike, kappa: ArrayLike, d: int) -> np.ndarray:
    """
    Núcleo de C'(r): 2 pi kappa (r/kappa)^{d/2} J_{d/2-1}(2 pi kappa r).

    En kappa = 0 toma el valor A_{d-1} r^{d-1}, la derivada del volumen de la bola.
    """
    r, kappa = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(kappa, dtype=float))
    out = np.empty(r.shape, dtype=float)
    zero = kappa == 0
    out[zero] = sphere_area(d) * r[zero] ** (d - 1)
    kz, rz = kappa[~zero], r[~zero]
    if d == 1:
        out[~zero] = 2 * np.cos(2 * np.pi * kz * rz)
    elif d == 2:
        out[~zero] = 2 * np.pi * rz * sp_special.j0(2 * np.pi * kz * rz)
    else:
        arg = 2 * np.pi * kz * rz
        out[~zero] = 2 * np.pi * kz * (rz / kz) ** 1.5 * bessel_j(0.5, arg)
    return out


def annulus_weight(r: ArrayLike, y: ArrayLike, d: int) -> np.ndarray:
    """
    Peso w_d(r, y) = A_{d-1} r^{d/2} int_0^y x^{d/2-1} J_{d/2}(2 pi x r) dx.

    Formas cerradas:
        w_1 = 2 Si(2 pi r y) / pi
        w_2 = 1 - J_0(2 pi r y)
        w_3 = 2/pi (Si(2 pi r y) - sin(2 pi r y))
    """
    t = 2 * np.pi * np.asarray(r, dtype=float) * np.asarray(y, dtype=float)
    if d == 1:
        return 2 * special_si(t) / np.pi
    if d == 2:
        return 1 - sp_special.j0(t)
    return 2 / np.pi * (special_si(t) - np.sin(t))


def annulus_weight_derivative(r: ArrayLike, y: ArrayLike, d: int) -> np.ndarray:
    """
    Derivada dw_d(r, y)/dr.

    w_d depende solo de t = r y, de modo que dw/dr = y phi'(r y).
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    t = 2 * np.pi * r * y
    if d == 1:
        # (2/pi) sin(2 pi r y) / r, con límite 4 y en r = 0
        with np.errstate(divide='ignore', invalid='ignore'):
            value = 2 / np.pi * np.sin(t) / r
        return np.where(r == 0, 4 * y, value)
    if d == 2:
        return 2 * np.pi * y * sp_special.j1(t)
    with np.errstate(divide='ignore', invalid='ignore'):
        value = 2 / np.pi * (np.sin(t) / r - 2 * np.pi * y * np.cos(t))
    return np.where(r == 0, 0.0, value)
