"""
Tapers seno de mínimo sesgo sobre ventanas rectangulares.

Cada taper d-dimensional es un producto de factores 1-D
h_m(x) = sqrt(2/L) sin(pi m (x - a) / L) sobre [a, a + L], con transformada
de Fourier en forma cerrada.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from apps.partialk.exceptions import ConfigurationError
from apps.partialk.services.pattern_service import Window

logger = logging.getLogger(__name__)

# Radio (en unidades de 2 L k - m) de la rama de Taylor alrededor de las
# singularidades evitables k = +-m / (2L).
SINGULARITY_RADIUS = 1e-6


@dataclass(frozen=True, eq=False)
class TaperFamily:
    """
    Familia de M tapers ortonormales sobre una ventana.

    Atributos:
        window: ventana de soporte.
        indices: tupla de M tuplas (m_1, ..., m_d) de enteros positivos.
    """
    window: Window
    indices: Tuple[Tuple[int, ...], ...]

    @property
    def count(self) -> int:
        return len(self.indices)

    def evaluate(self, m: int, coordinates: np.ndarray) -> np.ndarray:
        """Valor del taper m en cada punto (cero fuera de la ventana)."""
        coordinates = np.asarray(coordinates, dtype=float).reshape(-1, self.window.dimension)
        value = np.ones(coordinates.shape[0])
        for axis, order in enumerate(self.indices[m]):
            value = value * _sine_factor(
                coordinates[:, axis], order, self.window.lower[axis], self.window.side_lengths[axis]
            )
        return value

    def evaluate_axis(self, m: int, axis: int, x: np.ndarray) -> np.ndarray:
        """Factor 1-D del taper m sobre el eje ``axis``."""
        return _sine_factor(
            np.asarray(x, dtype=float), self.indices[m][axis], self.window.lower[axis], self.window.side_lengths[axis]
        )


def _sine_factor(x: np.ndarray, order: int, lower: float, length: float) -> np.ndarray:
    u = x - lower
    inside = (u >= 0) & (u <= length)
    return np.where(inside, np.sqrt(2.0 / length) * np.sin(np.pi * order * u / length), 0.0)


def _phi1(z: np.ndarray) -> np.ndarray:
    """(e^z - 1) / z por serie de Taylor, válido para |z| pequeño."""
    return 1 + z / 2 + z ** 2 / 6 + z ** 3 / 24 + z ** 4 / 120


def sine_taper_ft_1d(k: np.ndarray, order: int, lower: float, length: float) -> np.ndarray:
    """
    Transformada 1-D: int_a^{a+L} sqrt(2/L) sin(pi m (x-a)/L) e^{-2 pi i k x} dx.

    Forma cerrada: sqrt(2/L) theta (1 - (-1)^m e^{-2 pi i k L}) / (theta^2 - (2 pi k)^2)
    con theta = pi m / L, multiplicada por la fase e^{-2 pi i k a}.
    """
    k = np.asarray(k, dtype=float)
    theta = np.pi * order / length
    omega = 2 * np.pi * k
    sign = -1.0 if order % 2 else 1.0
    scale = np.sqrt(2.0 / length)

    offset = 2 * length * k
    near_plus = np.abs(offset - order) < SINGULARITY_RADIUS
    near_minus = np.abs(offset + order) < SINGULARITY_RADIUS
    regular = ~(near_plus | near_minus)

    out = np.empty(k.shape, dtype=complex)
    kr = k[regular]
    wr = omega[regular]
    out[regular] = scale * theta * (1 - sign * np.exp(-2j * np.pi * kr * length)) / (theta ** 2 - wr ** 2)

    # k ~ +m/(2L): delta = theta - omega, H = sqrt(2/L) theta (-i L) phi1(i delta L) / (2 theta - delta)
    delta = theta - omega[near_plus]
    out[near_plus] = scale * theta * (-1j * length) * _phi1(1j * delta * length) / (2 * theta - delta)

    # k ~ -m/(2L): delta = theta + omega, H = sqrt(2/L) theta (i L) phi1(-i delta L) / (2 theta - delta)
    delta = theta + omega[near_minus]
    out[near_minus] = scale * theta * (1j * length) * _phi1(-1j * delta * length) / (2 * theta - delta)

    return out * np.exp(-2j * np.pi * k * lower)


class TaperService:
    """
    Servicio de construcción y evaluación de tapers.

    Responsabilidades:
    - Elegir los índices de los M tapers por orden de concentración.
    - Evaluar transformadas de Fourier analíticas H_m(k).
    """

    @staticmethod
    def make_sine_tapers(window: Window, M: int) -> TaperFamily:
        """
        Construye M tapers seno ordenados por sum_j m_j^2 / L_j^2.

        Los empates se resuelven lexicográficamente sobre la tupla de índices.

        Ejemplo:
            >>> TaperService.make_sine_tapers(Window.box(0, 1, 0, 1), 3).indices
            ((1, 1), (1, 2), (2, 1))
        """
        if M < 1:
            raise ConfigurationError(f"Se requiere al menos un taper (M={M}).")
        lengths = window.side_lengths
        candidates = itertools.product(range(1, M + 1), repeat=window.dimension)
        ordered = sorted(
            candidates,
            key=lambda idx: (float(np.sum(np.square(idx) / np.square(lengths))), idx),
        )
        indices = tuple(tuple(int(v) for v in idx) for idx in ordered[:M])
        logger.debug(f"Tapers seleccionados: {indices}")
        return TaperFamily(window=window, indices=indices)

    @staticmethod
    def taper_ft(family: TaperFamily, m: int, k: np.ndarray) -> np.ndarray:
        """
        H_m(k) como producto de las transformadas 1-D por eje.

        Args:
            family: familia de tapers.
            m: índice del taper (0 <= m < M).
            k: número de onda de longitud d, o arreglo (..., d).

        Returns:
            Valor complejo (escalar o arreglo con la forma de k sin el último eje).
        """
        if not 0 <= m < family.count:
            raise ConfigurationError(f"Índice de taper fuera de rango: {m} (M={family.count}).")
        window = family.window
        k = np.asarray(k, dtype=float)
        k = k.reshape(k.shape[:-1] + (window.dimension,)) if k.ndim else k.reshape(1)
        value = np.ones(k.shape[:-1], dtype=complex)
        for axis, order in enumerate(family.indices[m]):
            value = value * sine_taper_ft_1d(k[..., axis], order, window.lower[axis], window.side_lengths[axis])
        return value[()] if value.ndim == 0 else value

    @staticmethod
    def taper_ft_axis(family: TaperFamily, m: int, axis: int, k: np.ndarray) -> np.ndarray:
        """Factor 1-D de H_m sobre un eje (para rejillas separables)."""
        window = family.window
        return sine_taper_ft_1d(np.asarray(k, dtype=float), family.indices[m][axis], window.lower[axis], window.side_lengths[axis])
