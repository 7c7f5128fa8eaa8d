"""
Inversión de campos espectrales a funciones C, K, L con signo y pcf.

Dos estimadores: la suma de Riemann directa sobre la rejilla cartesiana y el
estimador con promediado rotacional previo, que integra el espectro radial
constante por anillos con los pesos analíticos w_d.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Optional, Tuple, Union

import numpy as np
from django.conf import settings

from apps.partialk.exceptions import ConfigurationError, DomainError, NumericalError, ShapeError
from apps.partialk.services.pattern_service import IntensityEstimates
from apps.partialk.services.spectral_service import SpectralMatrixField
from apps.partialk.utils.special import (
    annulus_weight,
    annulus_weight_derivative,
    ball_measure,
    ball_volume,
    c_kernel,
    check_dimension,
    derivative_kernel,
    sphere_area,
)

logger = logging.getLogger(__name__)

STATISTICS = ('C', 'K', 'L', 'pcf')
ROUTES = ('direct', 'rotational')
KERNELS = ('box', 'triangular')


class SymmetryViolationError(NumericalError):
    """La parte imaginaria de la inversión excede la tolerancia."""
    pass


# =============================================================================
# TIPOS
# =============================================================================

@dataclass(frozen=True, eq=False)
class RadiiGrid:
    """Radios de evaluación, estrictamente crecientes y no negativos."""
    radii: np.ndarray

    def __post_init__(self):
        radii = np.atleast_1d(np.asarray(self.radii, dtype=float)).copy()
        if radii.ndim != 1 or radii.size == 0:
            raise ConfigurationError("La rejilla de radios debe ser un vector no vacío.")
        if radii[0] < 0 or np.any(np.diff(radii) <= 0):
            raise ConfigurationError("Los radios deben ser no negativos y estrictamente crecientes.")
        radii.flags.writeable = False
        object.__setattr__(self, 'radii', radii)

    @classmethod
    def linspace(cls, start: float, stop: float, count: int) -> 'RadiiGrid':
        return cls(np.linspace(start, stop, int(count)))

    @classmethod
    def parse(cls, text: str) -> 'RadiiGrid':
        """
        Interpreta 'inicio:fin:cantidad'.

        Ejemplo:
            >>> RadiiGrid.parse('1:20:20').count
            20
        """
        try:
            start, stop, count = text.split(':')
            return cls.linspace(float(start), float(stop), int(count))
        except ValueError:
            raise ConfigurationError(f"Rejilla de radios inválida '{text}'; se espera inicio:fin:cantidad.") from None

    @property
    def count(self) -> int:
        return int(self.radii.size)


@dataclass(frozen=True, eq=False)
class RadialSpectrum:
    """
    Espectro promediado por anillos para un par de tipos.

    Atributos:
        nodes: centros kappa = s/2 + s n, positivos y equiespaciados.
        values: valor complejo por nodo.
        spacing: s.
        bandwidth: b del núcleo de promediado.
        kernel: identificador del núcleo.
        excluded: centros descartados por no contener nodos de la rejilla.
    """
    nodes: np.ndarray
    values: np.ndarray
    spacing: float
    bandwidth: float
    kernel: str = 'box'
    dimension: int = 2
    excluded: Tuple[float, ...] = ()


class InversionResult(NamedTuple):
    values: np.ndarray
    imag_residual: float


@dataclass(frozen=True, eq=False)
class SummaryCurve:
    """
    Estadístico resumen muestreado en una rejilla de radios.

    Atributos:
        kind: 'C', 'K', 'L' o 'pcf'.
        radii: rejilla de radios.
        values: valor real por radio (NaN donde no está definido).
        targets: par de tipos (X, Y).
        covariates: tipos parcializados.
        dimension: d.
        route: 'direct', 'rotational' o 'border'.
        lower, upper: bandas opcionales de una envolvente.
        metadata: M, rejilla, factor de corrección, residuos, etc.
    """
    kind: str
    radii: RadiiGrid
    values: np.ndarray
    targets: Tuple[str, str]
    covariates: Tuple[str, ...] = ()
    dimension: int = 2
    route: str = 'rotational'
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def is_partial(self) -> bool:
        return bool(self.covariates)

    def with_bands(self, lower: np.ndarray, upper: np.ndarray) -> 'SummaryCurve':
        if np.shape(lower) != self.values.shape or np.shape(upper) != self.values.shape:
            raise ShapeError("Las bandas deben tener la forma de la curva.")
        return SummaryCurve(
            kind=self.kind, radii=self.radii, values=self.values, targets=self.targets,
            covariates=self.covariates, dimension=self.dimension, route=self.route,
            lower=np.asarray(lower, dtype=float), upper=np.asarray(upper, dtype=float),
            metadata=dict(self.metadata),
        )


# =============================================================================
# AUXILIARES
# =============================================================================

def _radial_mass(field: SpectralMatrixField, pair: Tuple[str, str], atom: float):
    """
    Agrupa los nodos por |k| exacto.

    Devuelve (normas únicas, suma compleja de f - atom por norma, conteo por norma).
    """
    values = field.entry(*pair).reshape(-1) - atom
    norms = field.grid.norms().reshape(-1)
    unique, inverse = np.unique(norms, return_inverse=True)
    mass = (
        np.bincount(inverse, weights=values.real, minlength=unique.size)
        + 1j * np.bincount(inverse, weights=values.imag, minlength=unique.size)
    )
    counts = np.bincount(inverse, minlength=unique.size)
    return unique, mass, counts


def _check_residual(real: np.ndarray, imag: np.ndarray, floor: float, tolerance: Optional[float]) -> float:
    tolerance = tolerance if tolerance is not None else getattr(settings, 'PARTIALK_IMAG_TOLERANCE', 1e-6)
    residual = float(np.max(np.abs(imag))) if imag.size else 0.0
    scale = max(float(np.max(np.abs(real))) if real.size else 0.0, floor)
    if residual > tolerance * scale:
        logger.error(f"Residuo imaginario {residual:.3g} supera {tolerance:g} x {scale:.3g}")
        raise SymmetryViolationError(
            f"Residuo imaginario {residual:.3g} mayor que {tolerance:g} veces max|C| = {scale:.3g}; "
            f"la rejilla o el campo no son simétricos."
        )
    return residual


def _validate_pair_intensities(lambda_x: float, lambda_y: float) -> None:
    if not lambda_x > 0 or not lambda_y > 0:
        raise DomainError(f"Las intensidades deben ser positivas (lambda_X={lambda_x}, lambda_Y={lambda_y}).")


# =============================================================================
# SERVICIO
# =============================================================================

class InversionService:
    """
    Servicio de inversión tipo Hankel.

    Responsabilidades:
    - Corrección del átomo en el origen.
    - Estimadores directo y rotacional de C.
    - Cadena C -> K -> L con signo, y la pcf vía la derivada de C.
    """

    @staticmethod
    def atom_correction(pair: Tuple[str, str], intensities: IntensityEstimates) -> float:
        """lambda_X si X = Y, 0 en otro caso."""
        x, y = pair
        if x != y:
            return 0.0
        return float(intensities[x]) if x in intensities else 0.0

    @staticmethod
    def c_direct(
        field: SpectralMatrixField,
        pair: Tuple[str, str],
        atom: float,
        radii: RadiiGrid,
        tolerance: Optional[float] = None,
    ) -> InversionResult:
        """
        C(r) = Delta_1 ... Delta_d sum_k (f(k) - atom) (r/|k|)^{d/2} J_{d/2}(2 pi |k| r).

        Raises:
            SymmetryViolationError: parte imaginaria fuera de tolerancia.
        """
        d = check_dimension(field.grid.dimension)
        unique, mass, _ = _radial_mass(field, pair, atom)
        cell = field.grid.cell_volume
        kernel = c_kernel(radii.radii[:, None], unique[None, :], d)
        result = cell * (kernel @ mass)
        floor = 1e-8 * cell * float(np.sum(np.abs(mass))) * float(ball_measure(radii.radii[-1], d))
        residual = _check_residual(result.real, result.imag, floor, tolerance)
        return InversionResult(result.real.copy(), residual)

    @staticmethod
    def rotational_average(
        field: SpectralMatrixField,
        pair: Tuple[str, str],
        spacing: Optional[float] = None,
        kmax: Optional[float] = None,
        bandwidth: Optional[float] = None,
        kernel: str = 'box',
    ) -> RadialSpectrum:
        """
        Promedio ponderado de f sobre anillos |k| ~ kappa.

        Por defecto s = min_j Delta_j, kappa_max = min_j kmax_j, b = 2 max_j Delta_j
        y núcleo caja W(u) = 1{|u| <= 1/2} con u = (|k| - kappa) / b.
        """
        grid = field.grid
        spacing = float(np.min(grid.spacing)) if spacing is None else float(spacing)
        kmax = float(np.min(grid.kmax)) if kmax is None else float(kmax)
        bandwidth = 2 * float(np.max(grid.spacing)) if bandwidth is None else float(bandwidth)
        if spacing <= 0 or bandwidth <= 0 or kmax <= 0:
            raise ConfigurationError("Espaciado radial, kappa_max y ancho de banda deben ser positivos.")
        if kernel not in KERNELS:
            raise ConfigurationError(f"Núcleo '{kernel}' desconocido; opciones: {KERNELS}")

        count = int(np.floor((kmax - spacing / 2) / spacing * (1 + 1e-12))) + 1
        centers = spacing / 2 + spacing * np.arange(max(count, 0))
        unique, mass, counts = _radial_mass(field, pair, 0.0)

        u = (unique[None, :] - centers[:, None]) / bandwidth
        if kernel == 'box':
            weights = (np.abs(u) <= 0.5).astype(float)
        else:
            weights = np.clip(1 - np.abs(u), 0.0, None)
        total = weights @ counts
        empty = total <= 0
        if np.any(empty):
            logger.warning(f"{int(empty.sum())} anillo(s) sin nodos de la rejilla excluidos")
        values = (weights @ mass)[~empty] / total[~empty]
        return RadialSpectrum(
            nodes=centers[~empty],
            values=values,
            spacing=spacing,
            bandwidth=bandwidth,
            kernel=kernel,
            dimension=grid.dimension,
            excluded=tuple(float(c) for c in centers[empty]),
        )

    @staticmethod
    def c_rotational(
        rot: RadialSpectrum,
        atom: float,
        radii: RadiiGrid,
        d: int,
        tolerance: Optional[float] = None,
    ) -> InversionResult:
        """
        C(r) = sum_kappa (rot(kappa) - atom) [w_d(r, kappa + s/2) - w_d(r, kappa - s/2)].
        """
        d = check_dimension(d)
        r = radii.radii[:, None]
        half = rot.spacing / 2
        weights = annulus_weight(r, rot.nodes[None, :] + half, d) - annulus_weight(r, rot.nodes[None, :] - half, d)
        result = weights @ (rot.values - atom)
        floor = 1e-8 * float(np.sum(np.abs(rot.values - atom)))
        residual = _check_residual(result.real, result.imag, floor, tolerance)
        return InversionResult(result.real.copy(), residual)

    @staticmethod
    def k_from_c(c_values: np.ndarray, lambda_x: float, lambda_y: float, d: int, radii: RadiiGrid) -> np.ndarray:
        """K(r) = C(r) / (lambda_X lambda_Y) + |r b^d|."""
        d = check_dimension(d)
        _validate_pair_intensities(lambda_x, lambda_y)
        return np.asarray(c_values, dtype=float) / (lambda_x * lambda_y) + ball_measure(radii.radii, d)

    @staticmethod
    def signed_l(k_values: np.ndarray, d: int) -> np.ndarray:
        """L = sgn(K) (|K| / |b^d|)^{1/d}."""
        d = check_dimension(d)
        k_values = np.asarray(k_values, dtype=float)
        return np.sign(k_values) * (np.abs(k_values) / ball_volume(d)) ** (1.0 / d)

    @staticmethod
    def pcf_from_spectrum(
        source: Union[SpectralMatrixField, RadialSpectrum],
        pair: Tuple[str, str],
        atom: float,
        radii: RadiiGrid,
        d: int,
        lambda_x: float,
        lambda_y: float,
    ) -> np.ndarray:
        """
        g(r) = C'(r) / (A_{d-1} r^{d-1} lambda_X lambda_Y) + 1.

        C'(r) se obtiene integrando el núcleo derivado (campo cartesiano) o la
        derivada de los pesos anulares (espectro radial).

        Raises:
            DomainError: algún radio es cero o las intensidades no son positivas.
        """
        d = check_dimension(d)
        _validate_pair_intensities(lambda_x, lambda_y)
        if np.any(radii.radii <= 0):
            raise DomainError("La pcf requiere radios estrictamente positivos.")
        r = radii.radii[:, None]

        if isinstance(source, RadialSpectrum):
            half = source.spacing / 2
            weights = (
                annulus_weight_derivative(r, source.nodes[None, :] + half, d)
                - annulus_weight_derivative(r, source.nodes[None, :] - half, d)
            )
            derivative = (weights @ (source.values - atom)).real
        else:
            unique, mass, _ = _radial_mass(source, pair, atom)
            derivative = source.grid.cell_volume * (derivative_kernel(r, unique[None, :], d) @ mass).real

        return derivative / (sphere_area(d) * radii.radii ** (d - 1) * lambda_x * lambda_y) + 1.0
