"""
Espectros analíticos y estadísticos resumen de referencia.

Modelo de conglomerados con padres Z de Poisson y descendencias gaussianas X
e Y, sus espectros parciales en forma cerrada, el espectro parcial del modelo
Cox-cuadrado y la cuadratura radial que convierte cualquier espectro isótropo
en C, K, L o pcf.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
from scipy import integrate

from apps.partialk.exceptions import ConfigurationError, NumericalError
from apps.partialk.services.spectral_service import SpectralMatrixField, WavenumberGrid
from apps.partialk.utils.special import (
    ball_measure,
    ball_volume,
    c_kernel,
    check_dimension,
    derivative_kernel,
    sphere_area,
)

logger = logging.getLogger(__name__)

CLUSTER_LABELS: Tuple[str, str, str] = ('X', 'Y', 'Z')

# exp(-2 pi^2 sigma^2 kappa^2) < 1e-18 para kappa > SUPPORT_FACTOR / sigma
SUPPORT_FACTOR = 1.5


class OracleError(NumericalError):
    """La cuadratura de referencia no alcanzó la precisión requerida."""
    pass


# =============================================================================
# MODELOS
# =============================================================================

@dataclass(frozen=True)
class ClusterModelSpec:
    """
    Modelo de conglomerados: Z Poisson(lambda_Z); X e Y con Poisson(mu) hijos
    por padre y desplazamientos N(0, sigma^2 I).
    """
    lambda_z: float
    mu_x: float
    mu_y: float
    sigma_x: float
    sigma_y: float
    dimension: int = 2

    def __post_init__(self):
        check_dimension(self.dimension)
        if self.lambda_z <= 0:
            raise ConfigurationError(f"lambda_Z debe ser positiva ({self.lambda_z}).")
        if self.mu_x < 0 or self.mu_y < 0:
            raise ConfigurationError("Las medias de descendencia deben ser no negativas.")
        if self.sigma_x <= 0 or self.sigma_y <= 0:
            raise ConfigurationError("Las desviaciones de desplazamiento deben ser positivas.")

    @classmethod
    def thomas(cls, lambda_parent: float, mu: float, sigma: float, dimension: int = 2) -> 'ClusterModelSpec':
        """Proceso de Thomas como tipo X del modelo (Y con la misma ley)."""
        return cls(lambda_parent, mu, mu, sigma, sigma, dimension)

    @property
    def intensities(self) -> Dict[str, float]:
        return {'X': self.mu_x * self.lambda_z, 'Y': self.mu_y * self.lambda_z, 'Z': self.lambda_z}

    @property
    def support(self) -> float:
        return SUPPORT_FACTOR / min(self.sigma_x, self.sigma_y)


def cox_squared_radial(lambda_z: float, a: float, kappa: np.ndarray, d: int) -> np.ndarray:
    amplitude = (2 * math.pi * a * a) ** (2 * d) * (8 * math.pi * a * a) ** (-d / 2)
    return 2 * lambda_z ** 2 * amplitude * np.exp(-2 * math.pi ** 2 * a * a * np.asarray(kappa) ** 2)


def gaussian_characteristic(sigma: float, kappa: np.ndarray) -> np.ndarray:
    """phi(k) = exp(-2 pi^2 sigma^2 |k|^2)."""
    return np.exp(-2 * math.pi ** 2 * sigma ** 2 * np.asarray(kappa, dtype=float) ** 2)


@dataclass(frozen=True)
class IsotropicSpectrum:
    """
    Espectro isótropo f(|k|) con su átomo y un soporte efectivo.

    Más allá de ``support`` se supone f - atom despreciable.
    """
    function: Callable[[np.ndarray], np.ndarray]
    atom: float
    support: float
    lambda_x: float
    lambda_y: float


# =============================================================================
# SERVICIO
# =============================================================================

class OracleService:
    """
    Servicio de referencias analíticas.

    Responsabilidades:
    - Matriz espectral 3x3 del modelo de conglomerados y sus parciales.
    - Espectro parcial del contraejemplo Cox-cuadrado.
    - Cuadratura adaptativa de la inversión para espectros isótropos.
    """

    @staticmethod
    def cluster_spectra(spec: ClusterModelSpec, k) -> np.ndarray:
        """
        Matriz (..., 3, 3) en orden X, Y, Z.

        f_ZZ = lambda_Z, f_XZ = mu_X phi_X f_ZZ, f_XY = mu_X mu_Y phi_X phi_Y f_ZZ,
        f_XX = mu_X lambda_Z + mu_X^2 phi_X^2 f_ZZ (análogo para Y).
        """
        k = np.asarray(k, dtype=float)
        kappa = np.linalg.norm(k, axis=-1) if k.ndim else np.abs(k)
        return OracleService.cluster_spectra_radial(spec, kappa)

    @staticmethod
    def cluster_spectra_radial(spec: ClusterModelSpec, kappa) -> np.ndarray:
        kappa = np.asarray(kappa, dtype=float)
        phi_x = gaussian_characteristic(spec.sigma_x, kappa)
        phi_y = gaussian_characteristic(spec.sigma_y, kappa)
        lz = spec.lambda_z
        f = np.empty(kappa.shape + (3, 3), dtype=complex)
        f[..., 0, 0] = spec.mu_x * lz + spec.mu_x ** 2 * phi_x ** 2 * lz
        f[..., 1, 1] = spec.mu_y * lz + spec.mu_y ** 2 * phi_y ** 2 * lz
        f[..., 2, 2] = lz
        f[..., 0, 1] = f[..., 1, 0] = spec.mu_x * spec.mu_y * phi_x * phi_y * lz
        f[..., 0, 2] = f[..., 2, 0] = spec.mu_x * phi_x * lz
        f[..., 1, 2] = f[..., 2, 1] = spec.mu_y * phi_y * lz
        return f

    @staticmethod
    def cluster_partial_spectra(spec: ClusterModelSpec, k) -> Dict[str, np.ndarray]:
        """
        Espectros parciales en forma cerrada.

        Returns:
            {'XY.Z', 'XX.YZ', 'XZ.Y', 'ZZ.XY'} evaluados en k.
        """
        k = np.asarray(k, dtype=float)
        kappa = np.linalg.norm(k, axis=-1) if k.ndim else np.abs(k)
        phi_x = gaussian_characteristic(spec.sigma_x, kappa)
        phi_y = gaussian_characteristic(spec.sigma_y, kappa)
        lz = spec.lambda_z
        f_zz = lz
        return {
            'XY.Z': np.zeros(kappa.shape),
            'XX.YZ': np.full(kappa.shape, spec.mu_x * lz),
            'XZ.Y': spec.mu_x * lz * phi_x * f_zz / (lz + spec.mu_y * phi_y ** 2 * f_zz),
            'ZZ.XY': f_zz * lz / (spec.mu_y * phi_y ** 2 * f_zz + spec.mu_x * phi_x ** 2 * f_zz + lz),
        }

    @staticmethod
    def cox_squared_partial_spectrum(lambda_z: float, a: float, k, dimension: int = 2) -> np.ndarray:
        """
        f_XY.Z(k) = 2 lambda_Z^2 [|G|^2 * |G|^2](k) con g gaussiana de escala a.

        |G(k)|^2 = (2 pi a^2)^d exp(-4 pi^2 a^2 |k|^2), de modo que la
        convolución vale (2 pi a^2)^{2d} (8 pi a^2)^{-d/2} exp(-2 pi^2 a^2 |k|^2).
        """
        d = check_dimension(dimension)
        if a <= 0:
            raise ConfigurationError(f"La escala del núcleo debe ser positiva ({a}).")
        k = np.asarray(k, dtype=float)
        kappa = np.linalg.norm(k, axis=-1) if d > 1 and k.ndim and k.shape[-1] == d else np.abs(k)
        return cox_squared_radial(lambda_z, a, kappa, d)

    # -------------------------------------------------------------------------
    # Espectros isótropos de referencia
    # -------------------------------------------------------------------------

    @classmethod
    def cluster_partial_entry(
        cls,
        spec: ClusterModelSpec,
        pair: Tuple[str, str],
        covariates: Sequence[str] = (),
    ) -> IsotropicSpectrum:
        """
        Entrada (X, Y) del complemento de Schur de cluster_spectra sobre las covariables.

        Sirve de referencia para cualquier par y conjunto de covariables del modelo.
        """
        x, y = pair
        covariates = tuple(covariates)
        index = {label: i for i, label in enumerate(CLUSTER_LABELS)}
        targets = tuple(dict.fromkeys((x, y)))
        t = [index[label] for label in targets]
        z = [index[label] for label in covariates]
        ix, iy = targets.index(x), targets.index(y)

        def function(kappa):
            f = cls.cluster_spectra_radial(spec, kappa)
            block = f[..., t, :][..., :, t]
            if z:
                block = block - f[..., t, :][..., :, z] @ np.linalg.solve(
                    f[..., z, :][..., :, z], f[..., z, :][..., :, t]
                )
            return block[..., ix, iy]

        intensities = spec.intensities
        atom = intensities[x] if x == y else 0.0
        return IsotropicSpectrum(function, atom, spec.support, intensities[x], intensities[y])

    @staticmethod
    def cox_squared_entry(lambda_z: float, a: float, lambda_x: float, lambda_y: float, dimension: int = 2) -> IsotropicSpectrum:
        return IsotropicSpectrum(
            lambda kappa: cox_squared_radial(lambda_z, a, np.asarray(kappa, dtype=float), dimension),
            0.0,
            SUPPORT_FACTOR / a,
            lambda_x,
            lambda_y,
        )

    @staticmethod
    def poisson_entry(intensity: float) -> IsotropicSpectrum:
        return IsotropicSpectrum(lambda kappa: np.full(np.shape(kappa), intensity), intensity, 1.0, intensity, intensity)

    @staticmethod
    def oracle_summary(spectrum: IsotropicSpectrum, kind: str, r: float, d: int = 2) -> float:
        """
        Estadístico de referencia por cuadratura radial adaptativa.

        C(r) = int_0^inf A_{d-1} kappa^{d-1} (f(kappa) - atom) K_d(r, kappa) dkappa
        y luego la cadena C -> K -> L, o la pcf a partir de C'(r).

        Raises:
            OracleError: la cuadratura no converge a 1e-8 relativo.
        """
        d = check_dimension(d)
        area = sphere_area(d)
        if kind == 'pcf':
            if r <= 0:
                raise ConfigurationError("La pcf requiere r > 0.")
            kernel = derivative_kernel
        elif kind in ('C', 'K', 'L'):
            kernel = c_kernel
        else:
            raise ConfigurationError(f"Estadístico desconocido '{kind}'.")

        def integrand(kappa):
            value = complex(np.asarray(spectrum.function(np.asarray(kappa)))) - spectrum.atom
            return area * kappa ** (d - 1) * float(kernel(r, kappa, d)) * value.real

        # Subintervalos de medio periodo del núcleo oscilante
        breaks = max(1, int(np.ceil(2 * r * spectrum.support)))
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', integrate.IntegrationWarning)
            value, error = integrate.quad(
                integrand, 0.0, spectrum.support, limit=max(200, 4 * breaks),
                points=np.linspace(0, spectrum.support, breaks + 1)[1:-1] if breaks > 1 else None,
                epsabs=1e-13, epsrel=1e-10,
            )
        if not np.isfinite(value) or error > max(1e-8 * abs(value), 1e-11):
            raise OracleError(f"Cuadratura imprecisa en r={r}: error {error:.3g} para valor {value:.3g}")

        if kind == 'C':
            return value
        if kind == 'pcf':
            return value / (area * r ** (d - 1) * spectrum.lambda_x * spectrum.lambda_y) + 1.0
        k_value = value / (spectrum.lambda_x * spectrum.lambda_y) + float(ball_measure(r, d))
        if kind == 'K':
            return k_value
        return math.copysign((abs(k_value) / ball_volume(d)) ** (1.0 / d), k_value)

    @classmethod
    def oracle_curve(cls, spectrum: IsotropicSpectrum, kind: str, radii: np.ndarray, d: int = 2) -> np.ndarray:
        return np.array([cls.oracle_summary(spectrum, kind, float(r), d) for r in radii])

    @staticmethod
    def thomas_k(r, lambda_parent: float, sigma: float) -> np.ndarray:
        """K de Thomas en el plano: pi r^2 + (1 - exp(-r^2 / (4 sigma^2))) / lambda_parent."""
        r = np.asarray(r, dtype=float)
        return math.pi * r ** 2 + (1 - np.exp(-r ** 2 / (4 * sigma ** 2))) / lambda_parent

    # -------------------------------------------------------------------------
    # Campos analíticos sobre rejillas
    # -------------------------------------------------------------------------

    @classmethod
    def analytic_field(cls, spec: ClusterModelSpec, grid: WavenumberGrid, n_tapers: int = 1_000_000) -> SpectralMatrixField:
        """
        cluster_spectra muestreado en la rejilla como campo espectral exacto.

        ``n_tapers`` grande deja la corrección de sesgo prácticamente en 1.
        """
        if grid.dimension != spec.dimension:
            raise ConfigurationError("La rejilla y el modelo deben tener la misma dimensión.")
        values = cls.cluster_spectra_radial(spec, grid.norms())
        return SpectralMatrixField(grid=grid, labels=CLUSTER_LABELS, values=values, n_tapers=n_tapers,
                                   metadata={'source': 'analytic'})

    @staticmethod
    def cox_squared_intensity(lambda_z: float, a: float, dimension: int = 2) -> float:
        """E Lambda = lambda_Z (pi a^2)^{d/2} + lambda_Z^2 (2 pi a^2)^d."""
        d = check_dimension(dimension)
        return lambda_z * (math.pi * a * a) ** (d / 2) + lambda_z ** 2 * (2 * math.pi * a * a) ** d

    @classmethod
    def cox_squared_partial_field(cls, lambda_z: float, a: float, grid: WavenumberGrid,
                                  n_tapers: int = 1_000_000) -> SpectralMatrixField:
        """
        Campo (X, Y) ya parcializado sobre Z; solo la entrada cruzada es exacta.

        La diagonal lleva el átomo de Poisson para que la matriz sea invertible.
        """
        if a <= 0:
            raise ConfigurationError(f"La escala del núcleo debe ser positiva ({a}).")
        partial = cox_squared_radial(lambda_z, a, grid.norms(), grid.dimension)
        intensity = cls.cox_squared_intensity(lambda_z, a, grid.dimension)
        values = np.empty(grid.shape + (2, 2), dtype=complex)
        values[..., 0, 0] = values[..., 1, 1] = intensity
        values[..., 0, 1] = values[..., 1, 0] = partial
        return SpectralMatrixField(grid=grid, labels=('X', 'Y'), values=values, n_tapers=n_tapers,
                                   metadata={'source': 'analytic', 'partialled_on': 'Z'})

    @staticmethod
    def poisson_field(intensity: float, grid: WavenumberGrid, label: str = 'X',
                      n_tapers: int = 1_000_000) -> SpectralMatrixField:
        """Espectro constante lambda de un proceso de Poisson."""
        if intensity <= 0:
            raise ConfigurationError(f"La intensidad debe ser positiva ({intensity}).")
        values = np.full(grid.shape + (1, 1), intensity, dtype=complex)
        return SpectralMatrixField(grid=grid, labels=(label,), values=values, n_tapers=n_tapers,
                                   metadata={'source': 'analytic'})
