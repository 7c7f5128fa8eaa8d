"""
Estimación espectral multitaper de patrones puntuales multitipo.

Rejillas simétricas de números de onda, transformadas discretas no uniformes
con taper y matriz espectral cruzada multitaper por nodo.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from apps.partialk.exceptions import ConfigurationError, ResourceError, UsageError
from apps.partialk.services.pattern_service import IntensityEstimates, MultiTypePattern, Window
from apps.partialk.services.taper_service import TaperFamily, TaperService

logger = logging.getLogger(__name__)


def worker_count(threads: Optional[int] = None) -> int:
    """Número de hilos permitido (argumento explícito o PARTIALK_THREADS)."""
    if threads is None:
        threads = getattr(settings, 'PARTIALK_THREADS', 1)
    return max(1, int(threads))


# =============================================================================
# TIPOS
# =============================================================================

@dataclass(frozen=True, eq=False)
class WavenumberGrid:
    """
    Rejilla Omega = (kmax o [-1,1]^d) intersección (spacing o Z^d).

    Simétrica bajo negación y siempre contiene el origen. El nodo central de
    cada eje es k_j = 0.
    """
    kmax: np.ndarray
    spacing: np.ndarray
    axes: Tuple[np.ndarray, ...]

    @property
    def dimension(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(axis) for axis in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def center(self) -> Tuple[int, ...]:
        return tuple(n // 2 for n in self.shape)

    def nodes(self) -> np.ndarray:
        """Arreglo (*shape, d) con las coordenadas de cada nodo."""
        mesh = np.meshgrid(*self.axes, indexing='ij')
        return np.stack(mesh, axis=-1)

    def norms(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing='ij')
        return np.sqrt(sum(component ** 2 for component in mesh))

    def node_at(self, flat_index: int) -> Tuple[float, ...]:
        multi = np.unravel_index(flat_index, self.shape)
        return tuple(float(axis[i]) for axis, i in zip(self.axes, multi))


@dataclass(frozen=True, eq=False)
class SpectralMatrixField:
    """
    Matriz hermítica P x P por nodo de la rejilla.

    Atributos:
        grid: rejilla de números de onda.
        labels: orden de filas y columnas.
        values: arreglo complejo (*grid.shape, P, P).
        n_tapers: M usado en la estimación.
        covariates: procesos parcializados (vacío para el espectro marginal).
        debias_factor: factor multiplicativo aplicado tras el complemento de Schur.
    """
    grid: WavenumberGrid
    labels: Tuple[str, ...]
    values: np.ndarray
    n_tapers: int
    covariates: Tuple[str, ...] = ()
    debias_factor: float = 1.0
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def n_types(self) -> int:
        return len(self.labels)

    def position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UsageError(f"El tipo '{label}' no está en la matriz espectral {list(self.labels)}") from None

    def entry(self, x: str, y: str) -> np.ndarray:
        """Campo complejo f_{XY}(k) sobre la rejilla."""
        return self.values[..., self.position(x), self.position(y)]

    def block(self, rows: Sequence[str], cols: Sequence[str]) -> np.ndarray:
        i = [self.position(label) for label in rows]
        j = [self.position(label) for label in cols]
        return self.values[..., i, :][..., :, j]


# =============================================================================
# SERVICIO
# =============================================================================

class SpectralService:
    """
    Servicio de estimación espectral multitaper.

    Responsabilidades:
    - Construir rejillas de números de onda con el espaciado por defecto 1 / L.
    - Calcular transformadas con taper por suma directa.
    - Promediar periodogramas cruzados sobre los M tapers.
    """

    @staticmethod
    def make_grid(window: Window, kmax, spacing=None, max_nodes: Optional[int] = None) -> WavenumberGrid:
        """
        Construye la rejilla simétrica de números de onda.

        Args:
            window: ventana de observación (define el espaciado por defecto).
            kmax: número de onda máximo por eje (escalar o vector).
            spacing: espaciado por eje; por defecto el recíproco de los lados.
            max_nodes: tope de nodos; por defecto PARTIALK_MAX_GRID_NODES.

        Raises:
            ConfigurationError: kmax o spacing no positivos.
            ResourceError: la rejilla excede el tope de nodos.
        """
        d = window.dimension
        kmax = np.broadcast_to(np.asarray(kmax, dtype=float), (d,)).copy()
        spacing = 1.0 / window.side_lengths if spacing is None else np.broadcast_to(np.asarray(spacing, dtype=float), (d,)).copy()
        if np.any(kmax <= 0) or np.any(spacing <= 0):
            raise ConfigurationError(f"kmax y spacing deben ser positivos (kmax={kmax.tolist()}, spacing={spacing.tolist()}).")

        # Tolerancia relativa para que kmax múltiplo exacto de spacing incluya el extremo
        half_counts = np.floor(kmax / spacing * (1 + 1e-12)).astype(int)
        size = int(np.prod(2 * half_counts + 1))
        cap = max_nodes if max_nodes is not None else getattr(settings, 'PARTIALK_MAX_GRID_NODES', 4_000_000)
        if size > cap:
            raise ResourceError(f"La rejilla tendría {size} nodos; el máximo configurado es {cap}.")

        axes = tuple(spacing[j] * np.arange(-half_counts[j], half_counts[j] + 1) for j in range(d))
        logger.debug(f"Rejilla de números de onda: forma {tuple(len(a) for a in axes)}, spacing {spacing.tolist()}")
        return WavenumberGrid(kmax=kmax, spacing=spacing, axes=axes)

    @staticmethod
    def taper_ft_grid(family: TaperFamily, m: int, grid: WavenumberGrid) -> np.ndarray:
        """H_m evaluada en toda la rejilla (producto exterior de factores 1-D)."""
        value = np.ones((), dtype=complex)
        for axis in range(grid.dimension):
            factor = TaperService.taper_ft_axis(family, m, axis, grid.axes[axis])
            value = np.multiply.outer(value, factor)
        return value

    @classmethod
    def tapered_dft(
        cls,
        pattern: MultiTypePattern,
        label: str,
        family: TaperFamily,
        m: int,
        grid: WavenumberGrid,
        intensities: IntensityEstimates,
        chunk_size: Optional[int] = None,
    ) -> np.ndarray:
        """
        J_X^{(m)}(k) = sum_x h_m(x) e^{-2 pi i <x,k>} - lambda_X H_m(k).

        Se evalúa por suma directa sobre la mitad k_1 >= 0 de la rejilla,
        separando la exponencial por ejes; la otra mitad se completa por
        conjugación, J(-k) = conj(J(k)).
        """
        points = pattern.points_of(label)
        chunk = chunk_size or getattr(settings, 'PARTIALK_DFT_CHUNK_SIZE', 2048)
        d = grid.dimension
        c0 = grid.center[0]
        half_axes = (grid.axes[0][c0:],) + tuple(grid.axes[1:])
        half = np.zeros(tuple(len(a) for a in half_axes), dtype=complex)

        operands = ','.join(f'n{chr(ord("a") + j)}' for j in range(d))
        subscripts = f"{operands}->{''.join(chr(ord('a') + j) for j in range(d))}"

        for start in range(0, len(points), chunk):
            block = points[start:start + chunk]
            factors = []
            for axis in range(d):
                x = block[:, axis]
                phase = np.exp(-2j * np.pi * np.outer(x, half_axes[axis]))
                factors.append(family.evaluate_axis(m, axis, x)[:, None] * phase)
            half += np.einsum(subscripts, *factors, optimize=True)

        full = np.empty(grid.shape, dtype=complex)
        full[c0:] = half
        full[:c0] = np.conj(np.flip(half[1:], axis=tuple(range(d))))

        lam = intensities[label]
        if lam:
            full -= lam * cls.taper_ft_grid(family, m, grid)
        return full

    @classmethod
    def multitaper_matrix(
        cls,
        pattern: MultiTypePattern,
        family: TaperFamily,
        grid: WavenumberGrid,
        intensities: IntensityEstimates,
        labels: Optional[Sequence[str]] = None,
        threads: Optional[int] = None,
    ) -> SpectralMatrixField:
        """
        F(k) = (1/M) sum_m J^{(m)}(k) J^{(m)}(k)^H por nodo.

        Args:
            labels: tipos incluidos (por defecto el registro completo, en su orden).
            threads: hilos para las transformadas; por defecto PARTIALK_THREADS.

        Raises:
            ConfigurationError: si M < P.
        """
        labels = tuple(labels) if labels is not None else pattern.labels
        M, P = family.count, len(labels)
        if M < P:
            raise ConfigurationError(
                f"Se necesitan al menos tantos tapers como procesos (M={M}, P={P})."
            )

        jobs = [(m, label) for m in range(M) for label in labels]
        with ThreadPoolExecutor(max_workers=worker_count(threads)) as pool:
            results = list(pool.map(
                lambda job: cls.tapered_dft(pattern, job[1], family, job[0], grid, intensities),
                jobs,
            ))
        J = np.stack(results).reshape((M, P) + grid.shape)
        J = np.moveaxis(J, (0, 1), (-2, -1))  # (*shape, M, P)

        values = np.einsum('...mp,...mq->...pq', J, np.conj(J), optimize=True) / M
        values = symmetrize(values)
        logger.debug(f"Matriz multitaper estimada: P={P}, M={M}, nodos={grid.size}")
        return SpectralMatrixField(grid=grid, labels=labels, values=values, n_tapers=M)


def symmetrize(values: np.ndarray) -> np.ndarray:
    """(A + A^H) / 2 por nodo, con diagonal exactamente real."""
    values = 0.5 * (values + np.conj(np.swapaxes(values, -1, -2)))
    P = values.shape[-1]
    diag = np.arange(P)
    values[..., diag, diag] = values[..., diag, diag].real
    return values
