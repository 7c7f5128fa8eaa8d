"""
Composición del estimador de la función K parcial.

patrón -> intensidades -> tapers -> rejilla -> matriz multitaper -> espectro
parcial -> inversión -> C / K / L / pcf, con un informe de ejecución que
registra hiperparámetros, factor de corrección, residuo imaginario y tiempo
por etapa.
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, replace
from itertools import combinations_with_replacement
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from apps.partialk.exceptions import ConfigurationError, PartialKError, UsageError
from apps.partialk.services.inversion_service import (
    ROUTES,
    STATISTICS,
    InversionService,
    RadiiGrid,
    SummaryCurve,
)
from apps.partialk.services.partial_service import PartialService, PartialSpec
from apps.partialk.services.pattern_service import IntensityEstimates, MultiTypePattern, PatternService
from apps.partialk.services.spectral_service import SpectralMatrixField, SpectralService
from apps.partialk.services.taper_service import TaperService

logger = logging.getLogger(__name__)

PARTIAL_ROUTES = ('schur', 'fast')


# =============================================================================
# CONFIGURACIÓN E INFORME
# =============================================================================

@dataclass(frozen=True)
class EstimationConfig:
    """
    Hiperparámetros del estimador.

    Los valores None se resuelven a partir de la ventana: spacing = 1 / L,
    radial_spacing = min(spacing), radial_max = min(kmax), bandwidth = 2 max(spacing).
    """
    n_tapers: int = 8
    kmax: Tuple[float, ...] = (0.5,)
    spacing: Optional[Tuple[float, ...]] = None
    radial_spacing: Optional[float] = None
    radial_max: Optional[float] = None
    bandwidth: Optional[float] = None
    kernel: str = 'box'
    route: str = 'rotational'
    partial_route: str = 'schur'
    debias: bool = True
    r_start: float = 0.5
    r_stop: float = 20.0
    r_count: int = 40
    threads: Optional[int] = None

    def __post_init__(self):
        if self.n_tapers < 1:
            raise ConfigurationError(f"n_tapers debe ser al menos 1 ({self.n_tapers}).")
        if self.route not in ROUTES:
            raise ConfigurationError(f"Ruta de inversión '{self.route}' desconocida; opciones: {ROUTES}")
        if self.partial_route not in PARTIAL_ROUTES:
            raise ConfigurationError(f"Ruta parcial '{self.partial_route}' desconocida; opciones: {PARTIAL_ROUTES}")
        object.__setattr__(self, 'kmax', tuple(float(v) for v in np.atleast_1d(self.kmax)))
        if self.spacing is not None:
            object.__setattr__(self, 'spacing', tuple(float(v) for v in np.atleast_1d(self.spacing)))

    @property
    def radii(self) -> RadiiGrid:
        return RadiiGrid.linspace(self.r_start, self.r_stop, self.r_count)

    def with_kmax(self, kmax) -> 'EstimationConfig':
        return replace(self, kmax=tuple(float(v) for v in np.atleast_1d(kmax)))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'EstimationConfig':
        return cls(**data)


@dataclass
class RunReport:
    """Registro de una ejecución del estimador."""
    stages: Dict[str, float] = field(default_factory=dict)
    info: Dict[str, object] = field(default_factory=dict)

    def as_comments(self) -> Dict[str, str]:
        entries = {key: _format(value) for key, value in self.info.items()}
        for stage, seconds in self.stages.items():
            entries[f'time_{stage}'] = f'{seconds:.4f}s'
        return entries


def _format(value) -> str:
    if isinstance(value, float):
        return f'{value:.15g}'
    if isinstance(value, (tuple, list)):
        return ' '.join(_format(v) for v in value)
    return str(value)


@contextmanager
def _stage(report: RunReport, name: str):
    """Mide la etapa y antepone su nombre a los errores del dominio."""
    start = time.perf_counter()
    logger.debug(f"Etapa '{name}' iniciada")
    try:
        yield
    except PartialKError as exc:
        logger.error(f"Fallo en la etapa '{name}': {exc}")
        raise exc.__class__(f"[{name}] {exc}") from exc
    finally:
        report.stages[name] = time.perf_counter() - start


# =============================================================================
# SERVICIO
# =============================================================================

class EstimationService:
    """
    Servicio de estimación de punta a punta.

    Responsabilidades:
    - Ejecutar el pipeline para un par objetivo y un conjunto de covariables.
    - Diagnóstico de convergencia en kmax.
    - Estimar todos los pares con el resto de tipos como covariables.
    """

    @staticmethod
    def resolve_pair(targets: Sequence[str]) -> Tuple[str, str]:
        targets = tuple(targets)
        if len(targets) == 1:
            return targets[0], targets[0]
        if len(targets) == 2:
            return targets[0], targets[1]
        raise UsageError(f"Se esperan uno o dos tipos objetivo, no {list(targets)}.")

    @classmethod
    def spectral_field(
        cls,
        pattern: MultiTypePattern,
        labels: Sequence[str],
        config: EstimationConfig,
        intensities: IntensityEstimates,
        report: RunReport,
    ) -> SpectralMatrixField:
        with _stage(report, 'tapers'):
            family = TaperService.make_sine_tapers(pattern.window, config.n_tapers)
        with _stage(report, 'grid'):
            grid = SpectralService.make_grid(pattern.window, config.kmax, config.spacing)
        with _stage(report, 'spectra'):
            field_ = SpectralService.multitaper_matrix(pattern, family, grid, intensities, labels=labels, threads=config.threads)
        report.info.update({
            'tapers': config.n_tapers,
            'grid_shape': grid.shape,
            'spacing': tuple(float(v) for v in grid.spacing),
            'kmax': tuple(float(v) for v in grid.kmax),
        })
        return field_

    @classmethod
    def estimate(
        cls,
        pattern: MultiTypePattern,
        targets: Sequence[str],
        covariates: Sequence[str],
        stat: str,
        config: EstimationConfig,
        field_: Optional[SpectralMatrixField] = None,
    ) -> Tuple[SummaryCurve, RunReport]:
        """
        Ejecuta el pipeline y devuelve la curva con su informe.

        Args:
            targets: X o (X, Y).
            covariates: tipos parcializados (vacío para el estadístico usual).
            stat: 'C', 'K', 'L' o 'pcf'.
            field_: matriz espectral ya estimada (reutilizada por estimate_all_pairs).
        """
        if stat not in STATISTICS:
            raise UsageError(f"Estadístico '{stat}' desconocido; opciones: {STATISTICS}")
        x, y = cls.resolve_pair(targets)
        spec = PartialSpec(targets=(x, y), covariates=tuple(covariates), debias=config.debias)
        spec.validate(pattern.labels)
        report = RunReport()
        started = time.perf_counter()

        with _stage(report, 'intensities'):
            intensities = PatternService.estimate_intensities(pattern)
            if stat != 'C' and (intensities[x] <= 0 or intensities[y] <= 0):
                raise UsageError(f"Intensidad nula para {x} o {y}; el estadístico {stat} no está definido.")

        if field_ is None:
            field_ = cls.spectral_field(pattern, spec.targets + spec.covariates, config, intensities, report)

        curve = cls.summarize_field(field_, (x, y), spec.covariates, stat, config, intensities, report)
        report.info['points'] = len(pattern)
        report.stages['total'] = time.perf_counter() - started
        curve.metadata.update(report.info)
        logger.info(
            f"{stat} {x},{y} | {','.join(spec.covariates) or '-'}: M={field_.n_tapers}, "
            f"factor {report.info['debias_factor']:.6g}, {report.stages['total']:.2f}s"
        )
        return curve, report

    @classmethod
    def summarize_field(
        cls,
        field_: SpectralMatrixField,
        pair: Tuple[str, str],
        covariates: Sequence[str],
        stat: str,
        config: EstimationConfig,
        intensities: IntensityEstimates,
        report: Optional[RunReport] = None,
    ) -> SummaryCurve:
        """
        Espectro parcial e inversión a partir de una matriz espectral dada.

        Sirve tanto para la matriz multitaper como para campos analíticos.
        """
        report = report if report is not None else RunReport()
        x, y = pair
        spec = PartialSpec(targets=(x, y), covariates=tuple(covariates), debias=config.debias)
        spec.validate(field_.labels)
        lambda_x, lambda_y = intensities[x], intensities[y]
        radii = config.radii
        d = field_.grid.dimension

        with _stage(report, 'partial'):
            partial = (
                PartialService.partial_matrix_fast(field_, spec)
                if config.partial_route == 'fast'
                else PartialService.partial_matrix_schur(field_, spec)
            )

        atom = InversionService.atom_correction(pair, intensities)
        excluded: Tuple[float, ...] = ()
        residual = 0.0
        with _stage(report, 'invert'):
            if config.route == 'rotational':
                source = InversionService.rotational_average(
                    partial, pair, config.radial_spacing, config.radial_max, config.bandwidth, config.kernel
                )
                excluded = source.excluded
            else:
                source = partial

            if stat == 'pcf':
                values = InversionService.pcf_from_spectrum(source, pair, atom, radii, d, lambda_x, lambda_y)
            elif config.route == 'rotational':
                values, residual = InversionService.c_rotational(source, atom, radii, d)
            else:
                values, residual = InversionService.c_direct(source, pair, atom, radii)

            if stat in ('K', 'L'):
                values = InversionService.k_from_c(values, lambda_x, lambda_y, d, radii)
            if stat == 'L':
                values = InversionService.signed_l(values, d)

        report.info.update({
            'statistic': stat,
            'pair': pair,
            'covariates': spec.covariates,
            'route': config.route,
            'partial_route': config.partial_route,
            'debias': config.debias,
            'debias_factor': partial.debias_factor,
            'atom': atom,
            'imag_residual': float(residual),
            'excluded_annuli': len(excluded),
        })
        return SummaryCurve(
            kind=stat,
            radii=radii,
            values=np.asarray(values, dtype=float),
            targets=pair,
            covariates=spec.covariates,
            dimension=d,
            route=config.route,
            metadata=dict(report.info),
        )

    @classmethod
    def kmax_diagnostic(
        cls,
        pattern: MultiTypePattern,
        targets: Sequence[str],
        covariates: Sequence[str],
        config: EstimationConfig,
        threshold: Optional[float] = None,
    ) -> Dict[str, object]:
        """
        Compara L en kmax y 2 kmax; converge si max |L_2 - L_1| < umbral.

        El umbral por defecto es PARTIALK_KMAX_THRESHOLD (unidades espaciales).
        """
        threshold = threshold if threshold is not None else getattr(settings, 'PARTIALK_KMAX_THRESHOLD', 0.05)
        base, _ = cls.estimate(pattern, targets, covariates, 'L', config)
        doubled_config = config.with_kmax(2 * np.asarray(config.kmax))
        if config.radial_max is not None:
            doubled_config = replace(doubled_config, radial_max=2 * config.radial_max)
        doubled, _ = cls.estimate(pattern, targets, covariates, 'L', doubled_config)
        difference = float(np.max(np.abs(doubled.values - base.values)))
        converged = difference < threshold
        logger.info(f"Diagnóstico kmax={config.kmax}: diferencia {difference:.4g} ({'converge' if converged else 'no converge'})")
        return {
            'kmax': config.kmax,
            'kmax_doubled': doubled_config.kmax,
            'max_difference': difference,
            'threshold': threshold,
            'converged': converged,
            'radii': base.radii.radii,
            'l_base': base.values,
            'l_doubled': doubled.values,
        }

    @classmethod
    def estimate_all_pairs(
        cls,
        pattern: MultiTypePattern,
        config: EstimationConfig,
        stat: str = 'L',
    ) -> Dict[Tuple[str, str], SummaryCurve]:
        """
        Curvas para cada par no ordenado (incluido X = X), parcializando por el resto de tipos.

        La matriz multitaper se estima una sola vez sobre todo el registro.
        """
        report = RunReport()
        intensities = PatternService.estimate_intensities(pattern)
        field_ = cls.spectral_field(pattern, pattern.labels, config, intensities, report)
        curves: Dict[Tuple[str, str], SummaryCurve] = {}
        for x, y in combinations_with_replacement(pattern.labels, 2):
            rest = [label for label in pattern.labels if label not in (x, y)]
            curve, _ = cls.estimate(pattern, (x, y) if x != y else (x,), rest, stat, config, field_=field_)
            curves[(x, y)] = curve
        return curves
