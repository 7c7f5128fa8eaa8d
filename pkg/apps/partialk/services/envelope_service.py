"""
Envolventes globales MAD bajo hipótesis nulas de Poisson o de independencia.

Solo para estadísticos no parciales: para los parciales no existe un esquema
de remuestreo que preserve todas las componentes espectrales, de modo que se
rechazan.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from apps.partialk.exceptions import ConfigurationError, ShapeError, UnsupportedError, UsageError
from apps.partialk.services.estimation_service import EstimationConfig, EstimationService
from apps.partialk.services.inversion_service import SummaryCurve
from apps.partialk.services.pattern_service import MultiTypePattern, PatternService
from apps.partialk.services.simulation_service import SimulationService

logger = logging.getLogger(__name__)

NULL_KINDS = ('poisson-marginal', 'random-shift-pair')
MIN_SIMULATIONS = 19


class UnsupportedNullError(UnsupportedError):
    """Se pidió una envolvente para un estadístico parcial."""
    pass


@dataclass(frozen=True)
class EnvelopeConfig:
    """
    Configuración de la envolvente.

    Atributos:
        n_sim: número de simulaciones (>= 19 y >= ceil(1/alpha) - 1).
        alpha: nivel global, en (0, 1).
        null: 'poisson-marginal' o 'random-shift-pair'.
        seed: semilla de la secuencia de réplicas.
    """
    n_sim: int = 199
    alpha: float = 0.05
    null: str = 'poisson-marginal'
    seed: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigurationError(f"alpha debe estar en (0, 1) ({self.alpha}).")
        minimum = max(MIN_SIMULATIONS, math.ceil(1 / self.alpha) - 1)
        if self.n_sim < minimum:
            raise ConfigurationError(f"Se requieren al menos {minimum} simulaciones para alpha={self.alpha} (n_sim={self.n_sim}).")
        if self.null not in NULL_KINDS:
            raise ConfigurationError(f"Hipótesis nula '{self.null}' desconocida; opciones: {NULL_KINDS}")

    def replicate_seeds(self) -> List[int]:
        """Semillas independientes por réplica, derivadas de ``seed``."""
        children = np.random.SeedSequence(self.seed).spawn(self.n_sim)
        return [int(child.generate_state(1)[0]) for child in children]


# =============================================================================
# SERVICIO
# =============================================================================

class EnvelopeService:
    """
    Servicio de envolventes Monte-Carlo.

    Responsabilidades:
    - Banda MAD global a partir de curvas simuladas.
    - Simular el patrón nulo y recalcular el estadístico por réplica.
    """

    @staticmethod
    def mad_global_envelope(curves: np.ndarray, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        Banda T0 +- c con T0 la mediana puntual, D_i = max_r |T_i - T0| y c el
        estadístico de orden ceil((1 - alpha)(n + 1)) de los D_i.

        Raises:
            ShapeError: las curvas no forman una matriz n x R.
        """
        try:
            curves = np.asarray(curves, dtype=float)
        except ValueError:
            raise ShapeError("Las curvas simuladas no comparten la rejilla de radios.") from None
        if curves.ndim != 2 or curves.shape[0] == 0:
            raise ShapeError(f"Se espera una matriz n_sim x R, no forma {curves.shape}.")
        if not 0 < alpha < 1:
            raise ConfigurationError(f"alpha debe estar en (0, 1) ({alpha}).")
        n = curves.shape[0]
        center = np.median(curves, axis=0)
        deviation = np.max(np.abs(curves - center), axis=1)
        k = min(n, math.ceil((1 - alpha) * (n + 1)))
        c = np.sort(deviation)[k - 1]
        return center - c, center + c

    @staticmethod
    def null_pattern(pattern: MultiTypePattern, targets: Tuple[str, str], null: str, seed: int) -> MultiTypePattern:
        """Una réplica bajo la hipótesis nula indicada."""
        rng = np.random.default_rng(seed)
        x, y = targets
        if null == 'poisson-marginal':
            intensities = PatternService.estimate_intensities(pattern)
            groups = {
                label: SimulationService.sim_poisson(pattern.window, intensities[label], rng)
                for label in dict.fromkeys((x, y))
            }
            return MultiTypePattern.from_groups(pattern.window, groups)
        if x == y:
            raise ConfigurationError("La nula de desplazamiento aleatorio requiere dos tipos distintos.")
        window = pattern.window
        shift = rng.uniform(size=window.dimension) * window.side_lengths
        moved = SimulationService.sim_shift(pattern.points_of(y), shift, window)
        return MultiTypePattern.from_groups(window, {x: pattern.points_of(x), y: moved})

    @classmethod
    def null_curves(
        cls,
        pattern: MultiTypePattern,
        targets: Tuple[str, str],
        stat: str,
        config: EstimationConfig,
        null: str,
        seeds: Sequence[int],
    ) -> np.ndarray:
        """Curvas del estadístico para cada semilla (una fila por réplica)."""
        curves = []
        for seed in seeds:
            replicate = cls.null_pattern(pattern, targets, null, int(seed))
            curve, _ = EstimationService.estimate(
                replicate, targets if targets[0] != targets[1] else targets[:1], (), stat, config
            )
            curves.append(curve.values)
        return np.vstack(curves) if curves else np.zeros((0, config.r_count))

    @classmethod
    def poisson_null_envelope(
        cls,
        pattern: MultiTypePattern,
        targets: Sequence[str],
        stat: str,
        config: EstimationConfig,
        envelope: EnvelopeConfig,
        covariates: Sequence[str] = (),
    ) -> SummaryCurve:
        """
        Curva observada con bandas MAD de ``envelope.n_sim`` réplicas nulas.

        Las réplicas se reparten en lotes de PARTIALK_ENVELOPE_BATCH_SIZE que se
        ejecutan como tareas Celery (en el mismo proceso en modo eager).

        Raises:
            UnsupportedNullError: se pidieron covariables.
        """
        if covariates:
            raise UnsupportedNullError(
                "No hay envolventes para estadísticos parciales: construir una hipótesis nula que "
                "preserve la dependencia con las covariables es un problema abierto."
            )
        from apps.partialk.tasks import null_curves_task

        pair = EstimationService.resolve_pair(targets)
        observed, report = EstimationService.estimate(pattern, targets, (), stat, config)

        seeds = envelope.replicate_seeds()
        size = max(1, getattr(settings, 'PARTIALK_ENVELOPE_BATCH_SIZE', 20))
        batches = [seeds[i:i + size] for i in range(0, len(seeds), size)]
        logger.info(f"Envolvente {stat} {pair}: {envelope.n_sim} réplicas en {len(batches)} lote(s), nula {envelope.null}")

        pending = [
            null_curves_task.delay(pattern.to_dict(), list(pair), stat, config.to_dict(), envelope.null, batch)
            for batch in batches
        ]
        rows: List[List[float]] = []
        for result in pending:
            rows.extend(result.get())
        curves = np.asarray(rows, dtype=float)
        if curves.shape != (envelope.n_sim, observed.values.size):
            raise ShapeError(f"Las réplicas devolvieron forma {curves.shape}.")

        lower, upper = cls.mad_global_envelope(curves, envelope.alpha)
        banded = observed.with_bands(lower, upper)
        banded.metadata.update({
            'null': envelope.null,
            'n_sim': envelope.n_sim,
            'alpha': envelope.alpha,
            'seed': '' if envelope.seed is None else envelope.seed,
        })
        return banded

    @staticmethod
    def coverage(curve: SummaryCurve) -> Dict[str, object]:
        """Indica si la curva observada sale de la banda y en qué radios."""
        if curve.lower is None or curve.upper is None:
            raise UsageError("La curva no tiene bandas.")
        outside = (curve.values < curve.lower) | (curve.values > curve.upper)
        return {'inside': not bool(outside.any()), 'radii_outside': curve.radii.radii[outside].tolist()}
