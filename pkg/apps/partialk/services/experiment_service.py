"""
Experimentos de validación del estimador.

- Comparación de la corrección de sesgo: L parcial de X dado el resto de tipos,
  con y sin el factor M / (M - P_Z), frente a la referencia analítica.
- Paridad de estimadores: L directo, L rotacional y L con corrección de borde
  frente al L verdadero de modelos univariantes con forma cerrada.
"""

import logging
import math
import time
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from apps.partialk.exceptions import ConfigurationError
from apps.partialk.services.classical_service import ClassicalService
from apps.partialk.services.estimation_service import EstimationConfig, EstimationService, RunReport
from apps.partialk.services.inversion_service import InversionService
from apps.partialk.services.oracle_service import ClusterModelSpec, OracleError, OracleService
from apps.partialk.services.pattern_service import IntensityEstimates, PatternService, Window
from apps.partialk.services.simulation_service import DEFAULT_SIDE, SCENARIO_DEFAULTS, SimulationService
from apps.partialk.services.spectral_service import SpectralService
from apps.partialk.utils.curve_csv import relative_error

logger = logging.getLogger(__name__)

# Escenarios cuyo X | (Y, Z) tiene referencia analítica
ORACLE_SCENARIOS = ('tri-independent', 'custom')
PARITY_MODELS = ('poisson', 'thomas')
PARITY_METHODS = ('direct', 'rotational', 'border')

# Modelo de oracle_check -> escenario con sus parámetros por defecto
ORACLE_MODELS = {
    'thomas': 'thomas',
    'cluster': 'tri-independent',
    'cox-squared': 'cox-squared',
    'poisson': 'poisson',
}


def _replicate_seeds(seed: Optional[int], n_rep: int) -> List[int]:
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(n_rep)]


class ExperimentService:
    """
    Servicio de experimentos Monte-Carlo.

    Responsabilidades:
    - debias_comparison: efecto del factor de corrección en el L parcial.
    - estimator_parity: sesgo, error cuadrático medio y tiempo de cada ruta.
    - oracle_check: inversión del espectro analítico frente a la cuadratura de referencia.
    """

    @staticmethod
    def true_l(model: str, params: Dict[str, float], radii: np.ndarray) -> np.ndarray:
        """L verdadero en el plano: r (Poisson) o sqrt(K_Thomas / pi)."""
        if model == 'poisson':
            return np.asarray(radii, dtype=float).copy()
        if model == 'thomas':
            k = OracleService.thomas_k(radii, params['lambda_parent'], params['sigma'])
            return np.sqrt(k / math.pi)
        raise ConfigurationError(f"Modelo sin L en forma cerrada '{model}'; opciones: {PARITY_MODELS}")

    @classmethod
    def debias_comparison(
        cls,
        scenario: str,
        n_rep: int,
        config: EstimationConfig,
        params: Optional[Dict[str, object]] = None,
        window: Optional[Window] = None,
        seed: Optional[int] = None,
    ) -> pd.DataFrame:
        """
        Por radio: referencia, media del L parcial sin corregir y media corregida.

        La referencia solo existe para los escenarios de conglomerados
        independientes (sin desplazamiento); en el resto queda en NaN.
        """
        if n_rep < 1:
            raise ConfigurationError(f"n_rep debe ser al menos 1 ({n_rep}).")
        radii = config.radii
        plugin_rows, debiased_rows = [], []
        spec = None
        for i, rep_seed in enumerate(_replicate_seeds(seed, n_rep)):
            spec = SimulationService.scenario_spec(scenario, params, window=window, seed=rep_seed)
            pattern = SimulationService.sim_scenario(spec)
            covariates = [label for label in pattern.labels if label != 'X']
            intensities = PatternService.estimate_intensities(pattern)
            field_ = EstimationService.spectral_field(pattern, pattern.labels, config, intensities, RunReport())
            plugin, _ = EstimationService.estimate(
                pattern, ('X',), covariates, 'L', replace(config, debias=False), field_=field_
            )
            debiased, _ = EstimationService.estimate(
                pattern, ('X',), covariates, 'L', replace(config, debias=True), field_=field_
            )
            plugin_rows.append(plugin.values)
            debiased_rows.append(debiased.values)
            logger.debug(f"Réplica {i + 1}/{n_rep} de {scenario} completada")

        oracle = np.full(radii.count, np.nan)
        p = spec.params
        if scenario in ORACLE_SCENARIOS and not p.get('shift'):
            model = ClusterModelSpec(p['lambda_z'], p['mu_x'], p['mu_y'], p['sigma_x'], p['sigma_y'])
            entry = OracleService.cluster_partial_entry(model, ('X', 'X'), ('Y', 'Z'))
            try:
                oracle = OracleService.oracle_curve(entry, 'L', radii.radii)
            except OracleError as exc:
                logger.warning(f"Referencia no disponible: {exc}")
        else:
            logger.warning(f"El escenario '{scenario}' no tiene referencia analítica; columna oracle en NaN")

        plugin_mean = np.nanmean(np.vstack(plugin_rows), axis=0)
        debiased_mean = np.nanmean(np.vstack(debiased_rows), axis=0)
        return pd.DataFrame({
            'r': radii.radii,
            'oracle': oracle,
            'plugin': plugin_mean,
            'debiased': debiased_mean,
            'plugin_error': np.abs(plugin_mean - oracle),
            'debiased_error': np.abs(debiased_mean - oracle),
        })

    @classmethod
    def estimator_parity(
        cls,
        model: str,
        side: float,
        n_rep: int,
        config: EstimationConfig,
        params: Optional[Dict[str, object]] = None,
        seed: Optional[int] = None,
    ) -> pd.DataFrame:
        """
        Tabla larga (r, method, mean, bias, mse, seconds) para las tres rutas de L.

        ``seconds`` es el tiempo medio por réplica de cada método.
        """
        if model not in PARITY_MODELS:
            raise ConfigurationError(f"Modelo '{model}' no soportado; opciones: {PARITY_MODELS}")
        if n_rep < 1:
            raise ConfigurationError(f"n_rep debe ser al menos 1 ({n_rep}).")
        if side <= 0:
            raise ConfigurationError(f"El lado de la ventana debe ser positivo ({side}).")

        radii = config.radii
        window = Window.box(0, side, 0, side)
        values = {method: [] for method in PARITY_METHODS}
        seconds = {method: 0.0 for method in PARITY_METHODS}
        spec = None
        for rep_seed in _replicate_seeds(seed, n_rep):
            spec = SimulationService.scenario_spec(model, params, window=window, seed=rep_seed)
            pattern = SimulationService.sim_scenario(spec)
            for method in PARITY_METHODS:
                started = time.perf_counter()
                if method == 'border':
                    k = ClassicalService.border_corrected_k(pattern, 'X', 'X', radii)
                    curve = InversionService.signed_l(k, 2)
                else:
                    curve, _ = EstimationService.estimate(pattern, ('X',), (), 'L', replace(config, route=method))
                    curve = curve.values
                seconds[method] += time.perf_counter() - started
                values[method].append(curve)

        truth = cls.true_l(model, spec.params, radii.radii)
        frames = []
        for method in PARITY_METHODS:
            stacked = np.vstack(values[method])
            error = stacked - truth
            frames.append(pd.DataFrame({
                'r': radii.radii,
                'method': method,
                'truth': truth,
                'mean': np.nanmean(stacked, axis=0),
                'bias': np.nanmean(error, axis=0),
                'mse': np.nanmean(error ** 2, axis=0),
                'seconds': seconds[method] / n_rep,
            }))
            logger.info(f"Paridad {model} ({method}): {seconds[method] / n_rep:.3f}s por réplica")
        return pd.concat(frames, ignore_index=True)

    # -------------------------------------------------------------------------
    # Comparación con las referencias analíticas
    # -------------------------------------------------------------------------

    @staticmethod
    def oracle_check(
        model: str,
        stat: str,
        pair: Tuple[str, str],
        covariates: Sequence[str],
        config: EstimationConfig,
        params: Optional[Dict[str, float]] = None,
        side: float = DEFAULT_SIDE,
    ) -> pd.DataFrame:
        """
        Tabla (r, oracle, pipeline, rel_error).

        ``pipeline`` invierte el espectro analítico muestreado en la rejilla del
        estimador, de modo que la diferencia mide solo la discretización. Para
        Thomas con K marginal se añade la columna ``closed_form``.
        """
        if model not in ORACLE_MODELS:
            raise ConfigurationError(f"Modelo '{model}' sin referencia; opciones: {ORACLE_MODELS}")
        defaults = SCENARIO_DEFAULTS[ORACLE_MODELS[model]]
        unknown = sorted(set(params or {}) - set(defaults))
        if unknown:
            raise ConfigurationError(f"Parámetros no reconocidos para '{model}': {unknown}")
        p = {key: float(value) for key, value in {**defaults, **(params or {})}.items() if key != 'shift'}

        config = replace(config, debias=False)
        radii = config.radii
        window = Window.box(0, side, 0, side)
        grid = SpectralService.make_grid(window, config.kmax, config.spacing)
        covariates = tuple(covariates)

        if model in ('thomas', 'cluster'):
            spec = (
                ClusterModelSpec.thomas(p['lambda_parent'], p['mu'], p['sigma'])
                if model == 'thomas'
                else ClusterModelSpec(p['lambda_z'], p['mu_x'], p['mu_y'], p['sigma_x'], p['sigma_y'])
            )
            entry = OracleService.cluster_partial_entry(spec, pair, covariates)
            field_ = OracleService.analytic_field(spec, grid)
            intensities = IntensityEstimates(spec.intensities)
        elif model == 'cox-squared':
            if tuple(pair) != ('X', 'Y') or covariates not in ((), ('Z',)):
                raise ConfigurationError("El modelo Cox-cuadrado solo tiene referencia para X,Y dado Z.")
            intensity = OracleService.cox_squared_intensity(p['lambda_z'], p['a'])
            entry = OracleService.cox_squared_entry(p['lambda_z'], p['a'], intensity, intensity)
            field_ = OracleService.cox_squared_partial_field(p['lambda_z'], p['a'], grid)
            intensities = IntensityEstimates({'X': intensity, 'Y': intensity})
            covariates = ()
        else:
            if tuple(dict.fromkeys(pair)) != ('X',) or covariates:
                raise ConfigurationError("El modelo de Poisson es univariante: use --pair X sin covariables.")
            entry = OracleService.poisson_entry(p['lambda'])
            field_ = OracleService.poisson_field(p['lambda'], grid)
            intensities = IntensityEstimates({'X': p['lambda']})

        if float(np.min(grid.kmax)) < entry.support:
            logger.warning(
                f"kmax={np.min(grid.kmax):g} por debajo del soporte efectivo {entry.support:g}; "
                f"la columna pipeline incluye error de truncamiento"
            )
        oracle = OracleService.oracle_curve(entry, stat, radii.radii)
        pipeline = EstimationService.summarize_field(field_, tuple(pair), covariates, stat, config, intensities)
        rel_error = relative_error(pipeline.values, oracle)
        frame = pd.DataFrame({'r': radii.radii, 'oracle': oracle, 'pipeline': pipeline.values, 'rel_error': rel_error})
        if model == 'thomas' and stat == 'K' and tuple(dict.fromkeys(pair)) == ('X',) and not covariates:
            frame['closed_form'] = OracleService.thomas_k(radii.radii, p['lambda_parent'], p['sigma'])
        logger.info(f"oracle_check {model} {stat}: error relativo máximo {np.nanmax(rel_error):.3g}")
        return frame
