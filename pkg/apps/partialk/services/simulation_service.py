"""
Simulación reproducible de procesos puntuales y escenarios multitipo.

Primitivas: Poisson homogéneo, agrupamiento de Thomas con recorte a la
ventana, adelgazamiento por marcas, adelgazamiento por distancia a otro tipo,
desplazamiento toroidal y el modelo Cox-cuadrado. Los escenarios componen las
primitivas; los tipos latentes (X0) no se emiten.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings
from scipy.spatial import cKDTree

from apps.partialk.exceptions import ConfigurationError, ResourceError, UsageError
from apps.partialk.services.pattern_service import MultiTypePattern, Window

logger = logging.getLogger(__name__)

# Margen multiplicativo sobre el máximo de Lambda en la rejilla
COX_BOUND_SAFETY = 1.25

# Más allá de 8a el núcleo gaussiano es menor que e^{-32}
COX_KERNEL_REACH = 8.0


class UnknownScenarioError(UsageError):
    """Identificador de escenario desconocido."""
    pass


# =============================================================================
# ESCENARIOS
# =============================================================================

SCENARIO_DEFAULTS: Dict[str, Dict[str, object]] = {
    'biv-independent': {'lambda_y': 0.01, 'mu_x0': 3.0, 'sigma_x0': 1.5},
    'biv-packs': {'lambda_y': 0.01, 'mu_x0': 3.0, 'sigma_x0': 1.5, 'mu_x': 1.0, 'sigma_x': 1.0},
    'biv-solitary': {'lambda_y': 0.01, 'mu_x0': 15.0, 'sigma_x0': 1.5, 'r_x': 3.0, 'p_x': 0.1},
    'tri-independent': {'lambda_z': 0.01, 'mu_x': 3.0, 'sigma_x': 2.0, 'mu_y': 3.0, 'sigma_y': 2.0},
    'tri-cooperative': {'lambda_z': 0.01, 'mu_y': 3.0, 'sigma_y': 2.0, 'mu_x': 1.0, 'sigma_x': 2.0},
    'tri-antagonistic': {
        'lambda_z': 0.01, 'mu_y': 3.0, 'sigma_y': 2.0,
        'mu_x0': 10.0, 'sigma_x0': 2.0, 'r_x': 3.0, 'p_x': 0.1,
    },
    'cox-squared': {'lambda_z': 0.01, 'a': 1.0},
    'custom': {
        'lambda_z': 0.01, 'mu_x': 3.0, 'sigma_x': 2.0, 'mu_y': 3.0, 'sigma_y': 2.0, 'shift': (),
    },
    'poisson': {'lambda': 0.01},
    'thomas': {'lambda_parent': 0.01, 'mu': 3.0, 'sigma': 1.5},
    'matern-ii': {'lambda': 0.01, 'r_x': 3.0, 'p_x': 0.0},
}

SCENARIOS: Tuple[str, ...] = tuple(SCENARIO_DEFAULTS)

DEFAULT_SIDE = 300.0


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    """
    Escenario de simulación con sus parámetros.

    Atributos:
        scenario: identificador (ver SCENARIOS).
        params: valores explícitos; se completan con los valores por defecto.
        window: ventana de simulación (por defecto [0, 300]^2).
        seed: semilla del generador.
    """
    scenario: str
    params: Dict[str, object] = field(default_factory=dict)
    window: Optional[Window] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.scenario not in SCENARIO_DEFAULTS:
            raise UnknownScenarioError(
                f"Escenario desconocido '{self.scenario}'. Opciones válidas: {', '.join(SCENARIOS)}"
            )
        defaults = SCENARIO_DEFAULTS[self.scenario]
        unknown = sorted(set(self.params) - set(defaults))
        if unknown:
            raise ConfigurationError(
                f"Parámetros no reconocidos para '{self.scenario}': {unknown}; admitidos: {sorted(defaults)}"
            )
        merged = {**defaults, **self.params}
        for key, value in merged.items():
            if key == 'shift':
                merged[key] = tuple(float(v) for v in value)
                continue
            value = float(value)
            if not np.isfinite(value):
                raise ConfigurationError(f"El parámetro {key} debe ser finito.")
            if key.startswith(('lambda', 'mu', 'r_')) and value < 0:
                raise ConfigurationError(f"El parámetro {key} debe ser no negativo ({value}).")
            if key.startswith('sigma') or key == 'a':
                if value <= 0:
                    raise ConfigurationError(f"El parámetro {key} debe ser positivo ({value}).")
            if key == 'p_x' and not 0 <= value <= 1:
                raise ConfigurationError(f"p_x debe estar en [0, 1] ({value}).")
            merged[key] = value
        object.__setattr__(self, 'params', merged)
        if self.window is None:
            object.__setattr__(self, 'window', Window.box(0, DEFAULT_SIDE, 0, DEFAULT_SIDE))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def header(self) -> Dict[str, str]:
        """Comentarios de cabecera para el CSV del patrón."""
        entries = {'scenario': self.scenario, 'seed': '' if self.seed is None else str(self.seed)}
        for key, value in self.params.items():
            entries[key] = ' '.join(f'{v:g}' for v in value) if isinstance(value, tuple) else f'{value:g}'
        return entries


# =============================================================================
# SERVICIO
# =============================================================================

class SimulationService:
    """
    Servicio de simulación.

    Todas las primitivas son funciones puras de sus argumentos y del generador
    numpy recibido.
    """

    @staticmethod
    def sim_poisson(window: Window, intensity: float, rng: np.random.Generator) -> np.ndarray:
        """Poisson homogéneo: N ~ Poisson(lambda |W|), ubicaciones uniformes."""
        if intensity < 0:
            raise ConfigurationError(f"La intensidad debe ser no negativa ({intensity}).")
        n = int(rng.poisson(intensity * window.volume))
        return window.lower + rng.uniform(size=(n, window.dimension)) * window.side_lengths

    @staticmethod
    def sim_cluster(
        parents: np.ndarray,
        mu: float,
        sigma: float,
        window: Window,
        rng: np.random.Generator,
    ) -> np.ndarray:
        """
        Descendencia de Thomas: Poisson(mu) hijos por padre con desplazamientos
        N(0, sigma^2 I); los hijos fuera de la ventana se descartan.
        """
        if mu < 0 or sigma <= 0:
            raise ConfigurationError(f"Se requiere mu >= 0 y sigma > 0 (mu={mu}, sigma={sigma}).")
        d = window.dimension
        parents = np.asarray(parents, dtype=float).reshape(-1, d)
        counts = rng.poisson(mu, size=len(parents))
        centres = np.repeat(parents, counts, axis=0)
        offspring = centres + rng.normal(0.0, sigma, size=centres.shape)
        return offspring[window.contains(offspring)]

    @staticmethod
    def sim_mark_thinning(points: np.ndarray, r_x: float, p_x: float, rng: np.random.Generator) -> np.ndarray:
        """
        Adelgazamiento por marcas uniformes.

        Un punto con algún vecino de marca mayor a distancia <= r_x sobrevive
        con probabilidad p_x (un único ensayo, sin importar cuántos vecinos);
        el resto sobrevive siempre. Marcas y uniformes de supervivencia se
        extraen para todos los puntos, de modo que dos valores de p_x con la
        misma semilla comparten los números aleatorios.
        """
        points = np.asarray(points, dtype=float)
        n = len(points)
        marks = rng.uniform(size=n)
        trials = rng.uniform(size=n)
        if n < 2 or r_x <= 0:
            return points.copy()
        pairs = cKDTree(points).query_pairs(r_x, output_type='ndarray')
        dominated = np.zeros(n, dtype=bool)
        if len(pairs):
            i, j = pairs[:, 0], pairs[:, 1]
            dominated[np.where(marks[i] < marks[j], i, j)] = True
        survive = ~dominated | (trials < p_x)
        return points[survive]

    @staticmethod
    def sim_distance_thinning(
        points: np.ndarray,
        reference: np.ndarray,
        r_x: float,
        p_x: float,
        rng: np.random.Generator,
    ) -> np.ndarray:
        """Los puntos a distancia <= r_x de algún punto de referencia sobreviven con probabilidad p_x."""
        points = np.asarray(points, dtype=float)
        trials = rng.uniform(size=len(points))
        reference = np.asarray(reference, dtype=float).reshape(-1, points.shape[1] if points.ndim == 2 else 1)
        if len(points) == 0 or len(reference) == 0 or r_x <= 0:
            return points.copy()
        distance, _ = cKDTree(reference).query(points, k=1, distance_upper_bound=r_x)
        near = np.isfinite(distance)
        return points[~near | (trials < p_x)]

    @staticmethod
    def sim_shift(points: np.ndarray, shift: Sequence[float], window: Window) -> np.ndarray:
        """Traslada por ``shift``; los puntos que salen de la ventana se envuelven periódicamente."""
        points = np.asarray(points, dtype=float).reshape(-1, window.dimension)
        shift = np.broadcast_to(np.asarray(shift, dtype=float), (window.dimension,))
        moved = points + shift
        outside = ~window.contains(moved)
        if np.any(outside):
            moved[outside] = window.lower + np.mod(moved[outside] - window.lower, window.side_lengths)
        return moved

    @classmethod
    def sim_cox_squared(
        cls,
        window: Window,
        lambda_z: float,
        a: float,
        rng: np.random.Generator,
        grid_factor: Optional[float] = None,
    ) -> MultiTypePattern:
        """
        Modelo Cox-cuadrado: Z Poisson, Lambda(u) = [sum_z g(u - z)]^2 con
        g(x) = exp(-|x|^2 / (2 a^2)); X e Y son Cox independientes dado Lambda.

        X e Y se obtienen adelgazando un Poisson dominante cuya tasa es el
        máximo de Lambda en una rejilla de paso a * grid_factor, con margen.

        Raises:
            ResourceError: la rejilla excede el tope o Lambda supera la cota en algún candidato.
        """
        if lambda_z <= 0 or a <= 0:
            raise ConfigurationError(f"Se requiere lambda_Z > 0 y a > 0 (lambda_Z={lambda_z}, a={a}).")
        factor = grid_factor if grid_factor is not None else getattr(settings, 'PARTIALK_COX_GRID_FACTOR', 0.25)
        d = window.dimension
        z = cls.sim_poisson(window, lambda_z, rng)
        if len(z) == 0:
            empty = np.zeros((0, d))
            return MultiTypePattern.from_groups(window, {'X': empty, 'Y': empty, 'Z': z})

        step = a * factor
        axes = [np.arange(lo, hi + step / 2, step) for lo, hi in zip(window.lower, window.upper)]
        nodes = int(np.prod([len(axis) for axis in axes]))
        cap = getattr(settings, 'PARTIALK_MAX_GRID_NODES', 4_000_000)
        if nodes > cap:
            raise ResourceError(f"La rejilla de Lambda tendría {nodes} nodos; el máximo configurado es {cap}.")

        factors = [np.exp(-(axis[:, None] - z[None, :, j]) ** 2 / (2 * a * a)) for j, axis in enumerate(axes)]
        letters = 'abc'[:d]
        driving = np.einsum(','.join(f'{c}z' for c in letters) + f'->{letters}', *factors, optimize=True)
        bound = float(driving.max()) ** 2 * COX_BOUND_SAFETY
        logger.debug(f"Cox-cuadrado: {len(z)} puntos Z, cota dominante {bound:.4g}")

        tree = cKDTree(z)
        groups = {}
        for label in ('X', 'Y'):
            candidates = cls.sim_poisson(window, bound, rng)
            intensity = cls._cox_intensity(candidates, tree, a)
            if np.any(intensity > bound):
                raise ResourceError(
                    f"Lambda excede la cota dominante ({intensity.max():.4g} > {bound:.4g}); "
                    f"reduzca PARTIALK_COX_GRID_FACTOR."
                )
            keep = rng.uniform(size=len(candidates)) * bound < intensity
            groups[label] = candidates[keep]
        groups['Z'] = z
        return MultiTypePattern.from_groups(window, groups)

    @staticmethod
    def _cox_intensity(points: np.ndarray, tree: cKDTree, a: float) -> np.ndarray:
        if len(points) == 0:
            return np.zeros(0)
        pairs = cKDTree(points).sparse_distance_matrix(tree, COX_KERNEL_REACH * a, output_type='ndarray')
        total = np.bincount(pairs['i'], weights=np.exp(-pairs['v'] ** 2 / (2 * a * a)), minlength=len(points))
        return total ** 2

    @classmethod
    def sim_scenario(cls, spec: ScenarioSpec) -> MultiTypePattern:
        """
        Compone las primitivas según el escenario.

        Raises:
            UnknownScenarioError: identificador no registrado.
        """
        rng = spec.rng()
        p = spec.params
        w = spec.window
        name = spec.scenario
        logger.info(f"Simulando escenario '{name}' (semilla {spec.seed})")

        if name == 'poisson':
            groups = {'X': cls.sim_poisson(w, p['lambda'], rng)}
        elif name == 'thomas':
            parents = cls.sim_poisson(w, p['lambda_parent'], rng)
            groups = {'X': cls.sim_cluster(parents, p['mu'], p['sigma'], w, rng)}
        elif name == 'matern-ii':
            base = cls.sim_poisson(w, p['lambda'], rng)
            groups = {'X': cls.sim_mark_thinning(base, p['r_x'], p['p_x'], rng)}
        elif name.startswith('biv-'):
            y = cls.sim_poisson(w, p['lambda_y'], rng)
            x0 = cls.sim_cluster(y, p['mu_x0'], p['sigma_x0'], w, rng)
            if name == 'biv-independent':
                x = x0
            elif name == 'biv-packs':
                x = cls.sim_cluster(x0, p['mu_x'], p['sigma_x'], w, rng)
            else:
                x = cls.sim_mark_thinning(x0, p['r_x'], p['p_x'], rng)
            groups = {'X': x, 'Y': y}
        elif name in ('tri-independent', 'tri-cooperative', 'tri-antagonistic', 'custom'):
            z = cls.sim_poisson(w, p['lambda_z'], rng)
            y = cls.sim_cluster(z, p['mu_y'], p['sigma_y'], w, rng)
            if name == 'tri-cooperative':
                x = cls.sim_cluster(y, p['mu_x'], p['sigma_x'], w, rng)
            elif name == 'tri-antagonistic':
                x0 = cls.sim_cluster(z, p['mu_x0'], p['sigma_x0'], w, rng)
                x = cls.sim_distance_thinning(x0, y, p['r_x'], p['p_x'], rng)
            else:
                x = cls.sim_cluster(z, p['mu_x'], p['sigma_x'], w, rng)
                if name == 'custom' and p['shift']:
                    x = cls.sim_shift(x, p['shift'], w)
            groups = {'X': x, 'Y': y, 'Z': z}
        elif name == 'cox-squared':
            return cls.sim_cox_squared(w, p['lambda_z'], p['a'], rng)
        else:
            raise UnknownScenarioError(f"Escenario sin generador: '{name}'")

        return MultiTypePattern.from_groups(w, groups)

    @staticmethod
    def scenario_spec(scenario: str, params: Optional[Mapping[str, object]] = None,
                      window: Optional[Window] = None, seed: Optional[int] = None) -> ScenarioSpec:
        return ScenarioSpec(scenario=scenario, params=dict(params or {}), window=window, seed=seed)
