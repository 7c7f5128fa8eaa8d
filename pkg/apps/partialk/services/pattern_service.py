"""
Modelo de datos de patrones puntuales multitipo.

Define la ventana rectangular de observación, el patrón con etiquetas de tipo
y la estimación de intensidades por tipo.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from apps.partialk.exceptions import UsageError

logger = logging.getLogger(__name__)


class WindowError(UsageError):
    """Ventana mal definida o punto fuera de la ventana."""
    pass


class SimplicityError(UsageError):
    """Dos puntos (de cualquier tipo) comparten ubicación."""
    pass


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Window:
    """
    Caja alineada con los ejes en dimensión 1, 2 o 3.

    Atributos:
        lower: esquina inferior (longitud d).
        upper: esquina superior (longitud d).
    """
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float)).copy()
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float)).copy()
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise WindowError("Las esquinas de la ventana deben ser vectores de igual longitud.")
        if lower.size not in (1, 2, 3):
            raise WindowError(f"Dimensión no soportada: {lower.size} (se admite 1, 2 o 3).")
        if not np.all(np.isfinite(lower)) or not np.all(np.isfinite(upper)):
            raise WindowError("Las esquinas de la ventana deben ser finitas.")
        if np.any(upper <= lower):
            raise WindowError(f"Ventana degenerada: upper={upper.tolist()} no supera lower={lower.tolist()}.")
        object.__setattr__(self, 'lower', _frozen(lower))
        object.__setattr__(self, 'upper', _frozen(upper))

    @classmethod
    def box(cls, *bounds: float) -> 'Window':
        """
        Construye la ventana a partir de límites intercalados.

        Ejemplo:
            >>> Window.box(0, 300, 0, 300)  # [0,300]^2
        """
        if len(bounds) % 2:
            raise WindowError("Se esperan pares (inferior, superior) por eje.")
        values = np.asarray(bounds, dtype=float).reshape(-1, 2)
        return cls(values[:, 0], values[:, 1])

    @property
    def dimension(self) -> int:
        return int(self.lower.size)

    @property
    def side_lengths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def volume(self) -> float:
        return float(np.prod(self.side_lengths))

    def bounds(self) -> Tuple[float, ...]:
        """Límites intercalados (x0, x1, y0, y1, ...)."""
        return tuple(float(v) for pair in zip(self.lower, self.upper) for v in pair)

    def contains(self, coordinates: np.ndarray) -> np.ndarray:
        coordinates = np.asarray(coordinates, dtype=float).reshape(-1, self.dimension)
        return np.all((coordinates >= self.lower) & (coordinates <= self.upper), axis=1)

    def boundary_distance(self, coordinates: np.ndarray) -> np.ndarray:
        """Distancia de cada punto al borde de la caja."""
        coordinates = np.asarray(coordinates, dtype=float).reshape(-1, self.dimension)
        return np.minimum(coordinates - self.lower, self.upper - coordinates).min(axis=1)

    def scaled(self, factor: float) -> 'Window':
        """Ventana con los lados multiplicados por ``factor`` desde la esquina inferior."""
        return Window(self.lower, self.lower + factor * self.side_lengths)


@dataclass(frozen=True, eq=False)
class MultiTypePattern:
    """
    Patrón puntual multitipo sobre una ventana rectangular.

    El orden del registro de tipos fija el orden de filas y columnas de todas
    las matrices espectrales. Inmutable tras su construcción.
    """
    window: Window
    coordinates: np.ndarray
    type_index: np.ndarray
    labels: Tuple[str, ...]

    def __post_init__(self):
        d = self.window.dimension
        coords = np.asarray(self.coordinates, dtype=float).reshape(-1, d).copy()
        index = np.asarray(self.type_index, dtype=int).reshape(-1).copy()
        labels = tuple(str(label) for label in self.labels)

        if coords.shape[0] != index.shape[0]:
            raise WindowError("Coordenadas y tipos tienen longitudes distintas.")
        if len(set(labels)) != len(labels):
            raise UsageError(f"Registro de tipos con etiquetas repetidas: {labels}")
        if index.size and (index.min() < 0 or index.max() >= len(labels)):
            raise UsageError("Hay puntos con un tipo fuera del registro.")
        if not np.all(np.isfinite(coords)):
            raise WindowError("Las coordenadas deben ser finitas.")

        outside = ~self.window.contains(coords)
        if np.any(outside):
            first = int(np.flatnonzero(outside)[0])
            raise WindowError(
                f"{int(outside.sum())} punto(s) fuera de la ventana; primero: {coords[first].tolist()}"
            )

        if coords.shape[0] > 1:
            _, counts = np.unique(coords, axis=0, return_counts=True)
            if np.any(counts > 1):
                raise SimplicityError(
                    f"Violación de simplicidad conjunta: {int((counts > 1).sum())} ubicación(es) repetida(s)."
                )

        object.__setattr__(self, 'coordinates', _frozen(coords))
        object.__setattr__(self, 'type_index', _frozen(index))
        object.__setattr__(self, 'labels', labels)

    # -------------------------------------------------------------------------
    # Constructores
    # -------------------------------------------------------------------------

    @classmethod
    def from_points(
        cls,
        window: Window,
        coordinates: np.ndarray,
        types: Sequence[str],
        labels: Optional[Sequence[str]] = None,
    ) -> 'MultiTypePattern':
        """
        Construye el patrón desde coordenadas y etiquetas por punto.

        Si no se entrega registro, los tipos se registran por orden de aparición.
        """
        types = [str(t) for t in types]
        if labels is None:
            labels = list(dict.fromkeys(types))
        lookup = {label: i for i, label in enumerate(labels)}
        unknown = sorted(set(types) - set(lookup))
        if unknown:
            raise UsageError(f"Tipos ausentes del registro: {unknown}")
        index = np.array([lookup[t] for t in types], dtype=int)
        return cls(window, coordinates, index, tuple(labels))

    @classmethod
    def from_groups(cls, window: Window, groups: Mapping[str, np.ndarray]) -> 'MultiTypePattern':
        """Construye el patrón a partir de un arreglo de coordenadas por tipo (orden del mapeo)."""
        d = window.dimension
        labels = tuple(groups)
        arrays = [np.asarray(groups[label], dtype=float).reshape(-1, d) for label in labels]
        index = np.concatenate([np.full(len(a), i, dtype=int) for i, a in enumerate(arrays)]) if arrays else np.zeros(0, int)
        coords = np.concatenate(arrays, axis=0) if arrays else np.zeros((0, d))
        return cls(window, coords, index, labels)

    # -------------------------------------------------------------------------
    # Consultas
    # -------------------------------------------------------------------------

    @property
    def dimension(self) -> int:
        return self.window.dimension

    @property
    def n_types(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return int(self.coordinates.shape[0])

    def label_position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UsageError(f"El tipo '{label}' no está en el registro {list(self.labels)}") from None

    def points_of(self, label: str) -> np.ndarray:
        return self.coordinates[self.type_index == self.label_position(label)]

    def count(self, label: str) -> int:
        return int(np.count_nonzero(self.type_index == self.label_position(label)))

    def groups(self) -> Dict[str, np.ndarray]:
        return {label: self.points_of(label) for label in self.labels}

    def subset(self, labels: Iterable[str]) -> 'MultiTypePattern':
        """Patrón restringido a los tipos indicados, en ese orden."""
        return MultiTypePattern.from_groups(self.window, {label: self.points_of(label) for label in labels})

    def replace_type(self, label: str, coordinates: np.ndarray) -> 'MultiTypePattern':
        """Copia del patrón con los puntos de ``label`` sustituidos."""
        groups = self.groups()
        if label not in groups:
            raise UsageError(f"El tipo '{label}' no está en el registro {list(self.labels)}")
        groups[label] = coordinates
        return MultiTypePattern.from_groups(self.window, groups)

    def to_dict(self) -> dict:
        """Representación serializable a JSON (tareas Celery)."""
        return {
            'bounds': list(self.window.bounds()),
            'groups': {label: self.points_of(label).tolist() for label in self.labels},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> 'MultiTypePattern':
        window = Window.box(*data['bounds'])
        return cls.from_groups(window, {label: np.asarray(v, dtype=float) for label, v in data['groups'].items()})


@dataclass(frozen=True)
class IntensityEstimates:
    """Intensidad estimada por tipo (puntos por unidad de volumen)."""
    values: Dict[str, float] = field(default_factory=dict)

    def __getitem__(self, label: str) -> float:
        try:
            return self.values[label]
        except KeyError:
            raise UsageError(f"No hay intensidad estimada para el tipo '{label}'") from None

    def __contains__(self, label: str) -> bool:
        return label in self.values


class PatternService:
    """
    Servicio de operaciones sobre patrones.

    Responsabilidades:
    - Estimar intensidades por tipo.
    """

    @staticmethod
    def estimate_intensities(pattern: MultiTypePattern) -> IntensityEstimates:
        """
        Estima la intensidad de cada tipo como conteo / volumen de la ventana.

        Un conteo nulo produce intensidad cero; los consumidores posteriores
        rechazan intensidades nulas donde no tienen sentido.
        """
        volume = pattern.window.volume
        values = {label: pattern.count(label) / volume for label in pattern.labels}
        logger.debug(f"Intensidades estimadas: {values}")
        return IntensityEstimates(values)
