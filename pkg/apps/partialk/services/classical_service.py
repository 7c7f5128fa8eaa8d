"""
Estimador clásico de K con corrección de borde (minus sampling).
"""

import logging

import numpy as np
from scipy.spatial import cKDTree

from apps.partialk.exceptions import UsageError
from apps.partialk.services.inversion_service import RadiiGrid
from apps.partialk.services.pattern_service import MultiTypePattern

logger = logging.getLogger(__name__)


class ClassicalService:
    """
    Servicio de estimadores en el dominio espacial.

    Responsabilidades:
    - K cruzado con corrección de borde, base de comparación del estimador espectral.
    """

    @staticmethod
    def border_corrected_k(pattern: MultiTypePattern, x: str, y: str, radii: RadiiGrid) -> np.ndarray:
        """
        K_XY(r) = lambda_X^{-1} sum_{y elegible} #{x: 0 < |x - y| <= r} / #{y elegible}.

        Un punto y es elegible en r si su distancia al borde es al menos r.
        Los radios sin puntos elegibles quedan en NaN.

        Raises:
            UsageError: lambda_X nula (no hay puntos de tipo X).
        """
        points_x = pattern.points_of(x)
        points_y = pattern.points_of(y)
        lambda_x = len(points_x) / pattern.window.volume
        if lambda_x <= 0:
            raise UsageError(f"El tipo '{x}' no tiene puntos; K no está definido.")

        r = radii.radii
        values = np.full(r.shape, np.nan)
        if len(points_y) == 0:
            logger.warning(f"Sin puntos de referencia de tipo '{y}'; K queda indefinido")
            return values

        border = pattern.window.boundary_distance(points_y)
        rmax = float(r[-1])
        pairs = cKDTree(points_y).sparse_distance_matrix(cKDTree(points_x), rmax, output_type='ndarray')
        # Distancia cero: el propio punto cuando X = Y (simplicidad conjunta)
        pairs = pairs[pairs['v'] > 0]
        ref, dist = pairs['i'], pairs['v']

        for j, radius in enumerate(r):
            eligible = border >= radius
            n_eligible = int(eligible.sum())
            if n_eligible == 0:
                continue
            counted = int(np.count_nonzero((dist <= radius) & eligible[ref]))
            values[j] = counted / n_eligible / lambda_x

        missing = int(np.isnan(values).sum())
        if missing:
            logger.warning(f"K con corrección de borde indefinido en {missing} radio(s) sin puntos elegibles")
        return values
