"""
Salidas tabulares: curvas resumen, volcado de campos espectrales y tablas
de comparación.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Mapping, Optional

import numpy as np
import pandas as pd

from apps.partialk.exceptions import UsageError

if TYPE_CHECKING:
    from apps.partialk.services.inversion_service import SummaryCurve
    from apps.partialk.services.spectral_service import SpectralMatrixField

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.15g'


def _write(frame: pd.DataFrame, path, comments: Optional[Mapping[str, object]] = None) -> Path:
    path = Path(path)
    try:
        with path.open('w', encoding='utf-8', newline='') as handle:
            for key, value in (comments or {}).items():
                handle.write(f'# {key}: {value}\n')
            frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, na_rep='')
    except OSError as exc:
        raise UsageError(f"No se pudo escribir {path}: {exc}") from exc
    logger.debug(f"Tabla escrita en {path} ({len(frame)} filas)")
    return path


def curve_frame(curve: SummaryCurve) -> pd.DataFrame:
    """DataFrame ``r,value`` con ``lo,hi`` si la curva tiene bandas."""
    frame = pd.DataFrame({'r': curve.radii.radii, 'value': curve.values})
    if curve.lower is not None and curve.upper is not None:
        frame['lo'] = curve.lower
        frame['hi'] = curve.upper
    return frame


def write_curve_csv(curve: SummaryCurve, path, comments: Optional[Mapping[str, object]] = None) -> Path:
    """
    Escribe la curva; los comentarios iniciales describen estadístico, par y covariables.
    """
    header = {
        'statistic': curve.kind,
        'pair': ','.join(curve.targets),
        'covariates': ','.join(curve.covariates),
        'route': curve.route,
        'dimension': curve.dimension,
    }
    header.update(comments or {})
    return _write(curve_frame(curve), path, header)


def read_curve_csv(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, comment='#')
    except (OSError, pd.errors.ParserError) as exc:
        raise UsageError(f"No se pudo leer la curva {path}: {exc}") from exc


def spectral_field_frame(field: SpectralMatrixField) -> pd.DataFrame:
    """
    Una fila por nodo: ``k1[,k2[,k3]]`` y luego ``re_A_B, im_A_B`` en orden de registro.
    """
    nodes = field.grid.nodes().reshape(-1, field.grid.dimension)
    columns = {f'k{j + 1}': nodes[:, j] for j in range(field.grid.dimension)}
    values = field.values.reshape(-1, field.n_types, field.n_types)
    for i, a in enumerate(field.labels):
        for j, b in enumerate(field.labels):
            columns[f're_{a}_{b}'] = values[:, i, j].real
            columns[f'im_{a}_{b}'] = values[:, i, j].imag
    return pd.DataFrame(columns)


def write_spectral_field(field: SpectralMatrixField, path) -> Path:
    comments = {
        'tapers': field.n_tapers,
        'covariates': ','.join(field.covariates),
        'debias_factor': f'{field.debias_factor:.15g}',
    }
    return _write(spectral_field_frame(field), path, comments)


def write_table(frame: pd.DataFrame, path, comments: Optional[Mapping[str, object]] = None) -> Path:
    """Tabla genérica (oracle_check, experimentos)."""
    return _write(frame, path, comments)


def relative_error(estimate: np.ndarray, reference: np.ndarray) -> np.ndarray:
    reference = np.asarray(reference, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.abs(np.asarray(estimate, dtype=float) - reference) / np.abs(reference)
