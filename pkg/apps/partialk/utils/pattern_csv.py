"""
Lectura y escritura de patrones multitipo en CSV.

Formato:
    # window: x0 x1 y0 y1
    # types: X Y Z                   (registro de tipos, opcional)
    # scenario: tri-independent        (comentarios opcionales clave: valor)
    x,y,type
    12.5,40.25,X
    ...

La cabecera de columnas es ``x,type`` (d=1), ``x,y,type`` (d=2) o
``x,y,z,type`` (d=3).
"""

import io
import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from apps.partialk.exceptions import UsageError
from apps.partialk.services.pattern_service import MultiTypePattern, Window

logger = logging.getLogger(__name__)

COORDINATE_COLUMNS = ('x', 'y', 'z')
FLOAT_FORMAT = '%.15g'


class PatternParseError(UsageError):
    """
    Error de formato en un archivo de patrón.

    Atributos:
        line: número de línea (1-based) del archivo, si aplica.
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"Línea {line}: {message}"
        super().__init__(message)


class PatternCSVReader:
    """
    Parser de archivos CSV de patrones.

    Separa los comentarios iniciales (``# clave: valor``) del cuerpo tabular,
    valida cabecera y coordenadas fila por fila, y construye el patrón.
    """

    def __init__(self, path, window: Optional[Window] = None, labels: Optional[Sequence[str]] = None):
        """
        Args:
            path: ruta al archivo.
            window: ventana explícita (prevalece sobre el comentario ``# window:``).
            labels: registro de tipos; por defecto, orden de aparición.
        """
        self.path = Path(path)
        self.window = window
        self.labels = labels
        self.header: Dict[str, str] = {}
        self.comment_lines = 0

    def _split(self) -> str:
        try:
            text = self.path.read_text(encoding='utf-8')
        except OSError as exc:
            raise PatternParseError(f"No se pudo leer {self.path}: {exc}") from exc

        lines = text.splitlines()
        for line in lines:
            stripped = line.strip()
            if stripped and not stripped.startswith('#'):
                break
            self.comment_lines += 1
            key, sep, value = stripped.lstrip('#').partition(':')
            if sep:
                self.header[key.strip().lower()] = value.strip()
        return '\n'.join(lines[self.comment_lines:])

    def _ragged_line(self, body: str) -> Optional[int]:
        """Línea del archivo de la primera fila con más campos que la cabecera."""
        rows = body.splitlines()
        width = rows[0].count(',') + 1
        for offset, row in enumerate(rows[1:], start=2):
            if row.strip() and row.count(',') + 1 > width:
                return self.comment_lines + offset
        return None

    def _declared_window(self) -> Window:
        if self.window is not None:
            return self.window
        declared = self.header.get('window')
        if declared is None:
            raise PatternParseError(
                f"{self.path} no declara '# window:'; indique la ventana con --window."
            )
        try:
            bounds = [float(v) for v in declared.replace(',', ' ').split()]
        except ValueError:
            raise PatternParseError(f"Comentario de ventana inválido: '{declared}'", line=1) from None
        return Window.box(*bounds)

    def parse(self) -> MultiTypePattern:
        body = self._split()
        window = self._declared_window()
        if self.labels is None and self.header.get('types'):
            self.labels = self.header['types'].split()
        d = window.dimension

        if not body.strip():
            logger.info(f"{self.path}: sin filas de datos")
            return MultiTypePattern.from_points(window, np.zeros((0, d)), [], labels=self.labels or [])

        ragged = self._ragged_line(body)
        if ragged is not None:
            raise PatternParseError("Fila con más campos que la cabecera", line=ragged)
        try:
            frame = pd.read_csv(
                io.StringIO(body), dtype=str, skipinitialspace=True,
                keep_default_na=False, skip_blank_lines=False,
            )
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
            raise PatternParseError(f"CSV mal formado: {exc}") from exc

        frame.columns = [str(c).strip().lower() for c in frame.columns]
        expected = list(COORDINATE_COLUMNS[:d]) + ['type']
        header_line = self.comment_lines + 1
        if list(frame.columns) != expected:
            raise PatternParseError(
                f"Cabecera {list(frame.columns)} no coincide con {expected} para una ventana de dimensión {d}",
                line=header_line,
            )

        # las filas en blanco se descartan conservando su posición en el archivo
        blank = (frame.isna() | (frame == '')).all(axis=1).to_numpy()
        positions = np.flatnonzero(~blank)
        frame = frame.iloc[positions]

        coords = frame[expected[:-1]].apply(pd.to_numeric, errors='coerce').to_numpy(dtype=float)
        bad = ~np.all(np.isfinite(coords), axis=1)
        types = frame['type'].fillna('').str.strip()
        bad |= (types == '').to_numpy()
        if np.any(bad):
            row = int(np.flatnonzero(bad)[0])
            raise PatternParseError(
                f"Fila inválida {frame.iloc[row].tolist()}: coordenadas no finitas o tipo vacío",
                line=header_line + int(positions[row]) + 1,
            )

        pattern = MultiTypePattern.from_points(window, coords, types.tolist(), labels=self.labels)
        logger.info(f"{self.path}: {len(pattern)} puntos, tipos {list(pattern.labels)}")
        return pattern


def load_pattern_csv(path, window: Optional[Window] = None, labels: Optional[Sequence[str]] = None) -> MultiTypePattern:
    """Función de conveniencia para cargar un patrón."""
    return PatternCSVReader(path, window=window, labels=labels).parse()


def read_pattern_header(path) -> Dict[str, str]:
    """Comentarios ``# clave: valor`` iniciales del archivo."""
    reader = PatternCSVReader(path)
    reader._split()
    return reader.header


def write_pattern_csv(pattern: MultiTypePattern, path, extra_header: Optional[Mapping[str, str]] = None) -> Path:
    """
    Escribe el patrón con la ventana como comentario y 15 cifras significativas.

    Las entradas de ``extra_header`` se escriben como ``# clave: valor``.
    """
    path = Path(path)
    d = pattern.dimension
    lines = ['# window: ' + ' '.join(FLOAT_FORMAT % v for v in pattern.window.bounds())]
    lines.append('# types: ' + ' '.join(pattern.labels))
    for key, value in (extra_header or {}).items():
        lines.append(f'# {key}: {value}')

    frame = pd.DataFrame(pattern.coordinates, columns=list(COORDINATE_COLUMNS[:d]))
    frame['type'] = [pattern.labels[i] for i in pattern.type_index]
    try:
        with path.open('w', encoding='utf-8', newline='') as handle:
            handle.write('\n'.join(lines) + '\n')
            frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT)
    except OSError as exc:
        raise UsageError(f"No se pudo escribir {path}: {exc}") from exc
    logger.debug(f"Patrón escrito en {path} ({len(pattern)} puntos)")
    return path


def parse_window(text: str) -> Window:
    """Ventana desde 'x0 x1 y0 y1' o 'x0,x1,y0,y1'."""
    try:
        return Window.box(*[float(v) for v in text.replace(',', ' ').split()])
    except ValueError:
        raise UsageError(f"Ventana inválida '{text}'") from None
