"""
Inicialización del paquete de utilidades.
"""

from .pattern_csv import PatternParseError, load_pattern_csv, parse_window, write_pattern_csv
from .curve_csv import write_curve_csv, write_spectral_field, write_table

__all__ = [
    'PatternParseError',
    'load_pattern_csv',
    'parse_window',
    'write_pattern_csv',
    'write_curve_csv',
    'write_spectral_field',
    'write_table',
]
