"""
Formulario de validación de la configuración del estimador.

La configuración llega de un archivo plano ``clave = valor`` (``--config``) y
de las banderas de la línea de comandos, que prevalecen. Los valores del
archivo se convierten con ``environ.Env.parse_value`` y el formulario los
valida antes de construir ``EstimationConfig``.
"""

from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import environ
from django import forms
from django.core.exceptions import ValidationError

from apps.partialk.exceptions import ConfigurationError
from apps.partialk.services.estimation_service import PARTIAL_ROUTES, EstimationConfig
from apps.partialk.services.inversion_service import KERNELS, ROUTES

# Conversión de cada clave del archivo de configuración
CONFIG_CASTS: Dict[str, Any] = {
    'n_tapers': int,
    'kmax': [float],
    'spacing': [float],
    'radial_spacing': float,
    'radial_max': float,
    'bandwidth': float,
    'kernel': str,
    'route': str,
    'partial_route': str,
    'debias': bool,
    'r_start': float,
    'r_stop': float,
    'r_count': int,
    'threads': int,
}


def read_config_file(path, casts: Mapping[str, Any] = CONFIG_CASTS) -> Dict[str, Any]:
    """
    Lee un archivo ``clave = valor``; ``#`` inicia un comentario.

    Raises:
        ConfigurationError: archivo ilegible, línea mal formada o clave desconocida.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding='utf-8').splitlines()
    except OSError as exc:
        raise ConfigurationError(f"No se pudo leer la configuración {path}: {exc}") from exc

    values: Dict[str, Any] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key = key.strip().lower().replace('-', '_')
        if not sep or not key:
            raise ConfigurationError(f"{path}, línea {number}: se espera 'clave = valor'.")
        if key not in casts:
            raise ConfigurationError(f"{path}, línea {number}: clave desconocida '{key}'; admitidas: {sorted(casts)}")
        try:
            values[key] = environ.Env.parse_value(value.strip(), casts[key])
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"{path}, línea {number}: valor inválido para {key}: {exc}") from exc
    return values


def form_errors(form: forms.Form) -> str:
    """Errores del formulario en una sola línea."""
    parts = []
    for name, errors in form.errors.items():
        label = 'config' if name == '__all__' else name
        parts.append(f"{label}: {' '.join(errors)}")
    return '; '.join(parts)


class FloatListField(forms.Field):
    """Vector de floats desde '0.5', '0.5,0.25' o una secuencia."""

    def to_python(self, value):
        if value in self.empty_values:
            return None
        if isinstance(value, str):
            items = [item for item in value.replace(',', ' ').split()]
        else:
            items = list(value) if isinstance(value, (list, tuple)) else [value]
        try:
            return tuple(float(item) for item in items)
        except (TypeError, ValueError):
            raise ValidationError('Se espera una lista de números separados por comas.', code='invalid')


class EstimationConfigForm(forms.Form):
    """
    Campos de ``EstimationConfig``.

    Los valores ausentes toman el valor por defecto de la dataclass.
    """

    n_tapers = forms.IntegerField(min_value=1, label='Número de tapers M')
    kmax = FloatListField(label='Frecuencia máxima por eje')
    spacing = FloatListField(required=False, label='Espaciado de la rejilla')
    radial_spacing = forms.FloatField(required=False, label='Espaciado radial')
    radial_max = forms.FloatField(required=False, label='Radio espectral máximo')
    bandwidth = forms.FloatField(required=False, label='Ancho de banda radial')
    kernel = forms.ChoiceField(choices=[(k, k) for k in KERNELS])
    route = forms.ChoiceField(choices=[(r, r) for r in ROUTES])
    partial_route = forms.ChoiceField(choices=[(r, r) for r in PARTIAL_ROUTES])
    debias = forms.BooleanField(required=False)
    r_start = forms.FloatField(min_value=0)
    r_stop = forms.FloatField(min_value=0)
    r_count = forms.IntegerField(min_value=1)
    threads = forms.IntegerField(required=False, min_value=1)

    def __init__(self, data: Optional[Mapping[str, Any]] = None, *args, **kwargs):
        merged = asdict(EstimationConfig())
        merged.update({key: value for key, value in (data or {}).items() if value is not None})
        super().__init__(merged, *args, **kwargs)

    def clean_kmax(self):
        kmax = self.cleaned_data.get('kmax')
        if not kmax or any(v <= 0 for v in kmax):
            raise ValidationError('kmax debe ser positivo en cada eje.')
        return kmax

    def clean_spacing(self):
        spacing = self.cleaned_data.get('spacing')
        if spacing is not None and any(v <= 0 for v in spacing):
            raise ValidationError('El espaciado debe ser positivo.')
        return spacing

    def clean_bandwidth(self):
        bandwidth = self.cleaned_data.get('bandwidth')
        if bandwidth is not None and bandwidth <= 0:
            raise ValidationError('El ancho de banda debe ser positivo.')
        return bandwidth

    def clean(self):
        cleaned_data = super().clean()
        r_start, r_stop, r_count = (cleaned_data.get(key) for key in ('r_start', 'r_stop', 'r_count'))
        if None not in (r_start, r_stop, r_count) and r_count > 1 and r_stop <= r_start:
            raise ValidationError({'r_stop': 'r_stop debe ser mayor que r_start.'})

        kmax, spacing = cleaned_data.get('kmax'), cleaned_data.get('spacing')
        if kmax and spacing and len(kmax) != len(spacing) and 1 not in (len(kmax), len(spacing)):
            raise ValidationError({'spacing': 'kmax y spacing deben tener la misma longitud.'})

        for key in ('radial_spacing', 'radial_max'):
            value = cleaned_data.get(key)
            if value is not None and value <= 0:
                self.add_error(key, f'{key} debe ser positivo.')
        return cleaned_data

    def to_config(self) -> EstimationConfig:
        """
        Raises:
            ConfigurationError: el formulario no es válido.
        """
        if not self.is_valid():
            raise ConfigurationError(f"Configuración inválida: {form_errors(self)}")
        return EstimationConfig(**self.cleaned_data)


def build_estimation_config(path=None, overrides: Optional[Mapping[str, Any]] = None) -> EstimationConfig:
    """Archivo de configuración (opcional) con las banderas de la CLI encima."""
    data = read_config_file(path) if path else {}
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})
    return EstimationConfigForm(data).to_config()
