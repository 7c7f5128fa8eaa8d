"""
Formulario de la orden simulate: escenario, semilla, ventana y parámetros.
"""

from typing import Any, Dict, Optional

from django import forms
from django.core.exceptions import ValidationError

from apps.partialk.exceptions import ConfigurationError, PartialKError
from apps.partialk.forms.estimation_form import form_errors, read_config_file
from apps.partialk.services.simulation_service import SCENARIO_DEFAULTS, SCENARIOS, ScenarioSpec, SimulationService
from apps.partialk.utils.pattern_csv import parse_window

# Todos los parámetros son reales salvo el vector de desplazamiento
SCENARIO_CASTS: Dict[str, Any] = {
    key: ([float] if key == 'shift' else float)
    for defaults in SCENARIO_DEFAULTS.values()
    for key in defaults
}


class ScenarioForm(forms.Form):
    """Valida la petición de simulación y construye el ``ScenarioSpec``."""

    scenario = forms.ChoiceField(choices=[(s, s) for s in SCENARIOS])
    seed = forms.IntegerField(required=False, min_value=0)
    window = forms.CharField(required=False)

    def __init__(self, data=None, params: Optional[Dict[str, Any]] = None, *args, **kwargs):
        super().__init__(data, *args, **kwargs)
        self.params = dict(params or {})

    def clean_window(self):
        text = self.cleaned_data.get('window')
        if not text:
            return None
        try:
            return parse_window(text)
        except PartialKError as exc:
            raise ValidationError(str(exc))

    def clean(self):
        cleaned_data = super().clean()
        scenario = cleaned_data.get('scenario')
        if scenario:
            unknown = sorted(set(self.params) - set(SCENARIO_DEFAULTS[scenario]))
            if unknown:
                raise ValidationError(
                    f"Parámetros no reconocidos para '{scenario}': {unknown}; "
                    f"admitidos: {sorted(SCENARIO_DEFAULTS[scenario])}"
                )
        return cleaned_data

    def to_spec(self) -> ScenarioSpec:
        """
        Raises:
            ConfigurationError: el formulario no es válido.
        """
        if not self.is_valid():
            raise ConfigurationError(f"Simulación inválida: {form_errors(self)}")
        data = self.cleaned_data
        return SimulationService.scenario_spec(data['scenario'], self.params, window=data['window'], seed=data['seed'])


def read_params_file(path) -> Dict[str, Any]:
    """Parámetros del escenario desde un archivo ``clave = valor``."""
    return read_config_file(path, SCENARIO_CASTS)
