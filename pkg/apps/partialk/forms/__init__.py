"""
Inicialización del paquete de formularios.
"""

from .estimation_form import EstimationConfigForm, build_estimation_config, read_config_file
from .scenario_form import ScenarioForm, read_params_file

__all__ = [
    'EstimationConfigForm',
    'build_estimation_config',
    'read_config_file',
    'ScenarioForm',
    'read_params_file',
]
