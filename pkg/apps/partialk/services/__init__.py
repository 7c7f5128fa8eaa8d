"""
Inicialización del paquete de servicios.
"""

from .pattern_service import MultiTypePattern, PatternService, Window
from .taper_service import TaperService
from .spectral_service import SpectralService
from .partial_service import PartialService, PartialSpec
from .inversion_service import InversionService, RadiiGrid, SummaryCurve
from .classical_service import ClassicalService
from .simulation_service import ScenarioSpec, SimulationService
from .oracle_service import ClusterModelSpec, OracleService
from .estimation_service import EstimationConfig, EstimationService
from .envelope_service import EnvelopeConfig, EnvelopeService, UnsupportedNullError
from .experiment_service import ExperimentService

__all__ = [
    'MultiTypePattern',
    'PatternService',
    'Window',
    'TaperService',
    'SpectralService',
    'PartialService',
    'PartialSpec',
    'InversionService',
    'RadiiGrid',
    'SummaryCurve',
    'ClassicalService',
    'ScenarioSpec',
    'SimulationService',
    'ClusterModelSpec',
    'OracleService',
    'EstimationConfig',
    'EstimationService',
    'EnvelopeConfig',
    'EnvelopeService',
    'UnsupportedNullError',
    'ExperimentService',
]
