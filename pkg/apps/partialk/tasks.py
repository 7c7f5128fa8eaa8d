"""
Tareas Celery para las réplicas Monte-Carlo de las envolventes.

Cada tarea recibe un lote de semillas y devuelve una curva por semilla. Los
argumentos son serializables a JSON para poder ejecutarse en un worker
remoto; por defecto CELERY_TASK_ALWAYS_EAGER las ejecuta en el proceso.
"""

import logging
import time
from typing import Any, Dict, List

from celery import shared_task

from apps.partialk.services.envelope_service import EnvelopeService
from apps.partialk.services.estimation_service import EstimationConfig
from apps.partialk.services.pattern_service import MultiTypePattern

logger = logging.getLogger(__name__)


# =============================================================================
# TASKS
# =============================================================================

@shared_task(bind=True, name='apps.partialk.tasks.null_curves_task')
def null_curves_task(
    self,
    pattern_data: Dict[str, Any],
    targets: List[str],
    stat: str,
    config_data: Dict[str, Any],
    null: str,
    seeds: List[int],
) -> List[List[float]]:
    """
    Calcula el estadístico sobre ``len(seeds)`` réplicas de la hipótesis nula.

    Returns:
        Lista de curvas (listas de floats), en el orden de ``seeds``.
    """
    started = time.perf_counter()
    pattern = MultiTypePattern.from_dict(pattern_data)
    config = EstimationConfig.from_dict(config_data)
    x, y = targets
    curves = EnvelopeService.null_curves(pattern, (x, y), stat, config, null, seeds)
    logger.debug(f"Lote de {len(seeds)} réplicas ({null}) en {time.perf_counter() - started:.2f}s")
    return curves.tolist()
