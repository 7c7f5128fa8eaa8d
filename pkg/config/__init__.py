"""
Paquete de configuración del proyecto partialk.

Carga la aplicación Celery junto con Django para que ``shared_task`` registre
las réplicas de las envolventes en ella.
"""
from .celery import app as celery_app

__all__ = ('celery_app',)
