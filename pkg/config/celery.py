"""
Configuración de Celery.

Las réplicas Monte-Carlo (envolventes, experimentos) se reparten en tareas;
sin broker configurado se ejecutan en modo eager dentro del mismo proceso.
"""
from __future__ import absolute_import, unicode_literals
import os
from celery import Celery

# Establecer el módulo de configuración de Django para Celery
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')

app = Celery('partialk')

# Usar la configuración de Django con namespace 'CELERY'
app.config_from_object('django.conf:settings', namespace='CELERY')

# Auto-descubrir tareas en todas las apps instaladas
app.autodiscover_tasks()
