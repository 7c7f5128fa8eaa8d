from django.apps import AppConfig


class PartialkConfig(AppConfig):
    name = 'apps.partialk'
    verbose_name = 'Función K parcial'
