"""
Base común de las órdenes de gestión.

Traduce las excepciones del paquete a CommandError con el código de salida de
su familia (2 uso, 3 no soportado, 4 numérico) y reúne las opciones
compartidas por estimate, envelope y kmax_diagnostic.
"""

import logging
from typing import Any, Dict

from django.core.management.base import BaseCommand, CommandError

from apps.partialk.exceptions import PartialKError
from apps.partialk.forms import build_estimation_config
from apps.partialk.services.estimation_service import EstimationConfig
from apps.partialk.services.pattern_service import MultiTypePattern
from apps.partialk.utils.pattern_csv import load_pattern_csv, parse_window

logger = logging.getLogger(__name__)

# Banderas de la CLI que sobrescriben claves del archivo de configuración
CONFIG_FLAGS = (
    'n_tapers', 'kmax', 'spacing', 'radial_spacing', 'radial_max', 'bandwidth',
    'kernel', 'route', 'partial_route', 'r_start', 'r_stop', 'r_count', 'threads',
)


def comma_list(text: str):
    return [item.strip() for item in text.split(',') if item.strip()]


class PartialKCommand(BaseCommand):
    """Orden con traducción de errores; las subclases implementan ``run``."""

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except PartialKError as exc:
            logger.error(f"{self.__module__.rsplit('.', 1)[-1]}: {exc}")
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

    def run(self, **options):
        raise NotImplementedError

    # -------------------------------------------------------------------------
    # Opciones compartidas
    # -------------------------------------------------------------------------

    def add_pattern_arguments(self, parser):
        parser.add_argument('--pattern', required=True, help='CSV del patrón')
        parser.add_argument('--window', help="Ventana 'x0 x1 y0 y1' si el CSV no la declara")

    def add_config_arguments(self, parser):
        parser.add_argument('--config', help='Archivo clave = valor con la configuración del estimador')
        parser.add_argument('--n-tapers', '-M', dest='n_tapers', type=int)
        parser.add_argument('--kmax', help='Frecuencia máxima, escalar o por eje separada por comas')
        parser.add_argument('--spacing', help='Espaciado de la rejilla de frecuencias')
        parser.add_argument('--radial-spacing', type=float)
        parser.add_argument('--radial-max', type=float)
        parser.add_argument('--bandwidth', type=float)
        parser.add_argument('--kernel', choices=['box', 'triangular'])
        parser.add_argument('--route', choices=['direct', 'rotational'])
        parser.add_argument('--partial-route', choices=['schur', 'fast'])
        parser.add_argument('--r-start', type=float)
        parser.add_argument('--r-stop', type=float)
        parser.add_argument('--r-count', type=int)
        parser.add_argument('--threads', type=int)
        debias = parser.add_mutually_exclusive_group()
        debias.add_argument('--debias', dest='debias', action='store_true', default=None)
        debias.add_argument('--no-debias', dest='debias', action='store_false')

    def load_pattern(self, options: Dict[str, Any]) -> MultiTypePattern:
        window = parse_window(options['window']) if options.get('window') else None
        return load_pattern_csv(options['pattern'], window=window)

    def load_config(self, options: Dict[str, Any]) -> EstimationConfig:
        overrides = {key: options.get(key) for key in CONFIG_FLAGS + ('debias',)}
        return build_estimation_config(options.get('config'), overrides)
