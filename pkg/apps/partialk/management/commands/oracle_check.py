"""
Compara la inversión del estimador con la cuadratura de referencia.

Uso:
    python manage.py oracle_check --model thomas --r 1:20:20 --out oracle.csv
"""

from dataclasses import replace

import numpy as np

from apps.partialk.forms import read_params_file
from apps.partialk.management.base import PartialKCommand, comma_list
from apps.partialk.services.experiment_service import ORACLE_MODELS, ExperimentService
from apps.partialk.services.inversion_service import STATISTICS, RadiiGrid
from apps.partialk.services.simulation_service import DEFAULT_SIDE
from apps.partialk.utils.curve_csv import write_table


class Command(PartialKCommand):
    help = 'Referencia analítica frente al pipeline de inversión sobre el espectro exacto.'

    def add_arguments(self, parser):
        parser.add_argument('--model', choices=sorted(ORACLE_MODELS), default='thomas')
        parser.add_argument('--params', help='Archivo clave = valor con parámetros del modelo')
        parser.add_argument('--r', dest='radii', default='1:20:20', help='Radios inicio:fin:cantidad')
        parser.add_argument('--stat', choices=STATISTICS, default='K')
        parser.add_argument('--pair', default='X', help='X o X,Y')
        parser.add_argument('--covariates', default='')
        parser.add_argument('--side', type=float, default=DEFAULT_SIDE, help='Lado de la ventana que fija la rejilla')
        parser.add_argument('--out', required=True)
        self.add_config_arguments(parser)

    def run(self, **options):
        radii = RadiiGrid.parse(options['radii'])
        config = self.load_config(options)
        config = replace(config, r_start=float(radii.radii[0]), r_stop=float(radii.radii[-1]), r_count=radii.count)
        pair = comma_list(options['pair'])
        x, y = (pair[0], pair[0]) if len(pair) == 1 else tuple(pair)
        params = read_params_file(options['params']) if options['params'] else None

        frame = ExperimentService.oracle_check(
            options['model'], options['stat'], (x, y), comma_list(options['covariates']),
            config, params=params, side=options['side'],
        )
        path = write_table(frame, options['out'], {
            'model': options['model'],
            'statistic': options['stat'],
            'pair': f'{x},{y}',
            'covariates': options['covariates'],
            'route': config.route,
        })
        worst = float(np.nanmax(frame['rel_error'].to_numpy())) if frame['rel_error'].notna().any() else float('nan')
        self.stdout.write(self.style.SUCCESS(f"Error relativo máximo {worst:.3g} -> {path}"))
