"""
Experimentos Monte-Carlo: corrección de sesgo y paridad de estimadores.

Uso:
    python manage.py experiment debias --scenario tri-independent --nrep 20 --out debias.csv
    python manage.py experiment parity --model thomas --side 300 --nrep 20 --out parity.csv
"""

from apps.partialk.forms import read_params_file
from apps.partialk.management.base import PartialKCommand
from apps.partialk.services.experiment_service import PARITY_MODELS, ExperimentService
from apps.partialk.services.simulation_service import DEFAULT_SIDE, SCENARIOS
from apps.partialk.utils.curve_csv import write_table


class Command(PartialKCommand):
    help = 'Ejecuta la comparación de corrección de sesgo o la paridad de estimadores.'

    def add_arguments(self, parser):
        parser.add_argument('kind', choices=['debias', 'parity'])
        parser.add_argument('--scenario', choices=SCENARIOS, default='tri-independent')
        parser.add_argument('--model', choices=PARITY_MODELS, default='thomas')
        parser.add_argument('--params', help='Archivo clave = valor con parámetros del escenario')
        parser.add_argument('--side', type=float, default=DEFAULT_SIDE)
        parser.add_argument('--nrep', type=int, default=20)
        parser.add_argument('--seed', type=int)
        parser.add_argument('--out', required=True)
        self.add_config_arguments(parser)

    def run(self, **options):
        config = self.load_config(options)
        params = read_params_file(options['params']) if options['params'] else None
        if options['kind'] == 'debias':
            frame = ExperimentService.debias_comparison(
                options['scenario'], options['nrep'], config, params=params, seed=options['seed']
            )
            comments = {'experiment': 'debias', 'scenario': options['scenario']}
        else:
            frame = ExperimentService.estimator_parity(
                options['model'], options['side'], options['nrep'], config, params=params, seed=options['seed']
            )
            comments = {'experiment': 'parity', 'model': options['model'], 'side': options['side']}
        comments.update({'nrep': options['nrep'], 'seed': '' if options['seed'] is None else options['seed']})
        path = write_table(frame, options['out'], comments)
        self.stdout.write(self.style.SUCCESS(f"{options['kind']}: {len(frame)} filas -> {path}"))
