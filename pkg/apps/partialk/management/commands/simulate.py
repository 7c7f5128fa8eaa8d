"""
Simula un escenario y escribe el patrón en CSV.

Uso:
    python manage.py simulate --scenario tri-independent --seed 42 --out p.csv
"""

from apps.partialk.forms import ScenarioForm, read_params_file
from apps.partialk.management.base import PartialKCommand
from apps.partialk.services.simulation_service import SCENARIOS, SimulationService, UnknownScenarioError
from apps.partialk.utils.pattern_csv import write_pattern_csv


class Command(PartialKCommand):
    help = 'Simula un patrón multitipo de uno de los escenarios registrados.'

    def add_arguments(self, parser):
        # Sin choices: el error de escenario desconocido lista las opciones y sale con 2
        parser.add_argument('--scenario', required=True, help=f"Uno de: {', '.join(SCENARIOS)}")
        parser.add_argument('--params', help='Archivo clave = valor con parámetros del escenario')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--window', help="Ventana 'x0 x1 y0 y1' (por defecto [0, 300]^2)")
        parser.add_argument('--out', required=True, help='CSV de salida')

    def run(self, **options):
        params = read_params_file(options['params']) if options['params'] else {}
        if options['scenario'] not in SCENARIOS:
            raise UnknownScenarioError(
                f"Escenario desconocido '{options['scenario']}'. Opciones válidas: {', '.join(SCENARIOS)}"
            )
        form = ScenarioForm(
            {'scenario': options['scenario'], 'seed': options['seed'], 'window': options['window'] or ''},
            params=params,
        )
        spec = form.to_spec()
        pattern = SimulationService.sim_scenario(spec)
        path = write_pattern_csv(pattern, options['out'], spec.header())
        counts = ', '.join(f'{label}={pattern.count(label)}' for label in pattern.labels)
        self.stdout.write(self.style.SUCCESS(f"{spec.scenario}: {len(pattern)} puntos ({counts}) -> {path}"))
