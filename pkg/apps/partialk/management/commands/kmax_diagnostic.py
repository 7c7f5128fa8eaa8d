"""
Compara el L estimado con kmax y 2 kmax para decidir si la rejilla es suficiente.
"""

import pandas as pd

from apps.partialk.management.base import PartialKCommand, comma_list
from apps.partialk.services.estimation_service import EstimationService
from apps.partialk.utils.curve_csv import write_table


class Command(PartialKCommand):
    help = 'Diagnóstico de convergencia en kmax: max |L(2 kmax) - L(kmax)| frente a un umbral.'

    def add_arguments(self, parser):
        self.add_pattern_arguments(parser)
        parser.add_argument('--targets', required=True)
        parser.add_argument('--covariates', default='')
        parser.add_argument('--threshold', type=float, help='Por defecto PARTIALK_KMAX_THRESHOLD')
        parser.add_argument('--out', help='CSV con r, L(kmax) y L(2 kmax)')
        self.add_config_arguments(parser)

    def run(self, **options):
        pattern = self.load_pattern(options)
        config = self.load_config(options)
        result = EstimationService.kmax_diagnostic(
            pattern, comma_list(options['targets']), comma_list(options['covariates']), config, options['threshold']
        )
        if options['out']:
            frame = pd.DataFrame({'r': result['radii'], 'l_kmax': result['l_base'], 'l_2kmax': result['l_doubled']})
            write_table(frame, options['out'], {
                'kmax': ' '.join(f'{v:g}' for v in result['kmax']),
                'max_difference': f"{result['max_difference']:.6g}",
                'threshold': result['threshold'],
                'converged': result['converged'],
            })
        message = (
            f"kmax={result['kmax']}: max |dL| = {result['max_difference']:.4g} "
            f"(umbral {result['threshold']:g})"
        )
        if result['converged']:
            self.stdout.write(self.style.SUCCESS(f"{message}: converge"))
        else:
            self.stdout.write(self.style.WARNING(f"{message}: no converge, aumente kmax"))
