"""
Estima C, K, L o pcf (parciales o no) sobre un patrón en CSV.

Uso:
    python manage.py estimate --pattern p.csv --targets X --covariates Y,Z --stat L --out l.csv
"""

import pandas as pd

from apps.partialk.exceptions import UsageError
from apps.partialk.management.base import PartialKCommand, comma_list
from apps.partialk.services.estimation_service import EstimationService, RunReport
from apps.partialk.services.inversion_service import STATISTICS
from apps.partialk.services.partial_service import PartialService, PartialSpec
from apps.partialk.services.pattern_service import PatternService
from apps.partialk.utils.curve_csv import write_curve_csv, write_spectral_field, write_table


class Command(PartialKCommand):
    help = 'Estima un estadístico resumen, opcionalmente parcial, por la vía espectral.'

    def add_arguments(self, parser):
        self.add_pattern_arguments(parser)
        parser.add_argument('--targets', help='X o X,Y (obligatorio salvo con --all-pairs)')
        parser.add_argument('--covariates', default='', help="Tipos parcializados, separados por comas ('' para ninguno)")
        parser.add_argument('--stat', choices=STATISTICS, default='L')
        parser.add_argument('--all-pairs', action='store_true',
                            help='Todos los pares parcializando por el resto; --out es un prefijo')
        parser.add_argument('--out', required=True)
        parser.add_argument('--report', help='CSV con el informe de ejecución')
        parser.add_argument('--dump-field', help='CSV con la matriz espectral parcial por nodo')
        self.add_config_arguments(parser)

    def run(self, **options):
        pattern = self.load_pattern(options)
        config = self.load_config(options)

        if options['all_pairs']:
            curves = EstimationService.estimate_all_pairs(pattern, config, options['stat'])
            for (x, y), curve in curves.items():
                path = write_curve_csv(curve, f"{options['out']}_{x}_{y}.csv")
                self.stdout.write(f"{x},{y} -> {path}")
            return

        targets = comma_list(options['targets'] or '')
        if not targets:
            raise UsageError('Indique --targets o use --all-pairs.')
        covariates = comma_list(options['covariates'])
        curve, report = EstimationService.estimate(pattern, targets, covariates, options['stat'], config)
        comments = report.as_comments()
        path = write_curve_csv(curve, options['out'], comments)

        if options['report']:
            frame = pd.DataFrame({'key': list(comments), 'value': list(comments.values())})
            write_table(frame, options['report'])
        if options['dump_field']:
            self.dump_field(pattern, targets, covariates, config, options['dump_field'])

        self.stdout.write(self.style.SUCCESS(
            f"{curve.kind} {','.join(curve.targets)} | {','.join(curve.covariates) or '-'} "
            f"(factor {report.info['debias_factor']:.6g}) -> {path}"
        ))

    def dump_field(self, pattern, targets, covariates, config, path):
        x, y = EstimationService.resolve_pair(targets)
        spec = PartialSpec(targets=(x, y), covariates=tuple(covariates), debias=config.debias)
        intensities = PatternService.estimate_intensities(pattern)
        field_ = EstimationService.spectral_field(pattern, spec.targets + spec.covariates, config, intensities, RunReport())
        write_spectral_field(PartialService.partial_matrix_schur(field_, spec), path)
