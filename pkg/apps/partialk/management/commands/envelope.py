"""
Curva observada con envolvente global MAD bajo una hipótesis nula.

Uso:
    python manage.py envelope --pattern p.csv --targets X --stat L --null poisson --nsim 199 --out env.csv
"""

from apps.partialk.management.base import PartialKCommand, comma_list
from apps.partialk.services.envelope_service import EnvelopeConfig, EnvelopeService
from apps.partialk.services.inversion_service import STATISTICS
from apps.partialk.utils.curve_csv import write_curve_csv

NULL_ALIASES = {
    'poisson': 'poisson-marginal',
    'poisson-marginal': 'poisson-marginal',
    'shift': 'random-shift-pair',
    'random-shift-pair': 'random-shift-pair',
}


class Command(PartialKCommand):
    help = 'Envolvente Monte-Carlo MAD para estadísticos no parciales.'

    def add_arguments(self, parser):
        self.add_pattern_arguments(parser)
        parser.add_argument('--targets', required=True, help='X o X,Y')
        parser.add_argument('--covariates', default='', help='Solo se admite vacío')
        parser.add_argument('--stat', choices=STATISTICS, default='L')
        parser.add_argument('--null', choices=sorted(NULL_ALIASES), default='poisson')
        parser.add_argument('--nsim', type=int, default=199)
        parser.add_argument('--alpha', type=float, default=0.05)
        parser.add_argument('--seed', type=int)
        parser.add_argument('--out', required=True)
        self.add_config_arguments(parser)

    def run(self, **options):
        pattern = self.load_pattern(options)
        config = self.load_config(options)
        envelope = EnvelopeConfig(
            n_sim=options['nsim'], alpha=options['alpha'], null=NULL_ALIASES[options['null']], seed=options['seed']
        )
        curve = EnvelopeService.poisson_null_envelope(
            pattern, comma_list(options['targets']), options['stat'], config, envelope,
            covariates=comma_list(options['covariates']),
        )
        coverage = EnvelopeService.coverage(curve)
        path = write_curve_csv(curve, options['out'], {
            'null': envelope.null,
            'nsim': envelope.n_sim,
            'alpha': envelope.alpha,
            'seed': '' if envelope.seed is None else envelope.seed,
            'inside': coverage['inside'],
        })
        status = 'dentro de la banda' if coverage['inside'] else f"fuera en {len(coverage['radii_outside'])} radio(s)"
        self.stdout.write(self.style.SUCCESS(f"{curve.kind} {','.join(curve.targets)}: {status} -> {path}"))
