from concurrent.futures import ThreadPoolExecutor

from fidgap.checks import model_checks, raise_on_failure
from fidgap.config import get_parameter, with_parameter
from fidgap.fidelity import floor_value, half_life
from fidgap.model import build_model
from fidgap.results import ResultEnvelope, dumps

from ._base import FidgapCommand


class Command(FidgapCommand):
    help = 'Re-run a model over values of one scalar config parameter'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--param', required=True,
                            help='Dotted path of the scalar, e.g. dynamics.rate_family.g')
        parser.add_argument('--values', nargs='*', type=float, default=[],
                            help='Values to substitute, in output order')
        parser.add_argument('--jobs', type=int, default=1, help='Rows evaluated concurrently')
        parser.add_argument('--out', help='Write the JSON rows here')

    def run(self, tolerances, options):
        config = self.load(options)
        path = options['param']
        get_parameter(config.to_dict(), path)
        seed = options['seed']

        def evaluate(value):
            variant = with_parameter(config, path, value)
            model = build_model(variant, tolerances)
            report = model.spectral_report()
            rate, source = report.decay_rate()
            row = {
                'value': value,
                'lambda': report.gap_lambda,
                'gamma': report.gap_gamma,
                'rate_source': source,
                'floor': floor_value(model.psi, model.ref),
                'half_life': half_life(model, model.time_grid()),
            }
            checks = model_checks(model, tolerances, seed)
            envelope = ResultEnvelope(variant, seed, checks, report=report,
                                      extra={'sweep': row},
                                      warnings=model.warnings + report.warnings)
            return row, envelope

        jobs = max(1, options['jobs'])
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(evaluate, options['values']))

        self.stdout.write(f'{"value":>12}  {"lambda":>14}  {"rate_source":>12}  '
                          f'{"floor":>10}  {"half_life":>12}')
        for row, _ in results:
            lam = '-' if row['lambda'] is None else f"{row['lambda']:.8g}"
            hl = '-' if row['half_life'] is None else f"{row['half_life']:.6g}"
            self.stdout.write(f"{row['value']:>12.6g}  {lam:>14}  {row['rate_source']:>12}  "
                              f"{row['floor']:>10.6g}  {hl:>12}")
        if options.get('out'):
            payload = {'param': path, 'rows': [envelope.to_dict() for _, envelope in results]}
            self.emit(dumps(payload), options['out'])
        raise_on_failure([c for _, envelope in results for c in envelope.checks])
