from fidgap.checks import config_checks, model_checks, raise_on_failure
from fidgap.model import build_model
from fidgap.results import ResultEnvelope

from ._base import FidgapCommand


class Command(FidgapCommand):
    help = 'Check the structural invariants of a model config and print the residual table'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--out', help='Also write the JSON result envelope here')

    def run(self, tolerances, options):
        config = self.load(options)
        checks = config_checks(config, tolerances)
        raise_on_failure(checks)
        model = build_model(config, tolerances)
        checks += model_checks(model, tolerances, options['seed'])

        width = max(len(c.name) for c in checks)
        for check in checks:
            status = 'ok' if check.passed else 'FAIL'
            self.stdout.write(f'{check.name:<{width}}  {check.residual:.3e}  '
                              f'(tol {check.tolerance:.1e})  {status}')
        for warning in model.warnings:
            self.stderr.write(f'warning: {warning}')

        if options.get('out'):
            envelope = ResultEnvelope(config, options['seed'], checks, warnings=model.warnings)
            self.emit(envelope.to_json(), options['out'])
        raise_on_failure(checks)
