from fidgap.checks import model_checks, raise_on_failure
from fidgap.model import build_model
from fidgap.results import ResultEnvelope
from fidgap.spectral import decay_rate_oracle

from ._base import FidgapCommand


class Command(FidgapCommand):
    help = 'Spectral gap report (lambda, gamma, kernel, detailed-balance residuals) as JSON'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--out', help='Write the JSON envelope here instead of stdout')

    def run(self, tolerances, options):
        config = self.load(options)
        model = build_model(config, tolerances)
        report = model.spectral_report()
        if report.gap_lambda is not None and report.gap_lambda > tolerances.kernel:
            report.decay_fit = decay_rate_oracle(model.spec.generator, model.ref,
                                                 seed=options['seed'])
        checks = model_checks(model, tolerances, options['seed'])
        envelope = ResultEnvelope(config, options['seed'], checks, report=report,
                                  warnings=model.warnings + report.warnings)
        self.emit(envelope.to_json(), options.get('out'))
        raise_on_failure(checks)
