from fidgap.checks import curve_checks, model_checks, raise_on_failure
from fidgap.fidelity import run_curve
from fidgap.model import build_model
from fidgap.results import ResultEnvelope, curve_csv, write_svg

from ._base import FidgapCommand


class Command(FidgapCommand):
    help = 'Fidelity curve with its Schwarz, gap and tracial bounds (CSV + JSON, optional SVG)'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--out', help='Output prefix: writes PREFIX.csv and PREFIX.json; '
                                          'CSV to stdout when omitted')
        parser.add_argument('--svg', help='Write a line chart of the curve to this path')

    def run(self, tolerances, options):
        config = self.load(options)
        model = build_model(config, tolerances)
        curve = run_curve(model, model.time_grid())
        checks = model_checks(model, tolerances, options['seed'])
        checks += curve_checks(curve, model, tolerances)
        report = model.spectral_report()
        envelope = ResultEnvelope(config, options['seed'], checks, report=report, curve=curve,
                                  warnings=model.warnings + report.warnings)

        prefix = options.get('out')
        if prefix:
            self.emit(curve_csv(curve), f'{prefix}.csv')
            self.emit(envelope.to_json(), f'{prefix}.json')
        else:
            self.emit(curve_csv(curve))
        if options.get('svg'):
            write_svg(curve, options['svg'], title=f"{config.dynamics['kind']} dynamics")
        raise_on_failure(checks)
