import logging

from django.core.management.base import BaseCommand, CommandError

from fidgap.config import load_config
from fidgap.conf import Tolerances, get_setting, get_tolerances
from fidgap.exceptions import FidgapError, InvariantViolation

logger = logging.getLogger('fidgap.commands')


class FidgapCommand(BaseCommand):
    """
    Shared flags (--seed, --tol-scale) and error conversion: library errors
    become CommandError so the process exits non-zero.
    """
    takes_config = True

    def add_arguments(self, parser):
        if self.takes_config:
            parser.add_argument('config', help='Path to a JSON model config')
        parser.add_argument('--seed', type=int, default=None,
                            help='RNG seed for randomized checks (default from settings)')
        parser.add_argument('--tol-scale', type=float, default=1.0, dest='tol_scale',
                            help='Multiply every invariant tolerance by this factor')

    def handle(self, *args, **options):
        options['seed'] = (options['seed'] if options['seed'] is not None
                           else get_setting('DEFAULT_SEED', 1234))
        try:
            tolerances = get_tolerances(options['tol_scale'])
            self.run(tolerances, options)
        except InvariantViolation as exc:
            raise CommandError(str(exc)) from exc
        except FidgapError as exc:
            raise CommandError(f'{type(exc).__name__}: {exc}') from exc
        except ValueError as exc:
            raise CommandError(str(exc)) from exc

    def run(self, tolerances: Tolerances, options: dict) -> None:
        raise NotImplementedError

    def load(self, options: dict):
        return load_config(options['config'])

    def emit(self, text: str, path=None) -> None:
        """Write to `path` when given, otherwise to stdout."""
        from fidgap.results import write_text

        if path:
            write_text(path, text)
        else:
            self.stdout.write(text, ending='')
