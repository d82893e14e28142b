from django.core.management.base import CommandError

from fidgap.config import dump_config, parse_model_config
from fidgap.demos import DEMOS

from ._base import FidgapCommand


class Command(FidgapCommand):
    help = 'Emit the config of a built-in demo model'
    takes_config = False

    def add_arguments(self, parser):
        parser.add_argument('name', help=f"One of: {', '.join(DEMOS)}")
        parser.add_argument('--out', help='Write the config here instead of stdout')
        super().add_arguments(parser)

    def run(self, tolerances, options):
        name = options['name']
        if name not in DEMOS:
            raise CommandError(f"unknown demo {name!r}, expected one of {', '.join(DEMOS)}")
        config = parse_model_config(DEMOS[name]())
        self.emit(dump_config(config), options.get('out'))
