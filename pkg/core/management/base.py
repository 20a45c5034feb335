"""Shared flags, output handling and exit codes of the analysis commands."""
import logging
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from core.exceptions import CodebookTooLarge, SearchOverflow, StbcError, UnderDetermined, UnknownCode
from core.services import pipeline

logger = logging.getLogger(__name__)

EXIT_SCHEMA = 2
EXIT_UNDERDETERMINED = 3
EXIT_OVERFLOW = 4


def positive_int(value):
    number = int(value)
    if number < 1:
        raise ValueError(f"expected a positive integer, got {value}")
    return number


class AnalysisCommand(BaseCommand):
    """
    Base for analyze, pattern, order_search and decode_sim.

    Subclasses set ``command_name`` and may add flags through
    ``add_command_arguments`` and config fields through ``config_options``.
    """
    command_name = None
    formats = ('ascii', 'json')

    def add_arguments(self, parser):
        parser.add_argument('--code', required=True, help='Built-in name, stored code name or path to a code file')
        parser.add_argument('--nr', type=positive_int, default=None,
                            help='Receive antennas (default max(nt, ceil(kappa/T)))')
        parser.add_argument('--trials', type=positive_int, default=None,
                            help=f'Channel draws (default {settings.STBC_FSD_TRIALS})')
        parser.add_argument('--seed', type=int, default=None,
                            help=f'Random seed (default {settings.STBC_FSD_SEED})')
        parser.add_argument('--q', type=positive_int, default=2, help='Bits per complex symbol (even)')
        parser.add_argument('--format', choices=self.formats, default='ascii')
        parser.add_argument('--out', default=None, help='Write the report to this file instead of stdout')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def config_options(self, options):
        return {}

    def build_config(self, options):
        try:
            return pipeline.RunConfig(
                command=self.command_name,
                code=options['code'],
                n_r=options['nr'],
                trials=options['trials'],
                seed=options['seed'],
                q=options['q'],
                format=options['format'],
                **self.config_options(options),
            )
        except ValueError as e:
            raise CommandError(str(e), returncode=EXIT_SCHEMA)

    def handle(self, *args, **options):
        config = self.build_config(options)
        try:
            report = pipeline.run(config)
        except ValidationError as e:
            for message in e.messages:
                self.stderr.write(message)
            raise CommandError(f"Invalid code definition '{config.code}'", returncode=EXIT_SCHEMA)
        except UnknownCode as e:
            raise CommandError(str(e), returncode=EXIT_SCHEMA)
        except UnderDetermined as e:
            raise CommandError(str(e), returncode=EXIT_UNDERDETERMINED)
        except SearchOverflow as e:
            raise CommandError(str(e), returncode=EXIT_OVERFLOW)
        except CodebookTooLarge as e:
            raise CommandError(str(e), returncode=EXIT_SCHEMA)
        except StbcError as e:
            # dependent weights and other inputs the analysis cannot handle
            logger.error(f"{self.command_name} failed on {config.code}: {e}")
            raise CommandError(str(e), returncode=EXIT_SCHEMA)

        self.write_report(pipeline.render(config, report), options['out'])
        return None

    def write_report(self, text, out):
        if out:
            path = Path(out)
            path.write_text(text)
            logger.info(f"Wrote {self.command_name} report to {path}")
        else:
            self.stdout.write(text, ending='')
