from django.core.management.base import CommandError

from core.management.base import EXIT_SCHEMA, AnalysisCommand
from core.services.pipeline import DEFAULT_SNR_GRID, parse_snr_grid


class Command(AnalysisCommand):
    help = 'Monte Carlo BER/SER and node counts of sphere decoding over Rayleigh fading'
    command_name = 'decode_sim'
    formats = ('ascii', 'json', 'csv')

    def add_command_arguments(self, parser):
        parser.add_argument('--snr', default=','.join(f'{v:g}' for v in DEFAULT_SNR_GRID),
                            help="SNR grid in dB: 'a:step:b', a comma list, 'inf' for no noise")
        parser.add_argument('--oracle-check', action='store_true',
                            help='Compare every decision with exhaustive ML decoding')
        parser.add_argument('--unstructured', action='store_true',
                            help='Ignore the zero structure of R')

    def config_options(self, options):
        try:
            snr = parse_snr_grid(options['snr'])
        except ValueError as e:
            raise CommandError(str(e), returncode=EXIT_SCHEMA)
        return {
            'snr': snr,
            'oracle_check': options['oracle_check'],
            'structured': not options['unstructured'],
        }
