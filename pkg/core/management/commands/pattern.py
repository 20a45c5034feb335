from core.management.base import AnalysisCommand


def row_order(value):
    return tuple(int(part) for part in value.split(','))


class Command(AnalysisCommand):
    help = 'Render the measured zero pattern of R, optionally next to the predicted ones'
    command_name = 'pattern'

    def add_command_arguments(self, parser):
        parser.add_argument('--predicted', action='store_true',
                            help='Also show the channel-free and HRQF predictions')
        parser.add_argument('--row-permutation', type=row_order, default=None,
                            help='Comma-separated 1-based row order applied to H_eq before QR')

    def config_options(self, options):
        return {'predicted': options['predicted'], 'row_permutation': options['row_permutation']}
