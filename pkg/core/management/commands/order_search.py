from core.management.base import AnalysisCommand


class Command(AnalysisCommand):
    help = 'Search the real-symbol ordering with the lowest sphere-decoding complexity'
    command_name = 'order_search'

    def add_command_arguments(self, parser):
        parser.add_argument('--heuristic', action='store_true',
                            help='Greedy search with 2-swap refinement instead of the exhaustive search')
        parser.add_argument('--objective', choices=('complexity', 'zeros'), default='complexity')

    def config_options(self, options):
        mode = 'heuristic' if options['heuristic'] else 'exhaustive'
        return {'mode': mode, 'objective': options['objective']}
