from core.management.base import AnalysisCommand


class Command(AnalysisCommand):
    help = ('Pairwise trace-condition verdicts, HRQF zeros, predicted and measured zero '
            'patterns of R, decodability family and complexity of a code')
    command_name = 'analyze'
