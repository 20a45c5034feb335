from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from core.exceptions import UnknownCode
from core.management.base import EXIT_SCHEMA
from core.models import CodeDefinition
from core.services.codes import load_code, save_code
from core.services.pipeline import resolve_code


class Command(BaseCommand):
    help = 'Store a code file so --code <name> finds it, or export a stored/built-in code to a file'

    def add_arguments(self, parser):
        parser.add_argument('path', help='Code file to read, or to write with --export')
        parser.add_argument('--name', default=None, help='Store under this name instead of the file\'s name')
        parser.add_argument('--export', metavar='CODE', default=None,
                            help='Write this built-in or stored code to PATH')

    def handle(self, *args, **options):
        try:
            if options['export']:
                code = resolve_code(options['export'])
                path = save_code(code, options['path'])
                self.stdout.write(self.style.SUCCESS(f"Exported '{code.name}' to {path}"))
                return

            code = load_code(options['path'])
            definition = CodeDefinition.from_code(code, name=options['name'])
        except ValidationError as e:
            for message in e.messages:
                self.stderr.write(message)
            raise CommandError(f"Invalid code definition in {options['path']}", returncode=EXIT_SCHEMA)
        except UnknownCode as e:
            raise CommandError(str(e), returncode=EXIT_SCHEMA)

        for warning in code.warnings:
            self.stderr.write(self.style.WARNING(warning))
        self.stdout.write(self.style.SUCCESS(f"Stored code '{definition.name}' ({definition})"))
