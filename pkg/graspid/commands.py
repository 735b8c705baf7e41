# graspid/commands.py
import logging
import time

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from graspid.exceptions import MetadataMismatch
from graspid.runconfig import ConfigError, load_run_config

logger = logging.getLogger('graspid')

# Коды завершения команд
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
EXIT_NOT_CONVERGED = 4


class NotConverged(Exception):
    """Распознавание не набрало порога уверенности (код 4)."""


class ConfigCommand(BaseCommand):
    """
    Команда, управляемая YAML-конфигом запуска.

    Флаги --seed и --workers (и собственные флаги команды через overrides)
    перекрывают значения файла. Ошибки переводятся в коды завершения:
    2 - конфиг или метаданные, 3 - ошибка выполнения, 4 - нет сходимости.
    """
    requires_system_checks = []
    require_objects = False

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='YAML-конфиг запуска')
        parser.add_argument('--seed', type=int, help='Мастер-сид (перекрывает конфиг)')
        parser.add_argument('--workers', type=int, help='Число процессов')

    def overrides(self, options):
        """Вложенный словарь значений из флагов команды."""
        return {}

    def run(self, config, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        overrides = {'seed': options.get('seed'), 'workers': options.get('workers'), **self.overrides(options)}
        try:
            config = load_run_config(options['config'], overrides, require_objects=self.require_objects)
        except ConfigError as e:
            raise CommandError(str(e), returncode=EXIT_VALIDATION)

        started = time.perf_counter()
        try:
            # options['config'] - путь к YAML; в run передаётся загруженный конфиг
            self.run(config, **{k: v for k, v in options.items() if k != 'config'})
        except NotConverged as e:
            raise CommandError(str(e), returncode=EXIT_NOT_CONVERGED)
        except (ConfigError, MetadataMismatch, serializers.ValidationError) as e:
            logger.error(f"{self.command_name()}: {e}")
            raise CommandError(str(e), returncode=EXIT_VALIDATION)
        except (ValueError, OSError) as e:
            logger.exception(f"{self.command_name()}: ошибка выполнения")
            raise CommandError(f"{type(e).__name__}: {e}", returncode=EXIT_RUNTIME)
        logger.info(f"{self.command_name()} завершена за {time.perf_counter() - started:.1f} с")

    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def success(self, message):
        self.stdout.write(self.style.SUCCESS(message))
