# recognition/management/commands/recognize.py
from pathlib import Path

from classifiers.storage import load_model
from graspid.commands import ConfigCommand, NotConverged
from graspid.rng import stream_id
from graspid.runconfig import METHODS, ConfigError, ObjectSpec
from recognition.models import Method
from recognition.runner import STREAM_QUERY, recognize
from recognition.samplers import ContactSampler, StreamSampler
from recognition.storage import export_trace, load_run_models, write_result


class Command(ConfigCommand):
    help = 'Распознавание объекта по захватам: самостоятельная выборка с сетки или записанный поток'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        source = parser.add_mutually_exclusive_group()
        source.add_argument('--mesh', help='Сетка запрашиваемого объекта (OBJ/STL/OFF)')
        source.add_argument('--object', help='Имя объекта из конфига')
        source.add_argument('--stream', help='JSON-строки измеренных захватов')
        parser.add_argument('--method', choices=METHODS, help='Метод распознавания')
        parser.add_argument('--threshold', type=float, help='Порог уверенности')
        parser.add_argument('--max-iterations', type=int, help='Бюджет физических захватов')
        parser.add_argument('--z', type=int, help='Число пальцев подзахватов')
        parser.add_argument('--sigma', type=float, help='СКО шума на контактах запроса')
        parser.add_argument('--scale', type=float, default=1.0, help='Масштаб запрашиваемого объекта')
        parser.add_argument('--trial', type=int, default=0, help='Номер опыта (поток генератора)')
        parser.add_argument('--output', help='Файл итога (JSON)')
        parser.add_argument('--trace', help='Файл трассы (JSON-строки)')

    def overrides(self, options):
        return {
            'recognition': {
                'method': options.get('method'),
                'threshold': options.get('threshold'),
                'max_iterations': options.get('max_iterations'),
                'z': options.get('z'),
                'sigma': options.get('sigma'),
            },
        }

    def _sampler(self, config, options):
        recognition = config.recognition
        if options.get('stream'):
            path = Path(options['stream'])
            if not path.exists():
                raise ConfigError(f"Поток захватов не найден: {path}")
            return StreamSampler.from_path(path)

        if options.get('mesh'):
            path = Path(options['mesh'])
            if not path.exists():
                raise ConfigError(f"Сетка запроса не найдена: {path}")
            spec = ObjectSpec(name=path.stem, mesh=path)
        elif options.get('object'):
            spec = next((obj for obj in config.objects if obj.name == options['object']), None)
            if spec is None:
                raise ConfigError(f"Объекта '{options['object']}' нет в конфиге: {config.class_names}")
        else:
            raise ConfigError("Укажите источник захватов: --mesh, --object или --stream")

        return ContactSampler(
            spec.contacts(),
            n=config.grasp['n'],
            seed=config.seed,
            stream=stream_id(STREAM_QUERY, options.get('trial') or 0),
            with_normals=config.grasp['with_normals'],
            sigma=recognition['sigma'],
            scale=options.get('scale') or 1.0,
            policy=recognition['policy'],
        )

    def run(self, config, **options):
        recognition = config.recognition
        method = Method(recognition['method'])
        sampler = self._sampler(config, options)
        model, models = load_run_models(config)
        auxiliary = load_model(config.path('auxiliary_model')) if method is Method.BC_IP else None

        result = recognize(
            method, sampler,
            model=model,
            models=models,
            threshold=recognition['threshold'],
            max_iterations=recognition['max_iterations'],
            auxiliary=auxiliary,
            z=recognition['z'],
            k=recognition['combinations'],
            seed=config.seed,
        )

        output = Path(options['output']) if options.get('output') else config.path('reports') / 'recognition.json'
        write_result(result, output)
        if options.get('trace'):
            export_trace(result.trace, options['trace'])

        self.stdout.write(
            f"Класс: {result.class_name} (уверенность {result.certainty:.3f}), "
            f"захватов {result.physical_grasps}, обновлений {result.updates}"
        )
        if not result.converged:
            raise NotConverged(f"Порог {result.threshold} не достигнут за {result.physical_grasps} захватов; итог в {output}")
        self.success(f'Итог распознавания записан в {output}')
