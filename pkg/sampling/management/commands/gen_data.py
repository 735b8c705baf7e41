# sampling/management/commands/gen_data.py
from graspid.commands import ConfigCommand
from sampling.sampler import generate_dataset
from sampling.storage import save_dataset


class Command(ConfigCommand):
    help = 'Генерация размеченного датасета захватов по сеткам объектов из конфига'
    require_objects = True

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--samples', type=int, help='Захватов на объект (N)')
        parser.add_argument('--sigma', type=float, help='СКО шума на положениях контактов')
        parser.add_argument('--output', help='Путь датасета (без расширения)')

    def overrides(self, options):
        return {
            'data': {'samples_per_object': options.get('samples'), 'sigma': options.get('sigma')},
            'paths': {'dataset': options.get('output')},
        }

    def run(self, config, **options):
        output = config.path('dataset')
        dataset = generate_dataset(
            config.contact_sets(),
            n=config.grasp['n'],
            N=config.data['samples_per_object'],
            with_normals=config.grasp['with_normals'],
            normalize=config.grasp['normalize'],
            sigma=config.data['sigma'],
            seed=config.seed,
            workers=config.workers,
            class_names=config.class_names,
        )
        save_dataset(dataset, output)
        self.success(f'Датасет: {dataset.M} строк ({dataset.m} классов) -> {output}')
