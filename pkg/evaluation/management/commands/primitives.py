# evaluation/management/commands/primitives.py
from pathlib import Path

from classifiers.predictors import fit_classifier
from classifiers.storage import save_model
from evaluation.geometry import PRIMITIVE_FAMILIES, family_dataset, geometry_recognition, primitive_variations
from evaluation.reports import write_geometry, write_json
from graspid.commands import ConfigCommand
from graspid.runconfig import ConfigError
from mesh_io.loaders import export_mesh


class Command(ConfigCommand):
    help = 'Распознавание формы: обучение на вариациях примитивов и классификация сеток-запросов'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--variations', type=int, help='Вариаций на семейство')
        parser.add_argument('--samples', type=int, help='Захватов на семейство')
        parser.add_argument('--trials', type=int, default=10, help='Опытов на каждый запрос')
        parser.add_argument('--export', action='store_true', help='Сохранить сетки вариаций в paths.meshes')

    def overrides(self, options):
        return {
            'data': {'samples_per_object': options.get('samples')},
            'evaluation': {'variations': options.get('variations')},
        }

    def run(self, config, **options):
        if not config.grasp['normalize']:
            raise ConfigError("Распознавание формы требует grasp.normalize: true")
        if config.recognition['method'] == 'bc_ip':
            raise ConfigError("Для семейств примитивов нет вспомогательной модели: выберите ic, ic_full или bc_np")
        evaluation = config.evaluation
        count = evaluation['variations']
        reports = config.path('reports')

        # Последняя вариация каждого семейства не попадает в обучение и служит запросом
        variations, held_out = {}, []
        for family in PRIMITIVE_FAMILIES:
            meshes = primitive_variations(family, count + 1, evaluation['variation_range'], seed=config.seed)
            variations[family] = meshes[:-1]
            held_out.append(meshes[-1])

        if options.get('export'):
            directory = config.path('meshes')
            for mesh in [m for meshes in variations.values() for m in meshes] + held_out:
                export_mesh(mesh, Path(directory) / f"{mesh.name}.stl")
            self.stdout.write(f"Сетки вариаций сохранены в {directory}")

        dataset = family_dataset(
            variations,
            n=config.grasp['n'],
            samples_per_variation=max(1, config.data['samples_per_object'] // count),
            seed=config.seed,
            with_normals=config.grasp['with_normals'],
            sigma=config.data['sigma'],
            workers=config.workers,
        )
        model = fit_classifier(config.classifier['kind'], dataset, config.classifier, seed=config.seed)
        save_model(model, reports / 'primitives.model')

        queries = held_out + [spec.load() for spec in config.queries()]
        rows = geometry_recognition(
            model, queries,
            trials=options['trials'],
            method=config.recognition['method'],
            threshold=config.recognition['threshold'],
            max_iterations=config.recognition['max_iterations'],
            seed=config.seed,
            with_normals=config.grasp['with_normals'],
            sigma=config.recognition['sigma'],
        )
        write_geometry(rows, list(PRIMITIVE_FAMILIES), reports / 'primitives.csv')
        write_json(rows, reports / 'primitives.json')
        for row in rows:
            self.stdout.write(f"{row['query']}: {row['predicted']}")
        self.success(f'Таблица распознавания формы записана в {reports}')
