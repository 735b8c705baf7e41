# classifiers/management/commands/train.py
import json

from classifiers.predictors import fit_classifier
from classifiers.storage import save_model
from classifiers.sufficiency import compare_classifiers, confusion_matrix, expected_scores
from graspid.commands import ConfigCommand
from graspid.exceptions import MetadataMismatch
from sampling.sampler import split_validation
from sampling.storage import load_dataset


class Command(ConfigCommand):
    help = 'Обучение классификатора на датасете и отчёт о достаточности на проверочной части'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--kind', choices=['kde', 'knn', 'mlp'], help='Вид классификатора')
        parser.add_argument('--bandwidth', type=float, help='Ширина окна KDE (иначе по правилу)')
        parser.add_argument('--k', type=int, help='Число соседей kNN')
        parser.add_argument('--dataset', help='Путь датасета')
        parser.add_argument('--output', help='Путь файла модели')
        parser.add_argument('--compare', action='store_true', help='Сравнить KDE, kNN и MLP')

    def overrides(self, options):
        return {
            'classifier': {'kind': options.get('kind'), 'bandwidth': options.get('bandwidth'), 'k': options.get('k')},
            'paths': {'dataset': options.get('dataset'), 'model': options.get('output')},
        }

    def run(self, config, **options):
        dataset = load_dataset(config.path('dataset'))
        if dataset.shape != config.shape:
            raise MetadataMismatch(f"Датасет {dataset.shape} не соответствует конфигу {config.shape}")

        fraction = config.data['validation_fraction']
        train, validation = split_validation(dataset, fraction, seed=config.seed)
        kind = config.classifier['kind']
        model = fit_classifier(kind, train, config.classifier, seed=config.seed)
        output = save_model(model, config.path('model'))

        report = {'model': str(model), 'train_rows': train.M, 'validation_rows': validation.M}
        if validation.M:
            sufficiency = confusion_matrix(model, validation)
            report['sufficiency'] = sufficiency.as_dict()
            report['expected_scores'] = expected_scores(sufficiency.confusion, sufficiency.mean_pmax).tolist()
            self.stdout.write(
                f'Точность на проверке: {sufficiency.accuracy:.3f}, '
                f'достаточных классов {sufficiency.m_p}/{sufficiency.m} (eta = {sufficiency.eta:.1f}%)'
            )
        if options.get('compare') and validation.M:
            report['comparison'] = compare_classifiers(train, validation, config.classifier, seed=config.seed)

        report_path = output.with_name(output.name + '.report.json')
        report_path.write_text(json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding='utf-8')
        self.success(f'Модель {model} сохранена в {output}')
