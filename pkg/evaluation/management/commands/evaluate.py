# evaluation/management/commands/evaluate.py
from classifiers.storage import load_model
from evaluation.models import TrialConfig
from evaluation.reports import write_curve, write_json, write_report, write_table
from evaluation.trials import (
    classifier_comparison,
    data_ablation,
    run_trials,
    scaled_object_trials,
    success_vs_samples,
)
from graspid.commands import ConfigCommand
from graspid.exceptions import MetadataMismatch
from graspid.runconfig import METHODS, ConfigError
from recognition.models import Method
from recognition.storage import load_run_models
from sampling.sampler import split_validation
from sampling.storage import load_dataset


class Command(ConfigCommand):
    help = 'Серии опытов распознавания: отчёты по методам, кривые успеха, абляция данных, масштаб'
    require_objects = True

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--methods', nargs='+', choices=METHODS, help='Методы для сравнения на общих сидах')
        parser.add_argument('--trials', type=int, help='Опытов на объект')
        parser.add_argument('--threshold', type=float, help='Порог уверенности')
        parser.add_argument('--sigma', type=float, help='СКО шума на контактах запросов')
        parser.add_argument('--curve', action='store_true', help='Кривая успеха для k = 1..max_k')
        parser.add_argument('--max-k', type=int, help='Наибольшее число захватов на кривой')
        parser.add_argument('--ablation', action='store_true', help='Зависимость от объёма обучающих данных')
        parser.add_argument('--scaled', action='store_true', help='Опыты со случайным масштабом объектов')
        parser.add_argument('--compare', action='store_true', help='Сравнение KDE, kNN и MLP')
        parser.add_argument('--output', help='Каталог отчётов')

    def overrides(self, options):
        return {
            'recognition': {'threshold': options.get('threshold'), 'sigma': options.get('sigma')},
            'evaluation': {
                'trials': options.get('trials'),
                'methods': options.get('methods'),
                'max_k': options.get('max_k'),
            },
            'paths': {'reports': options.get('output')},
        }

    def run(self, config, **options):
        reports = config.path('reports')
        evaluation = config.evaluation
        methods = [Method(m) for m in evaluation.get('methods') or [config.recognition['method']]]
        model, models = load_run_models(config)
        if model is None and any(options.get(key) for key in ('scaled', 'ablation', 'compare')):
            raise ConfigError("--scaled, --ablation и --compare требуют одну модель paths.model без политики")
        needs_auxiliary = Method.BC_IP in methods
        auxiliary = load_model(config.path('auxiliary_model')) if needs_auxiliary else None
        contact_sets = config.contact_sets()

        summary = {}
        for method in methods:
            trial_config = TrialConfig.from_run_config(config, method=method, contact_sets=contact_sets)
            report = run_trials(trial_config, model, auxiliary=auxiliary, models=models)
            write_report(report, reports)
            summary[method.value] = report.overall()
            self.stdout.write(str(report))

            if options.get('curve'):
                curve = success_vs_samples(trial_config, model, evaluation['max_k'], auxiliary=auxiliary, models=models)
                write_curve(curve, reports / f"{method.value}_curve.csv")

            if options.get('scaled'):
                if evaluation.get('scale_range') is None:
                    raise ConfigError("Для --scaled задайте evaluation.scale_range")
                scaled = scaled_object_trials(trial_config, model, evaluation['scale_range'], auxiliary=auxiliary)
                write_report(scaled, reports, prefix=f"{method.value}_scaled")
                summary[f"{method.value}_scaled"] = scaled.overall()
                self.stdout.write(f"Масштаб {tuple(evaluation['scale_range'])}: {scaled}")

        if options.get('ablation') or options.get('compare'):
            dataset = load_dataset(config.path('dataset'))
            if dataset.shape != model.shape:
                raise MetadataMismatch(f"Датасет {dataset.shape} не соответствует модели {model.shape}")
            # та же проверочная часть, что отложена командой train
            train, validation = split_validation(dataset, config.data['validation_fraction'], seed=config.seed)

            if options.get('ablation'):
                trial_config = TrialConfig.from_run_config(config, method=methods[0], contact_sets=contact_sets)
                curve = data_ablation(
                    trial_config, train, evaluation['fractions'],
                    kind=config.classifier['kind'], options=config.classifier, auxiliary=auxiliary,
                )
                write_table(curve, reports / 'ablation.csv')
                summary['ablation'] = curve

            if options.get('compare'):
                rows = classifier_comparison(train, validation, config.classifier, seed=config.seed)
                write_table(rows, reports / 'classifiers.csv')
                summary['classifiers'] = rows

        write_json(summary, reports / 'summary.json')
        self.success(f'Отчёты записаны в {reports}')
