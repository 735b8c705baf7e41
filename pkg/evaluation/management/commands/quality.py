# evaluation/management/commands/quality.py
from classifiers.storage import load_model
from evaluation.quality import quality_correlation, quality_trials
from evaluation.reports import write_quality
from graspid.commands import ConfigCommand
from graspid.exceptions import MetadataMismatch
from graspid.runconfig import ConfigError


class Command(ConfigCommand):
    help = 'Качество захватов (объём многогранника, углы нормалей) и его связь с уверенностью модели'
    require_objects = True

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--samples', type=int, default=200, help='Захватов на объект')

    def run(self, config, **options):
        model = load_model(config.path('model'))
        if tuple(model.class_names) != config.class_names:
            raise MetadataMismatch(f"Классы модели {model.class_names} != {config.class_names}")
        if model.shape.n < 4 or model.shape.dimensionality != 'spatial':
            raise ConfigError(f"Объём многогранника определён для пространственных захватов с n >= 4: {model.shape}")

        samples = quality_trials(
            [obj.load() for obj in config.objects],
            model,
            options['samples'],
            seed=config.seed,
        )
        measured = [s for s in samples if s.measured]
        certainty = [s.certainty for s in measured]
        correlation = {'volume_ratio': quality_correlation([s.volume_ratio for s in measured], certainty)}
        if all(s.mean_normal_angle is not None for s in measured):
            correlation['mean_normal_angle'] = quality_correlation([s.mean_normal_angle for s in measured], certainty)
        correlation['skipped'] = len(samples) - len(measured)

        reports = config.path('reports')
        write_quality(samples, correlation, reports)
        self.stdout.write(
            f"Спирмен (объём, уверенность): rho = {correlation['volume_ratio']['rho']:.3f}, "
            f"p = {correlation['volume_ratio']['p_value']:.2g}"
        )
        self.success(f'Качество захватов записано в {reports}')
