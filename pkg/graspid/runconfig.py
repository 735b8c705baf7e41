# graspid/runconfig.py
"""
Конфигурация запуска: YAML-файл, проверенный вложенными DRF-сериализаторами.

Пример:

    seed: 42
    workers: 2
    objects:
      - {name: box, primitive: box, dims: [1, 1, 1]}
      - {name: ellipsoid, primitive: sphere, dims: [0.5], scale: [1, 1.5, 0.8]}
      - {name: mug, mesh: meshes/mug.stl}
    grasp: {n: 4, with_normals: true, normalize: true}
    data: {samples_per_object: 2000, sigma: 0.0}
    classifier: {kind: kde}
    recognition: {method: bc_np, threshold: 0.85}
    paths: {dataset: out/train, model: out/kde.model, reports: out/reports}
"""
import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import yaml
from rest_framework import serializers

from graspid.conf import get_setting
from graspid.exceptions import GraspIdError
from grasp_param.models import VectorShape
from mesh_io.contacts import mesh_to_contacts
from mesh_io.loaders import load_mesh_file
from mesh_io.models import MeshFormat, PrimitiveKind
from mesh_io.utils import PRIMITIVE_DIMS, generate_primitive, scale_mesh
from sampling.serializers import PolicyField

logger = logging.getLogger('graspid')

METHODS = ('ic', 'ic_full', 'bc_np', 'bc_ip')
CLASSIFIER_KINDS = ('kde', 'knn', 'mlp')


class ConfigError(GraspIdError):
    """Конфигурация запуска не прошла проверку."""


class ObjectSpecSerializer(serializers.Serializer):
    name = serializers.CharField(required=False)
    mesh = serializers.CharField(required=False)
    primitive = serializers.ChoiceField(choices=[k.value for k in PrimitiveKind], required=False)
    dims = serializers.ListField(child=serializers.FloatField(min_value=0.0), required=False)
    scale = serializers.ListField(
        child=serializers.FloatField(), min_length=3, max_length=3, required=False
    )
    resolution = serializers.IntegerField(required=False, allow_null=True, min_value=1)

    def validate(self, data):
        if ('mesh' in data) == ('primitive' in data):
            raise serializers.ValidationError("Объект задаётся либо 'mesh', либо 'primitive'")
        if 'primitive' in data:
            expected = PRIMITIVE_DIMS[PrimitiveKind(data['primitive'])]
            if len(data.get('dims', [])) != len(expected):
                raise serializers.ValidationError({'dims': f"Для {data['primitive']} ожидаются {expected}"})
        else:
            try:
                MeshFormat.from_path(data['mesh'])
            except ValueError as e:
                raise serializers.ValidationError({'mesh': str(e)})
        if any(s <= 0 for s in data.get('scale', [1, 1, 1])):
            raise serializers.ValidationError({'scale': "Множители масштаба должны быть положительными"})
        data.setdefault('name', data.get('primitive') or Path(data['mesh']).stem)
        return data


class GraspSectionSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=2, max_value=20)
    with_normals = serializers.BooleanField(default=True)
    normalize = serializers.BooleanField(default=True)

    def validate(self, data):
        if data['n'] == 2:
            data['with_normals'] = False
            data['normalize'] = False
        return data


class DataSectionSerializer(serializers.Serializer):
    samples_per_object = serializers.IntegerField(min_value=1, default=lambda: get_setting('SAMPLES_PER_OBJECT'))
    sigma = serializers.FloatField(min_value=0.0, default=0.0)
    validation_fraction = serializers.FloatField(
        min_value=0.0, max_value=0.99, default=lambda: get_setting('VALIDATION_FRACTION')
    )


class ClassifierSectionSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=CLASSIFIER_KINDS, default='kde')
    bandwidth = serializers.FloatField(min_value=0.0, required=False, allow_null=True, default=None)
    k = serializers.IntegerField(min_value=1, default=lambda: get_setting('KNN_K'))
    hidden_layers = serializers.IntegerField(min_value=1, default=lambda: get_setting('MLP_HIDDEN_LAYERS'))
    width = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    step_size = serializers.FloatField(min_value=0.0, default=lambda: get_setting('MLP_STEP_SIZE'))
    momentum = serializers.FloatField(min_value=0.0, max_value=0.999, default=lambda: get_setting('MLP_MOMENTUM'))
    batch_size = serializers.IntegerField(min_value=1, default=lambda: get_setting('MLP_BATCH_SIZE'))
    epochs = serializers.IntegerField(min_value=1, default=lambda: get_setting('MLP_EPOCHS'))


class RecognitionSectionSerializer(serializers.Serializer):
    method = serializers.ChoiceField(choices=METHODS, default='bc_np')
    threshold = serializers.FloatField(min_value=0.0, max_value=1.0, default=lambda: get_setting('THRESHOLD'))
    max_iterations = serializers.IntegerField(min_value=1, default=lambda: get_setting('MAX_ITERATIONS'))
    z = serializers.IntegerField(min_value=3, required=False, allow_null=True, default=None)
    combinations = serializers.IntegerField(min_value=1, default=lambda: get_setting('Z_COMBINATIONS'))
    policy = PolicyField(required=False, allow_null=True, default=None)
    sigma = serializers.FloatField(min_value=0.0, default=0.0)


class EvaluationSectionSerializer(serializers.Serializer):
    trials = serializers.IntegerField(min_value=1, default=lambda: get_setting('TRIALS_PER_OBJECT'))
    methods = serializers.ListField(
        child=serializers.ChoiceField(choices=METHODS), min_length=1, required=False
    )
    max_k = serializers.IntegerField(min_value=1, default=20)
    fractions = serializers.ListField(
        child=serializers.FloatField(min_value=0.0, max_value=1.0), default=lambda: [0.01, 0.05, 0.2, 0.5, 1.0]
    )
    scale_range = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), min_length=2, max_length=2, required=False, allow_null=True
    )
    variations = serializers.IntegerField(min_value=1, default=100)
    variation_range = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), min_length=2, max_length=2, default=lambda: [0.5, 1.5]
    )
    queries = serializers.ListField(child=ObjectSpecSerializer(), required=False, default=list)

    def validate(self, data):
        for key in ('scale_range', 'variation_range'):
            bounds = data.get(key)
            if bounds and not 0 < bounds[0] <= bounds[1]:
                raise serializers.ValidationError({key: f"Ожидается 0 < min <= max, получено {bounds}"})
        if any(f <= 0 for f in data['fractions']):
            raise serializers.ValidationError({'fractions': "Доли должны быть положительными"})
        return data


class PathsSectionSerializer(serializers.Serializer):
    dataset = serializers.CharField(required=False)
    model = serializers.CharField(required=False)
    auxiliary_model = serializers.CharField(required=False)
    z_models = serializers.DictField(child=serializers.CharField(), required=False, default=dict)
    reports = serializers.CharField(default='reports')
    meshes = serializers.CharField(required=False)

    def validate_z_models(self, value):
        try:
            return {int(z): path for z, path in value.items()}
        except ValueError:
            raise serializers.ValidationError("Ключи z_models должны быть целыми")


class RunConfigSerializer(serializers.Serializer):
    seed = serializers.IntegerField(min_value=0)
    workers = serializers.IntegerField(min_value=1, default=lambda: get_setting('WORKERS'))
    objects = serializers.ListField(child=ObjectSpecSerializer(), required=False, default=list)
    grasp = GraspSectionSerializer()
    data = DataSectionSerializer(required=False, default=dict)
    classifier = ClassifierSectionSerializer(required=False, default=dict)
    recognition = RecognitionSectionSerializer(required=False, default=dict)
    evaluation = EvaluationSectionSerializer(required=False, default=dict)
    paths = PathsSectionSerializer(required=False, default=dict)

    def validate(self, data):
        # Пропущенная секция приходит пустым словарём без значений по умолчанию
        for key in ('data', 'classifier', 'recognition', 'evaluation', 'paths'):
            if key not in self.initial_data:
                section = self.fields[key].__class__(data={})
                section.is_valid(raise_exception=True)
                data[key] = section.validated_data

        names = [obj['name'] for obj in data['objects']]
        if len(set(names)) != len(names):
            raise serializers.ValidationError({'objects': f"Имена объектов повторяются: {names}"})

        n = data['grasp']['n']
        recognition = data['recognition']
        if recognition['z'] is not None and recognition['z'] > n:
            raise serializers.ValidationError({'recognition': f"z = {recognition['z']} больше n = {n}"})
        if recognition['policy'] is not None and recognition['policy'].max_z > n:
            raise serializers.ValidationError({'recognition': f"Политика допускает z > n = {n}"})
        if recognition['method'] == 'bc_ip' and not data['paths'].get('auxiliary_model'):
            raise serializers.ValidationError({'paths': "Метод bc_ip требует paths.auxiliary_model"})
        return data


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    mesh: Optional[Path] = None
    primitive: Optional[PrimitiveKind] = None
    dims: Tuple[float, ...] = ()
    scale: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    resolution: Optional[int] = None

    @classmethod
    def from_validated(cls, data, base_dir):
        mesh = data.get('mesh')
        if mesh is not None:
            mesh = Path(mesh)
            if not mesh.is_absolute():
                mesh = Path(base_dir) / mesh
        return cls(
            name=data['name'],
            mesh=mesh,
            primitive=PrimitiveKind(data['primitive']) if 'primitive' in data else None,
            dims=tuple(data.get('dims', ())),
            scale=tuple(data.get('scale', (1.0, 1.0, 1.0))),
            resolution=data.get('resolution'),
        )

    def load(self):
        """Сетка объекта (с масштабом, если он задан)."""
        if self.mesh is not None:
            mesh = load_mesh_file(self.mesh, name=self.name)
        else:
            mesh = generate_primitive(self.primitive, self.dims, resolution=self.resolution, name=self.name)
        if self.scale != (1.0, 1.0, 1.0):
            mesh = scale_mesh(mesh, *self.scale)
        return mesh

    def contacts(self):
        return mesh_to_contacts(self.load())


@dataclass(frozen=True)
class RunConfig:
    seed: int
    workers: int
    objects: Tuple[ObjectSpec, ...]
    grasp: dict
    data: dict
    classifier: dict
    recognition: dict
    evaluation: dict
    paths: dict
    base_dir: Path = field(default_factory=Path.cwd)
    source: Optional[Path] = None

    @property
    def shape(self):
        grasp = self.grasp
        return VectorShape(grasp['n'], grasp['with_normals'], grasp['normalize'])

    @property
    def class_names(self):
        return tuple(obj.name for obj in self.objects)

    def path(self, key, required=True):
        """Путь из секции paths относительно каталога конфига."""
        value = self.paths.get(key)
        if value is None:
            if required:
                raise ConfigError(f"В конфиге не задан paths.{key}")
            return None
        path = Path(value)
        return path if path.is_absolute() else self.base_dir / path

    def z_model_paths(self):
        return {
            z: (Path(p) if Path(p).is_absolute() else self.base_dir / p)
            for z, p in self.paths.get('z_models', {}).items()
        }

    def contact_sets(self):
        sets = []
        for obj in self.objects:
            contacts = obj.contacts()
            logger.info(f"Объект '{obj.name}': {contacts}")
            sets.append(contacts)
        return sets

    def queries(self):
        return tuple(ObjectSpec.from_validated(q, self.base_dir) for q in self.evaluation.get('queries', []))


def merge_overrides(base, overrides):
    """Рекурсивное наложение флагов командной строки на значения файла (None пропускается)."""
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict):
            merged[key] = merge_overrides(merged.get(key) or {}, value)
        else:
            merged[key] = value
    return merged


def parse_run_config(raw, base_dir=None, source=None, require_objects=False):
    """
    Проверка словаря конфигурации. Все пути к сеткам должны существовать.

    Raises:
        ConfigError
    """
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    if not isinstance(raw, dict):
        raise ConfigError("Конфиг должен быть словарём верхнего уровня")

    serializer = RunConfigSerializer(data=raw)
    if not serializer.is_valid():
        raise ConfigError(f"Ошибка конфигурации: {serializer.errors}")
    data = serializer.validated_data

    objects = tuple(ObjectSpec.from_validated(obj, base_dir) for obj in data['objects'])
    if require_objects and len(objects) < 2:
        raise ConfigError("Для обучения и распознавания нужно хотя бы два объекта")

    config = RunConfig(
        seed=data['seed'],
        workers=data['workers'],
        objects=objects,
        grasp=dict(data['grasp']),
        data=dict(data['data']),
        classifier=dict(data['classifier']),
        recognition=dict(data['recognition']),
        evaluation=dict(data['evaluation']),
        paths=dict(data['paths']),
        base_dir=base_dir,
        source=source,
    )
    missing = [str(spec.mesh) for spec in objects + config.queries() if spec.mesh and not spec.mesh.is_file()]
    if missing:
        raise ConfigError(f"Файлы сеток не найдены: {missing}")
    return config


def load_run_config(path, overrides=None, require_objects=False):
    """Чтение YAML, наложение флагов и проверка."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding='utf-8')) or {}
    except OSError as e:
        raise ConfigError(f"Конфиг {path} не прочитан: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Конфиг {path}: ошибка YAML: {e}") from e
    if overrides:
        raw = merge_overrides(raw, overrides)
    config = parse_run_config(raw, base_dir=path.resolve().parent, source=path, require_objects=require_objects)
    logger.info(f"Конфиг {path} загружен: {len(config.objects)} объектов, seed = {config.seed}")
    return config
