# sampling/serializers.py
from rest_framework import serializers

from grasp_param.serializers import VectorShapeSerializer
from .exceptions import InvalidPolicy
from .models import POLICY_PRESETS, IncompleteGraspPolicy

DATASET_FORMAT = 'graspid-dataset/1'


class DatasetManifestSerializer(VectorShapeSerializer):
    """Манифест датасета: проверяется до чтения строк."""
    format = serializers.ChoiceField(choices=[DATASET_FORMAT])
    class_names = serializers.ListField(child=serializers.CharField(), min_length=1)
    sigma = serializers.FloatField(min_value=0.0)
    seed = serializers.IntegerField(allow_null=True)
    counts = serializers.ListField(child=serializers.IntegerField(min_value=0))

    def validate(self, data):
        data = super().validate(data)
        if len(data['counts']) != len(data['class_names']):
            raise serializers.ValidationError({
                'counts': f"Классов {len(data['class_names'])}, счётчиков {len(data['counts'])}"
            })
        if len(set(data['class_names'])) != len(data['class_names']):
            raise serializers.ValidationError({'class_names': "Имена классов повторяются"})
        return data


class PolicyField(serializers.Field):
    """Политика неполного захвата: имя пресета (p4, p5) или словарь {z: вероятность}."""

    def to_internal_value(self, data):
        if isinstance(data, str):
            if data not in POLICY_PRESETS:
                raise serializers.ValidationError(f"Неизвестная политика '{data}', доступны {sorted(POLICY_PRESETS)}")
            return POLICY_PRESETS[data]
        if isinstance(data, dict):
            try:
                return IncompleteGraspPolicy.from_dict({int(z): float(p) for z, p in data.items()})
            except (TypeError, ValueError, InvalidPolicy) as e:
                raise serializers.ValidationError(str(e))
        raise serializers.ValidationError("Ожидается имя пресета или словарь {z: p}")

    def to_representation(self, value):
        return value.name if value.name in POLICY_PRESETS else value.as_dict()
