# classifiers/serializers.py
from rest_framework import serializers

from grasp_param.serializers import VectorShapeSerializer
from .models import ClassifierKind

MODEL_MAGIC = 'GRASPID-MODEL'
MODEL_VERSION = 1


class ArraySpecSerializer(serializers.Serializer):
    name = serializers.CharField()
    shape = serializers.ListField(child=serializers.IntegerField(min_value=0), max_length=2)


class ModelHeaderSerializer(serializers.Serializer):
    """Текстовый заголовок файла модели; проверяется до чтения двоичной части."""
    version = serializers.IntegerField()
    kind = serializers.ChoiceField(choices=[k.value for k in ClassifierKind])
    shape = VectorShapeSerializer()
    class_names = serializers.ListField(child=serializers.CharField(), min_length=2)
    params = serializers.DictField(required=False, default=dict)
    arrays = ArraySpecSerializer(many=True)
    dtype = serializers.ChoiceField(choices=['<f8'])

    def validate_version(self, value):
        if value != MODEL_VERSION:
            raise serializers.ValidationError(f"Неподдерживаемая версия {value}, ожидается {MODEL_VERSION}")
        return value

    def validate(self, data):
        kind = ClassifierKind(data['kind'])
        params = data['params']
        if kind is ClassifierKind.KDE and not params.get('bandwidth', 0) > 0:
            raise serializers.ValidationError({'params': "Для KDE нужна положительная bandwidth"})
        if kind is ClassifierKind.KNN and not int(params.get('k', 0)) >= 1:
            raise serializers.ValidationError({'params': "Для kNN нужно k >= 1"})
        return data
