# recognition/serializers.py
import math

from rest_framework import serializers


class FiniteFloatListField(serializers.ListField):
    """Список чисел; -inf (нулевое правдоподобие) выводится как null."""
    child = serializers.FloatField()

    def to_representation(self, data):
        return [float(x) if math.isfinite(x) else None for x in data]


class TraceRecordSerializer(serializers.Serializer):
    iteration = serializers.IntegerField()
    grasp = serializers.IntegerField()
    z = serializers.IntegerField()
    observation = FiniteFloatListField()
    state = FiniteFloatListField()
    predicted = serializers.IntegerField()
    certainty = serializers.FloatField()
    converged = serializers.BooleanField()
    flag = serializers.CharField(allow_null=True)


class RecognitionResultSerializer(serializers.Serializer):
    """Итог распознавания для вывода команды recognize (JSON)."""
    predicted = serializers.IntegerField()
    class_name = serializers.CharField()
    class_names = serializers.ListField(child=serializers.CharField())
    method = serializers.CharField(source='method.value')
    threshold = serializers.FloatField()
    converged = serializers.BooleanField()
    certainty = serializers.FloatField()
    physical_grasps = serializers.IntegerField()
    updates = serializers.IntegerField()
    skipped_updates = serializers.IntegerField()
    sampler_exhausted = serializers.BooleanField()
    state = FiniteFloatListField()
    prior = FiniteFloatListField(allow_null=True)
    trace = TraceRecordSerializer(many=True)
