# grasp_param/serializers.py
import logging

import numpy as np
from rest_framework import serializers

from .models import Dimensionality, Grasp, ParamVector, VectorShape, param_dimension

logger = logging.getLogger('grasp_param')


class CoordinateField(serializers.ListField):
    """Точка или нормаль: 2 или 3 конечных числа."""
    child = serializers.FloatField(allow_null=False)

    def __init__(self, **kwargs):
        kwargs.setdefault('min_length', 2)
        kwargs.setdefault('max_length', 3)
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        values = super().to_internal_value(data)
        if not np.all(np.isfinite(values)):
            raise serializers.ValidationError("Координаты должны быть конечными числами")
        return values


class GraspSerializer(serializers.Serializer):
    """
    Захват из внешнего источника (JSON-строка потока наблюдений или запрос CLI).

    Пример: {"points": [[0, 0, 0], [1, 0, 0], [0, 1, 0]], "normals": null}
    """
    points = serializers.ListField(child=CoordinateField(), min_length=2)
    normals = serializers.ListField(child=CoordinateField(), required=False, allow_null=True)

    def validate(self, data):
        points = data['points']
        normals = data.get('normals')

        dims = {len(p) for p in points}
        if len(dims) != 1:
            raise serializers.ValidationError({'points': "Все точки должны иметь одинаковую размерность"})

        if normals is not None:
            if len(normals) != len(points):
                raise serializers.ValidationError({
                    'normals': f"Ожидается {len(points)} нормалей, получено {len(normals)}"
                })
            if {len(n) for n in normals} != dims:
                raise serializers.ValidationError({'normals': "Размерность нормалей не совпадает с точками"})
            if len(points) < 3:
                raise serializers.ValidationError({'normals': "При n = 2 нормали не параметризуются"})
            norms = np.linalg.norm(np.asarray(normals, dtype=np.float64), axis=1)
            if np.max(np.abs(norms - 1.0)) > 1e-9:
                raise serializers.ValidationError({'normals': "Нормали должны быть единичными"})
        return data

    def to_grasp(self):
        data = self.validated_data
        return Grasp(points=data['points'], normals=data.get('normals'))


class VectorShapeSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=2)
    with_normals = serializers.BooleanField()
    normalized = serializers.BooleanField()
    dimensionality = serializers.ChoiceField(
        choices=[d.value for d in Dimensionality], default=Dimensionality.SPATIAL.value
    )

    def validate(self, data):
        if data['n'] == 2 and data['with_normals']:
            raise serializers.ValidationError({'with_normals': "При n = 2 нормали не параметризуются"})
        if data['n'] == 2 and data['normalized']:
            raise serializers.ValidationError({'normalized': "Двухпальцевый вектор не нормируется"})
        return data

    def to_shape(self):
        data = self.validated_data
        return VectorShape(data['n'], data['with_normals'], data['normalized'], data['dimensionality'])


class ParamVectorSerializer(VectorShapeSerializer):
    values = serializers.ListField(child=serializers.FloatField())

    def validate(self, data):
        data = super().validate(data)
        expected = param_dimension(data['n'], data['with_normals'], data['dimensionality'])
        if len(data['values']) != expected:
            raise serializers.ValidationError({
                'values': f"Ожидается {expected} компонент, получено {len(data['values'])}"
            })
        return data

    def to_vector(self):
        return ParamVector(**self.validated_data)

    @staticmethod
    def dump(vector):
        return {**vector.shape.as_dict(), 'values': [float(v) for v in vector.values]}
