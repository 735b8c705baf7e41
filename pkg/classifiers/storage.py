# classifiers/storage.py
"""
Файл модели: строка-сигнатура, строка JSON-заголовка, затем массивы
float64 little-endian подряд в порядке заголовка.
"""
import json
import logging
from pathlib import Path

import numpy as np

from grasp_param.models import VectorShape
from .exceptions import ModelFormatError
from .models import ClassifierKind, KdeModel, KnnModel, MlpModel
from .serializers import MODEL_MAGIC, MODEL_VERSION, ModelHeaderSerializer

logger = logging.getLogger('classifiers')

_DTYPE = np.dtype('<f8')


def _arrays(model):
    if model.kind in (ClassifierKind.KDE, ClassifierKind.KNN):
        return [('vectors', model.vectors), ('labels', model.labels.astype(np.float64))]
    arrays = []
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        arrays += [(f'W{i}', W), (f'b{i}', b)]
    arrays += [
        ('input_mean', model.input_mean),
        ('input_scale', model.input_scale),
        ('loss_history', np.asarray(model.loss_history, dtype=np.float64)),
    ]
    return arrays


def _params(model):
    if model.kind is ClassifierKind.KDE:
        return {'bandwidth': model.bandwidth}
    if model.kind is ClassifierKind.KNN:
        return {'k': model.k, 'epsilon': model.epsilon}
    return {'layer_sizes': list(model.layer_sizes)}


def save_model(model, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = _arrays(model)
    header = {
        'version': MODEL_VERSION,
        'kind': model.kind.value,
        'shape': model.shape.as_dict(),
        'class_names': list(model.class_names),
        'params': _params(model),
        'arrays': [{'name': name, 'shape': list(np.shape(a))} for name, a in arrays],
        'dtype': _DTYPE.str,
    }
    with open(path, 'wb') as fh:
        fh.write(f"{MODEL_MAGIC} {MODEL_VERSION}\n".encode('utf-8'))
        fh.write((json.dumps(header, ensure_ascii=False, sort_keys=True) + "\n").encode('utf-8'))
        for _, array in arrays:
            fh.write(np.ascontiguousarray(array, dtype=_DTYPE).tobytes())
    logger.info(f"Модель {model} сохранена в {path}")
    return path


def _read_header(fh, path):
    magic = fh.readline().decode('utf-8', errors='replace').split()
    if len(magic) != 2 or magic[0] != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: не файл модели")
    try:
        raw = json.loads(fh.readline().decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"{path}: заголовок не читается: {e}") from e
    serializer = ModelHeaderSerializer(data=raw)
    if not serializer.is_valid():
        raise ModelFormatError(f"{path}: заголовок некорректен: {serializer.errors}")
    return serializer.validated_data


def load_model(path):
    """
    Raises:
        ModelFormatError: неизвестная сигнатура или версия, усечённые данные
    """
    path = Path(path)
    try:
        with open(path, 'rb') as fh:
            header = _read_header(fh, path)
            payload = fh.read()
    except OSError as e:
        raise ModelFormatError(f"{path}: {e}") from e

    arrays, offset = {}, 0
    for spec in header['arrays']:
        count = int(np.prod(spec['shape'], dtype=np.int64))
        size = count * _DTYPE.itemsize
        if offset + size > len(payload):
            raise ModelFormatError(f"{path}: данные усечены на массиве '{spec['name']}'")
        arrays[spec['name']] = np.frombuffer(payload, dtype=_DTYPE, count=count, offset=offset).reshape(spec['shape'])
        offset += size
    if offset != len(payload):
        raise ModelFormatError(f"{path}: лишние {len(payload) - offset} байт после данных")

    shape = VectorShape(**header['shape'])
    names = tuple(header['class_names'])
    params = header['params']
    kind = ClassifierKind(header['kind'])
    try:
        if kind is ClassifierKind.KDE:
            model = KdeModel(arrays['vectors'], arrays['labels'].astype(np.int64), params['bandwidth'], shape, names)
        elif kind is ClassifierKind.KNN:
            model = KnnModel(
                arrays['vectors'], arrays['labels'].astype(np.int64), params['k'], shape, names,
                epsilon=params.get('epsilon', 1e-12),
            )
        else:
            layers = len(params['layer_sizes']) - 1
            model = MlpModel(
                weights=[arrays[f'W{i}'] for i in range(layers)],
                biases=[arrays[f'b{i}'] for i in range(layers)],
                input_mean=arrays['input_mean'],
                input_scale=arrays['input_scale'],
                shape=shape,
                class_names=names,
                loss_history=arrays.get('loss_history', ()),
            )
    except (KeyError, ValueError) as e:
        raise ModelFormatError(f"{path}: параметры модели не согласованы: {e}") from e
    logger.info(f"Загружена модель {model} из {path}")
    return model
