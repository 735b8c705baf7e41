# recognition/storage.py
import json
import logging
from pathlib import Path

from classifiers.storage import load_model
from graspid.exceptions import MetadataMismatch
from .serializers import RecognitionResultSerializer, TraceRecordSerializer

logger = logging.getLogger('recognition')


def write_result(result, path):
    """JSON с итогом распознавания и полной трассой."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = RecognitionResultSerializer(result).data
    path.write_text(json.dumps(data, ensure_ascii=False, indent=2) + "\n", encoding='utf-8')
    logger.info(f"Итог распознавания записан в {path}")
    return path


def export_trace(trace, path, extra=None, append=False):
    """
    Трасса в JSON-строках: одна запись на обновление. `extra` (например,
    объект и номер опыта) добавляется в каждую строку.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'a' if append else 'w', encoding='utf-8') as fh:
        for record in TraceRecordSerializer(trace, many=True).data:
            fh.write(json.dumps({**(extra or {}), **record}, ensure_ascii=False, sort_keys=True) + "\n")
    return path


def read_trace(path):
    with open(path, encoding='utf-8') as fh:
        return [json.loads(line) for line in fh if line.strip()]


def load_run_models(config):
    """
    Модели для распознавания по конфигу: (model, None) для однородного
    захвата или подзахватов, (None, {z: модель}) для политики неполных захватов.

    Raises:
        MetadataMismatch: форма модели не совпадает с конфигом
    """
    recognition = config.recognition
    z = recognition['z']
    if recognition['policy'] is not None:
        models = {key: load_model(path) for key, path in config.z_model_paths().items()}
        main = config.path('model', required=False)
        if main is not None:
            model = load_model(main)
            models.setdefault(model.shape.n, model)
        return None, models
    if z is not None:
        path = config.z_model_paths().get(z) or config.path('model')
        return load_model(path), None
    model = load_model(config.path('model'))
    if model.shape != config.shape:
        raise MetadataMismatch(f"Модель {model.shape} не соответствует конфигу {config.shape}")
    return model, None
