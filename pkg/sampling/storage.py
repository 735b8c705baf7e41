# sampling/storage.py
import json
import logging
from pathlib import Path

import numpy as np

from graspid.exceptions import MetadataMismatch
from .models import LabeledDataset
from .serializers import DATASET_FORMAT, DatasetManifestSerializer

logger = logging.getLogger('sampling')


def _paths(path):
    path = Path(path)
    base = path.with_suffix('') if path.suffix in ('.csv', '.json') else path
    return base.with_suffix('.json'), base.with_suffix('.csv')


def save_dataset(dataset, path):
    """
    Манифест (JSON) и таблица строк `label,q1..qw` (CSV) рядом друг с другом.

    Числа пишутся с 17 значащими цифрами: повторный запуск с тем же сидом
    даёт байт-в-байт одинаковые файлы.
    """
    manifest_path, table_path = _paths(path)
    table_path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {'format': DATASET_FORMAT, **dataset.manifest()}
    manifest_path.write_text(json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding='utf-8')

    header = ",".join(['label'] + [f"q{i + 1}" for i in range(dataset.shape.width)])
    table = np.column_stack([dataset.labels.astype(np.float64), dataset.vectors])
    fmt = ['%d'] + ['%.17g'] * dataset.shape.width
    np.savetxt(table_path, table, delimiter=',', header=header, comments='', fmt=fmt)
    logger.info(f"{dataset} сохранён в {table_path}")
    return manifest_path, table_path


def load_dataset(path):
    """
    Raises:
        MetadataMismatch: манифест некорректен или не согласован с таблицей
    """
    manifest_path, table_path = _paths(path)
    try:
        raw = json.loads(manifest_path.read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as e:
        raise MetadataMismatch(f"Манифест {manifest_path} не прочитан: {e}") from e

    serializer = DatasetManifestSerializer(data=raw)
    if not serializer.is_valid():
        raise MetadataMismatch(f"Манифест {manifest_path}: {serializer.errors}")
    shape = serializer.to_shape()
    meta = serializer.validated_data

    table = np.loadtxt(table_path, delimiter=',', skiprows=1, ndmin=2)
    if table.size == 0:
        table = table.reshape(0, shape.width + 1)
    if table.shape[1] != shape.width + 1:
        raise MetadataMismatch(
            f"{table_path}: {table.shape[1] - 1} компонент в строке, манифест требует {shape.width}"
        )
    labels = table[:, 0].astype(np.int64)
    if labels.size and labels.min() < 0:
        raise MetadataMismatch(f"{table_path}: отрицательные метки классов")
    counts = np.bincount(labels, minlength=len(meta['class_names'])).tolist()
    if counts != meta['counts']:
        raise MetadataMismatch(f"{table_path}: число строк по классам {counts} != {meta['counts']}")

    dataset = LabeledDataset(
        vectors=table[:, 1:],
        labels=labels,
        class_names=tuple(meta['class_names']),
        shape=shape,
        sigma=meta['sigma'],
        seed=meta['seed'],
    )
    logger.info(f"Загружен {dataset} из {table_path}")
    return dataset
