# classifiers/knn.py
import logging

import numpy as np

from graspid.conf import get_setting
from grasp_param.parameterization import wrapped_difference
from .models import ClassDistribution, KnnModel
from .utils import as_query_matrix

logger = logging.getLogger('classifiers')

_CHUNK = 256


def fit_knn(dataset, k=None):
    k = get_setting('KNN_K') if k is None else int(k)
    model = KnnModel(
        vectors=dataset.vectors,
        labels=dataset.labels,
        k=min(k, dataset.M),
        shape=dataset.shape,
        class_names=dataset.class_names,
        epsilon=get_setting('KNN_EPSILON'),
    )
    logger.info(f"Обучена модель {model}")
    return model


def knn_distances(model, queries):
    """Матрица (B, M) расстояний до обучающих векторов (азимуты по окружности)."""
    queries = as_query_matrix(model.shape, queries)
    mask = model.shape.circular_mask
    out = np.empty((len(queries), len(model.vectors)))
    for start in range(0, len(queries), _CHUNK):
        block = queries[start:start + _CHUNK]
        diff = wrapped_difference(block[:, None, :], model.vectors[None, :, :], mask)
        out[start:start + _CHUNK] = np.sqrt(np.einsum('bmw,bmw->bm', diff, diff))
    return out


def knn_predict_batch(model, queries, k=None):
    """
    Взвешенное голосование k ближайших: вес 1 / (d + eps).

    Равные расстояния упорядочиваются по номеру обучающей строки.
    """
    k = model.k if k is None else int(k)
    if not 1 <= k <= len(model.vectors):
        raise ValueError(f"k = {k} вне [1, {len(model.vectors)}]")
    distances = knn_distances(model, queries)
    nearest = np.argsort(distances, axis=1, kind='stable')[:, :k]
    weights = 1.0 / (np.take_along_axis(distances, nearest, axis=1) + model.epsilon)
    votes = np.zeros((len(distances), model.m))
    rows = np.repeat(np.arange(len(distances)), k)
    np.add.at(votes, (rows, model.labels[nearest].ravel()), weights.ravel())
    return votes / votes.sum(axis=1, keepdims=True)


def knn_predict(model, vector, k=None):
    return ClassDistribution(knn_predict_batch(model, vector, k)[0])
