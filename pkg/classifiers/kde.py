# classifiers/kde.py
import logging

import numpy as np
from scipy.special import logsumexp, softmax

from graspid.conf import get_setting
from grasp_param.parameterization import wrapped_difference
from .models import ClassDistribution, KdeModel
from .utils import as_query_matrix

logger = logging.getLogger('classifiers')

# Ниже этого логарифма плотность в double уже ноль
UNDERFLOW_LOG = float(np.log(np.finfo(np.float64).tiny))

# Запросов за один проход (ограничение памяти B x M_t x w)
_CHUNK = 256


def select_bandwidth(vectors, labels=None, override=None):
    """
    Ширина окна по правилу Скотта.

    sigma = медиана по измерениям (внутриклассового СКО) * M^(-1/(w+4)),
    где M - средний размер класса; не меньше KDE_BANDWIDTH_FLOOR.

    Example:
        одна точка -> 1e-3 (нулевой разброс)
    """
    if override is not None:
        return float(override)
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if vectors.size == 0:
        raise ValueError("Пустые данные для выбора ширины окна")
    labels = np.zeros(len(vectors), dtype=np.int64) if labels is None else np.asarray(labels)
    classes = np.unique(labels)
    variances = np.array([vectors[labels == c].var(axis=0) for c in classes])
    pooled_std = np.sqrt(variances.mean(axis=0))
    M = len(vectors) / len(classes)
    w = vectors.shape[1]
    sigma = float(np.median(pooled_std)) * M ** (-1.0 / (w + 4))
    return max(sigma, get_setting('KDE_BANDWIDTH_FLOOR'))


def fit_kde(dataset, bandwidth=None):
    """KDE по размеченному датасету; ширина окна по правилу, если не задана."""
    sigma = select_bandwidth(dataset.vectors, dataset.labels, override=bandwidth)
    model = KdeModel(
        vectors=dataset.vectors,
        labels=dataset.labels,
        bandwidth=sigma,
        shape=dataset.shape,
        class_names=dataset.class_names,
    )
    logger.info(f"Обучена модель {model}")
    return model


def log_kernel_constant(width, bandwidth):
    """log((2 pi sigma^2)^(-w/2))."""
    return -0.5 * width * np.log(2.0 * np.pi * bandwidth ** 2)


def kde_log_likelihoods(model, queries):
    """
    Матрица (B, m) логарифмов P(q | O_t) = (1/M_t) sum_j K_sigma(q - q_j^(t)).

    Разности по азимутам берутся по окружности.
    """
    queries = as_query_matrix(model.shape, queries)
    mask = model.shape.circular_mask
    sigma2 = model.bandwidth ** 2
    const = log_kernel_constant(model.shape.width, model.bandwidth)
    out = np.empty((len(queries), model.m))
    for label in range(model.m):
        data = model.class_vectors(label)
        for start in range(0, len(queries), _CHUNK):
            block = queries[start:start + _CHUNK]
            diff = wrapped_difference(block[:, None, :], data[None, :, :], mask)
            sq = np.einsum('bmw,bmw->bm', diff, diff)
            out[start:start + _CHUNK, label] = logsumexp(-sq / (2.0 * sigma2), axis=1) - np.log(len(data))
    return out + const


def kde_likelihood(model, vector, label):
    """Плотность P(q | O_label) для одного вектора."""
    return float(np.exp(kde_log_likelihoods(model, vector)[0, label]))


def _distribution(log_row):
    if not np.any(np.isfinite(log_row)) or np.max(log_row) < UNDERFLOW_LOG:
        return ClassDistribution.uniform(len(log_row), fallback=True)
    return ClassDistribution(softmax(log_row))


def kde_predict(model, vector):
    """
    Нормированные правдоподобия классов.

    Если все правдоподобия в double обращаются в ноль, возвращается
    равномерное распределение с флагом uniform_fallback.
    """
    result = _distribution(kde_log_likelihoods(model, vector)[0])
    if result.uniform_fallback:
        logger.warning("KDE: все правдоподобия ниже машинного нуля, ответ равномерный")
    return result


def kde_predict_batch(model, queries):
    """Матрица (B, m) вероятностей классов."""
    logs = kde_log_likelihoods(model, queries)
    probs = softmax(logs, axis=1)
    underflow = ~np.any(np.isfinite(logs), axis=1) | (np.max(logs, axis=1) < UNDERFLOW_LOG)
    if np.any(underflow):
        probs[underflow] = 1.0 / model.m
        logger.warning(f"KDE: {int(underflow.sum())} запросов без значимого правдоподобия, ответ равномерный")
    return probs
