# classifiers/predictors.py
import logging

import numpy as np

from .kde import fit_kde, kde_log_likelihoods, kde_predict, kde_predict_batch
from .knn import fit_knn, knn_predict, knn_predict_batch
from .mlp import mlp_predict, mlp_predict_batch, mlp_train
from .models import ClassifierKind

logger = logging.getLogger('classifiers')

_PREDICT = {
    ClassifierKind.KDE: kde_predict,
    ClassifierKind.KNN: knn_predict,
    ClassifierKind.MLP: mlp_predict,
}

_PREDICT_BATCH = {
    ClassifierKind.KDE: kde_predict_batch,
    ClassifierKind.KNN: knn_predict_batch,
    ClassifierKind.MLP: mlp_predict_batch,
}


def predict(model, vector):
    """h(q): распределение по классам для одного вектора."""
    return _PREDICT[model.kind](model, vector)


def predict_batch(model, queries):
    """Матрица (B, m) вероятностей классов."""
    return _PREDICT_BATCH[model.kind](model, queries)


def fit_classifier(kind, dataset, options=None, seed=0):
    """
    Обучение модели заданного вида.

    options - секция classifier конфига: bandwidth, k, hidden_layers, width,
    step_size, momentum, batch_size, epochs.
    """
    options = options or {}
    kind = ClassifierKind(kind)
    if kind is ClassifierKind.KDE:
        return fit_kde(dataset, bandwidth=options.get('bandwidth'))
    if kind is ClassifierKind.KNN:
        return fit_knn(dataset, k=options.get('k'))
    return mlp_train(
        dataset,
        hidden_layers=options.get('hidden_layers'),
        width=options.get('width'),
        step_size=options.get('step_size'),
        momentum=options.get('momentum'),
        batch_size=options.get('batch_size'),
        epochs=options.get('epochs'),
        seed=seed,
    )


def log_likelihoods(model, queries):
    """
    Матрица (B, m) логарифмов правдоподобий для байесовского обновления.

    KDE даёт логарифм плотности P(q | O_t); для kNN и MLP берётся логарифм
    их выходных вероятностей (нулевая вероятность -> -inf).
    """
    if model.kind is ClassifierKind.KDE:
        return kde_log_likelihoods(model, queries)
    with np.errstate(divide='ignore'):
        return np.log(predict_batch(model, queries))
