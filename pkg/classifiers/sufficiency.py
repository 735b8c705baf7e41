# classifiers/sufficiency.py
import logging

import numpy as np

from graspid.exceptions import MetadataMismatch
from .exceptions import EmptyClass
from .models import ClassifierKind, SufficiencyReport
from .predictors import fit_classifier, predict_batch

logger = logging.getLogger('classifiers')


def check_compatible(model, dataset):
    """
    Raises:
        MetadataMismatch: форма векторов или набор классов не совпадают
    """
    if model.shape != dataset.shape:
        raise MetadataMismatch(f"Модель {model.shape} и данные {dataset.shape} несовместимы")
    if tuple(model.class_names) != tuple(dataset.class_names):
        raise MetadataMismatch(f"Классы модели {model.class_names} != классы данных {dataset.class_names}")


def confusion_from_predictions(true_labels, predicted, m, class_names, pmax=None):
    """
    Строчно-стохастическая матрица: строка - истинный класс, столбец - ответ.

    Raises:
        EmptyClass: у некоторого класса нет ни одного примера
    """
    true_labels = np.asarray(true_labels, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    counts = np.bincount(true_labels, minlength=m)
    if np.any(counts == 0):
        missing = [class_names[i] for i in np.flatnonzero(counts == 0)]
        raise EmptyClass(f"Нет примеров классов {missing}")

    hits = np.zeros((m, m))
    np.add.at(hits, (true_labels, predicted), 1.0)
    confusion = hits / counts[:, None]

    mean_pmax = None
    if pmax is not None:
        sums = np.zeros((m, m))
        np.add.at(sums, (true_labels, predicted), np.asarray(pmax, dtype=np.float64))
        with np.errstate(invalid='ignore', divide='ignore'):
            mean_pmax = np.where(hits > 0, sums / np.maximum(hits, 1), np.nan)
    return SufficiencyReport(confusion=confusion, class_names=class_names, counts=counts, mean_pmax=mean_pmax)


def confusion_matrix(model, dataset):
    """Матрица ошибок классификатора на размеченной выборке и проверка достаточности."""
    check_compatible(model, dataset)
    probs = predict_batch(model, dataset.vectors)
    predicted = np.argmax(probs, axis=1)
    report = confusion_from_predictions(
        dataset.labels, predicted, model.m, model.class_names, pmax=probs.max(axis=1)
    )
    logger.info(
        f"{model}: точность {report.accuracy:.3f}, достаточных классов {report.m_p}/{report.m}, "
        f"eta = {report.eta:.1f}%"
    )
    return report


def expected_scores(confusion, mean_pmax=None):
    """
    Ожидаемые нормированные накопленные баллы E(s_j | O_i) = E(p_max | l=j, O_i) * P(l=j | O_i).

    Где среднее p_max не измерено (нет таких ответов или mean_pmax не задан),
    берётся значение для p_max ~ U(1/m, 1): (m + 2) / (2m).
    """
    confusion = np.asarray(confusion, dtype=np.float64)
    m = len(confusion)
    uniform = (m + 2) / (2 * m)
    if mean_pmax is None:
        mean_pmax = np.full_like(confusion, uniform)
    else:
        mean_pmax = np.where(np.isnan(mean_pmax), uniform, mean_pmax)
    return mean_pmax * confusion


def accuracy(model, dataset):
    check_compatible(model, dataset)
    predicted = np.argmax(predict_batch(model, dataset.vectors), axis=1)
    return float(np.mean(predicted == dataset.labels))


def compare_classifiers(train, validation, options=None, seed=0, kinds=None):
    """
    Точность KDE, kNN и MLP на проверочной выборке при одном обучающем наборе.

    Returns:
        {kind: {'accuracy', 'eta', 'sufficient'}}
    """
    kinds = [ClassifierKind(k) for k in (kinds or ClassifierKind)]
    results = {}
    for kind in kinds:
        model = fit_classifier(kind, train, options, seed=seed)
        report = confusion_matrix(model, validation)
        results[kind.value] = {
            'accuracy': report.accuracy,
            'eta': report.eta,
            'sufficient': report.sufficient,
        }
        logger.info(f"Сравнение: {kind.value} точность {report.accuracy:.3f}")
    return results
