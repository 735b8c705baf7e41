# evaluation/quality.py
"""
Метрики качества захвата и их связь с уверенностью классификатора.
"""
import itertools
import logging

import numpy as np
from scipy.spatial import ConvexHull
from scipy.stats import spearmanr

from classifiers.predictors import predict
from graspid.rng import derive_rng, stream_id
from grasp_param.exceptions import DegenerateGrasp
from grasp_param.parameterization import vectorize
from grasp_param.polyhedron import check_nondegenerate
from mesh_io.contacts import mesh_to_contacts
from mesh_io.utils import mesh_volume
from sampling.sampler import sample_grasp
from .exceptions import DegenerateVariance
from .models import GraspQuality, QualitySample

logger = logging.getLogger('evaluation')

STREAM_QUALITY = 10

MIN_CORRELATION_PAIRS = 100


def circular_mean(angles):
    """Среднее углов через atan2 средних синуса и косинуса."""
    angles = np.asarray(angles, dtype=np.float64)
    return float(np.arctan2(np.sin(angles).mean(), np.cos(angles).mean()))


def pairwise_normal_angles(normals):
    """Углы arccos(n_i . n_j) в [0, pi] по всем C(n, 2) парам."""
    normals = np.asarray(normals, dtype=np.float64)
    pairs = itertools.combinations(range(len(normals)), 2)
    return np.array([np.arccos(np.clip(normals[i] @ normals[j], -1.0, 1.0)) for i, j in pairs])


def grasp_quality(grasp, mesh):
    """
    Отношение объёма многогранника захвата к объёму объекта и круговое
    среднее попарных углов между нормалями (None без нормалей).

    Raises:
        DegenerateGrasp: у многогранника нет объёма
        NotOriented: объём объекта не определён
    """
    if grasp.points.shape[1] != 3 or grasp.n < 4:
        raise DegenerateGrasp(f"Многогранник из {grasp.n} точек не имеет объёма")
    check_nondegenerate(grasp.points)
    volume = mesh_volume(mesh)
    ratio = ConvexHull(grasp.points).volume / volume
    angle = circular_mean(pairwise_normal_angles(grasp.normals)) if grasp.has_normals else None
    return GraspQuality(volume_ratio=float(ratio), mean_normal_angle=angle)


def quality_trials(meshes, model, samples, seed):
    """
    Пары (качество захвата, уверенность в верном классе) по `samples`
    захватам каждого объекта. Объекты идут в порядке классов модели.

    Захват без объёма (n < 4 или вырожденный) не прерывает серию: строка
    остаётся с volume_ratio = None и не участвует в корреляции.
    """
    if len(meshes) != model.m:
        raise ValueError(f"Сеток {len(meshes)}, классов модели {model.m}")
    rows = []
    skipped = 0
    for label, mesh in enumerate(meshes):
        contacts = mesh_to_contacts(mesh)
        for index in range(samples):
            rng = derive_rng(seed, stream_id(STREAM_QUALITY, label), index)
            grasp = sample_grasp(contacts, model.shape.n, model.shape.with_normals, rng)
            try:
                quality = grasp_quality(grasp, mesh)
            except DegenerateGrasp as e:
                logger.debug(f"Качество захвата {index} объекта {model.class_names[label]} не определено: {e}")
                quality = GraspQuality(volume_ratio=None)
                skipped += 1
            certainty = predict(model, vectorize(grasp, model.shape)).probs[label]
            rows.append(QualitySample(
                object=model.class_names[label],
                label=label,
                sample=index,
                volume_ratio=quality.volume_ratio,
                mean_normal_angle=quality.mean_normal_angle,
                certainty=float(certainty),
            ))
    if skipped:
        logger.warning(f"Качество захватов: пропущено {skipped} из {len(rows)} захватов без объёма")
    logger.info(f"Качество захватов: {len(rows) - skipped} пар по {len(meshes)} объектам")
    return rows


def quality_correlation(quality, certainty, min_pairs=MIN_CORRELATION_PAIRS):
    """
    Ранговая корреляция Спирмена между качеством захвата и уверенностью.

    Raises:
        ValueError: пар меньше min_pairs
        DegenerateVariance: одна из величин постоянна
    """
    quality = np.asarray(quality, dtype=np.float64)
    certainty = np.asarray(certainty, dtype=np.float64)
    if len(quality) != len(certainty):
        raise ValueError(f"Длины рядов не совпадают: {len(quality)} и {len(certainty)}")
    if len(quality) < min_pairs:
        raise ValueError(f"Для корреляции нужно хотя бы {min_pairs} пар, получено {len(quality)}")
    if np.ptp(quality) == 0 or np.ptp(certainty) == 0:
        raise DegenerateVariance("Одна из величин не меняется")
    rho, p_value = spearmanr(quality, certainty)
    result = {
        'rho': float(rho),
        'p_value': float(p_value),
        'pairs': int(len(quality)),
        'significant': bool(p_value < 0.05),
    }
    logger.info(f"Корреляция качества и уверенности: rho = {rho:.3f} (p = {p_value:.2g}, пар {len(quality)})")
    return result
