# evaluation/trials.py
"""
Протоколы опытов: серия распознаваний на каждом объекте, кривые успеха
по числу захватов, зависимость от объёма данных и от масштаба объекта.

Опыт (объект, номер) получает собственные генераторы, поэтому отчёт
не зависит от числа воркеров, а разные методы на одном сиде видят одни
и те же захваты.
"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from classifiers.exceptions import EmptyClass
from classifiers.predictors import fit_classifier
from classifiers.sufficiency import compare_classifiers
from graspid.rng import derive_rng, stream_id
from recognition.runner import STREAM_QUERY, recognize
from recognition.samplers import ContactSampler
from .exceptions import ConfigMismatch, NotNormalizedModel
from .models import TrialRecord, TrialReport

logger = logging.getLogger('evaluation')

STREAM_SCALE = 7
STREAM_ABLATION = 8


def check_models(config, model=None, models=None, auxiliary=None):
    """
    Raises:
        ConfigMismatch: классы или форма векторов модели не совпадают с протоколом
    """
    candidates = list((models or {}).values()) + ([model] if model is not None else [])
    if not candidates:
        raise ValueError("Не задано ни одной модели")
    for candidate in candidates + ([auxiliary] if auxiliary is not None else []):
        if tuple(candidate.class_names) != config.class_names:
            raise ConfigMismatch(f"Классы модели {candidate.class_names} != {config.class_names}")
    if models:
        return
    expected = config.z if config.z is not None else config.n
    if model.shape.n != expected:
        raise ConfigMismatch(f"Модель обучена на n = {model.shape.n}, опыты требуют {expected}")
    if model.shape.with_normals != (config.with_normals and expected > 2):
        raise ConfigMismatch(f"Модель {model.shape} и опыты расходятся по нормалям")


def _trial(config, model, auxiliary, models, label, trial, forced=None):
    scale = 1.0
    if config.scale_range is not None:
        lo, hi = config.scale_range
        scale = float(derive_rng(config.seed, stream_id(STREAM_SCALE, label), trial).uniform(lo, hi))
    sampler = ContactSampler(
        config.objects[label],
        n=config.n,
        seed=config.seed,
        stream=stream_id(STREAM_QUERY, label, trial),
        with_normals=config.with_normals,
        sigma=config.sigma,
        scale=scale,
        policy=config.policy,
    )
    result = recognize(
        config.method, sampler,
        model=model,
        models=models,
        # Порог 1 недостижим: ровно `forced` захватов
        threshold=1.0 if forced else config.threshold,
        max_iterations=forced or config.max_iterations,
        auxiliary=auxiliary,
        z=config.z,
        k=config.k,
        seed=stream_id(config.seed, label, trial),
    )
    record = TrialRecord(
        object=config.class_names[label],
        label=label,
        trial=trial,
        method=config.method.value,
        converged=result.converged,
        physical_grasps=result.physical_grasps,
        updates=result.updates,
        predicted=result.predicted,
        predicted_name=result.class_name,
        certainty=result.certainty,
        scale=scale,
        skipped_updates=result.skipped_updates,
    )
    curve = [result.prediction_after(k) for k in range(1, forced + 1)] if forced else None
    return record, curve


def _trial_block(job):
    config, model, auxiliary, models, label, start, count, forced = job
    return [_trial(config, model, auxiliary, models, label, t, forced) for t in range(start, start + count)]


def _execute(config, model, auxiliary, models, forced=None):
    workers = max(1, config.workers)
    size = max(1, math.ceil(config.trials / workers))
    jobs = [
        (config, model, auxiliary, models, label, start, min(size, config.trials - start), forced)
        for label in range(len(config.objects))
        for start in range(0, config.trials, size)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            blocks = list(executor.map(_trial_block, jobs))
    else:
        blocks = [_trial_block(job) for job in jobs]
    return [item for block in blocks for item in block]


def run_trials(config, model=None, auxiliary=None, models=None):
    """
    Серия опытов: на каждом объекте config.trials распознаваний до сходимости
    или исчерпания бюджета.

    Raises:
        ConfigMismatch
    """
    check_models(config, model, models, auxiliary)
    started = time.perf_counter()
    outcomes = _execute(config, model, auxiliary, models)
    report = TrialReport(config=config, records=tuple(record for record, _ in outcomes))
    logger.info(f"{report} за {time.perf_counter() - started:.1f} с")
    return report


def success_vs_samples(config, model=None, max_k=20, auxiliary=None, models=None):
    """
    Успех при принудительном числе захватов k = 1..max_k (порог не учитывается).

    Returns:
        [{'k': 1, 'success': %, 'per_object': {имя: %}}, ...]
    """
    check_models(config, model, models, auxiliary)
    if max_k < 1:
        raise ValueError(f"max_k должно быть >= 1: {max_k}")
    outcomes = _execute(config, model, auxiliary, models, forced=max_k)
    curve = []
    for k in range(1, max_k + 1):
        hits = np.array([c[k - 1] == r.label for r, c in outcomes])
        labels = np.array([r.label for r, _ in outcomes])
        curve.append({
            'k': k,
            'success': 100.0 * float(hits.mean()),
            'per_object': {
                name: 100.0 * float(hits[labels == label].mean())
                for label, name in enumerate(config.class_names)
            },
        })
    logger.info(
        f"Кривая успеха {config.method.value}: k=1 {curve[0]['success']:.1f}%, "
        f"k={max_k} {curve[-1]['success']:.1f}%"
    )
    return curve


def subsample(dataset, fraction, seed):
    """
    Детерминированная доля строк каждого класса (порядок строк сохраняется).

    Raises:
        EmptyClass: доля не оставляет ни одной строки некоторого класса
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"Доля должна лежать в (0, 1]: {fraction}")
    keep = []
    for label in range(dataset.m):
        rows = np.flatnonzero(dataset.labels == label)
        count = int(round(fraction * len(rows)))
        if count == 0:
            raise EmptyClass(f"Доля {fraction} не оставляет строк класса '{dataset.class_names[label]}'")
        order = derive_rng(seed, stream_id(STREAM_ABLATION, label)).permutation(len(rows))
        keep.append(np.sort(rows[order[:count]]))
    return dataset.subset(np.sort(np.concatenate(keep)))


def data_ablation(config, dataset, fractions, kind='kde', options=None, auxiliary=None):
    """
    Успех и среднее число захватов в зависимости от объёма обучающих данных:
    для каждой доли модель переобучается на детерминированном подмножестве.
    """
    curve = []
    for fraction in fractions:
        subset = subsample(dataset, fraction, config.seed)
        model = fit_classifier(kind, subset, options, seed=config.seed)
        report = run_trials(config, model, auxiliary=auxiliary)
        overall = report.overall()
        curve.append({
            'fraction': float(fraction),
            'rows': subset.M,
            'success': overall['success'],
            'converged_success': overall['converged_success'],
            'mean_samples': float(np.mean([r.physical_grasps for r in report.records])),
        })
        logger.info(f"Доля {fraction}: {subset.M} строк, успех {overall['success']:.1f}%")
    return curve


def scaled_object_trials(config, model, scale_range=None, auxiliary=None):
    """
    Опыты со случайно масштабированными объектами: масштаб каждого опыта
    выбирается равномерно из диапазона.

    Raises:
        NotNormalizedModel: модель обучена без нормировки масштаба
    """
    if not model.shape.normalized:
        raise NotNormalizedModel(f"Модель {model} обучена без нормировки масштаба")
    scale_range = scale_range or config.scale_range
    if scale_range is None:
        raise ValueError("Не задан диапазон масштабов")
    return run_trials(replace(config, scale_range=tuple(scale_range)), model, auxiliary=auxiliary)


def classifier_comparison(train, validation, options=None, seed=0, kinds=None):
    """Таблица точности KDE, kNN и MLP на проверочной выборке."""
    results = compare_classifiers(train, validation, options, seed=seed, kinds=kinds)
    rows = [{'classifier': kind, **values} for kind, values in results.items()]
    best = max(rows, key=lambda row: row['accuracy'])
    logger.info(f"Лучший классификатор: {best['classifier']} (точность {best['accuracy']:.3f})")
    return rows
