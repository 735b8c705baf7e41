# sampling/sampler.py
import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from graspid.conf import get_setting
from graspid.rng import derive_rng, stream_id
from grasp_param.exceptions import DegenerateGrasp, NotApplicable
from grasp_param.models import Grasp, VectorShape
from grasp_param.parameterization import parameterize, vectorize
from .exceptions import InvalidK, InvalidZ, PersistentDegeneracy, TooFewCandidates
from .models import LabeledDataset

logger = logging.getLogger('sampling')

# Номера потоков генераторов, чтобы обучение, испытания и разбиение не пересекались
STREAM_DATASET = 1
STREAM_SPLIT = 2


def _draw(contacts, n, with_normals, rng, sigma=0.0):
    indices = rng.choice(len(contacts), size=n, replace=False)
    points = contacts.points[indices]
    if sigma > 0:
        points = points + rng.normal(0.0, sigma, size=points.shape)
    normals = contacts.normals[indices] if with_normals and n > 2 else None
    return Grasp(points=points, normals=normals)


def _retrying(contacts, n, with_normals, rng, accept, sigma=0.0, max_retries=None):
    """
    Выбор захвата с повтором при вырожденности.

    accept(grasp) возвращает результат или бросает DegenerateGrasp.
    """
    if len(contacts) < n:
        raise TooFewCandidates(f"{contacts}: кандидатов {len(contacts)} < n = {n}")
    retries = get_setting('DEGENERACY_RETRIES') if max_retries is None else max_retries
    for attempt in range(retries + 1):
        grasp = _draw(contacts, n, with_normals, rng, sigma)
        try:
            return grasp, accept(grasp)
        except DegenerateGrasp as e:
            logger.debug(f"{contacts.source_mesh}: вырожденный захват ({e}), попытка {attempt + 1}")
    raise PersistentDegeneracy(
        f"{contacts.source_mesh}: {retries + 1} подряд вырожденных захватов из {n} контактов"
    )


def sample_grasp(contacts, n, with_normals, rng, max_retries=None, sigma=0.0):
    """
    n различных контактов, выбранных равновероятно без возвращения.

    Вырожденные захваты перевыбираются (по умолчанию до DEGENERACY_RETRIES раз).
    sigma > 0 добавляет гауссов шум к положениям выбранных контактов.

    Raises:
        TooFewCandidates, PersistentDegeneracy
    """
    grasp, _ = _retrying(contacts, n, with_normals, rng, parameterize, sigma=sigma, max_retries=max_retries)
    return grasp


def sample_incomplete(contacts, policy, rng, with_normals=True, max_retries=None, sigma=0.0):
    """Захват с числом пальцев z, вытянутым из политики."""
    z = policy.draw(rng)
    return sample_grasp(contacts, z, with_normals, rng, max_retries=max_retries, sigma=sigma)


def z_combinations(grasp, z):
    """
    Все C(n, z) подзахватов в лексикографическом порядке индексов.

    Raises:
        InvalidZ: z вне [3, n]
    """
    if not 3 <= z <= grasp.n:
        raise InvalidZ(f"z = {z} вне [3, {grasp.n}]")
    return [grasp.subset(combo) for combo in itertools.combinations(range(grasp.n), z)]


def sample_z_combinations(grasp, z, k=None, rng=None):
    """
    k различных подзахватов из C(n, z), без возвращения.

    Raises:
        InvalidZ, InvalidK
    """
    k = get_setting('Z_COMBINATIONS') if k is None else int(k)
    if not 3 <= z <= grasp.n:
        raise InvalidZ(f"z = {z} вне [3, {grasp.n}]")
    combos = list(itertools.combinations(range(grasp.n), z))
    if not 1 <= k <= len(combos):
        raise InvalidK(f"k = {k}, а комбинаций C({grasp.n}, {z}) = {len(combos)}")
    if k == len(combos):
        chosen = range(len(combos))
    else:
        chosen = sorted(rng.choice(len(combos), size=k, replace=False))
    return [grasp.subset(combos[i]) for i in chosen]


def _object_rows(job):
    """Строки одного объекта: (contacts, shape, sigma, seed, label, start, count)."""
    contacts, shape, sigma, seed, label, start, count = job
    rows = np.empty((count, shape.width))
    stream = stream_id(STREAM_DATASET, label)
    for offset in range(count):
        rng = derive_rng(seed, stream=stream, index=start + offset)
        _, vector = _retrying(
            contacts, shape.n, shape.with_normals, rng,
            accept=lambda grasp: vectorize(grasp, shape),
            sigma=sigma,
        )
        rows[offset] = vector.values
    return rows


def _chunks(N, workers):
    size = max(1, math.ceil(N / max(1, workers)))
    return [(start, min(size, N - start)) for start in range(0, N, size)]


def generate_dataset(objects, n, N, with_normals=True, normalize=True, sigma=0.0, seed=None,
                     workers=None, class_names=None):
    """
    N параметризованных захватов на каждый объект с метками классов.

    Каждый образец получает свой генератор (seed, объект, номер образца),
    поэтому результат не зависит от числа воркеров.

    Args:
        objects: список ContactCandidateSet, по одному на класс
        sigma: СКО гауссова шума на положениях контактов (до параметризации)
        normalize: нормировка масштаба (инвариантность к размеру объекта)
    """
    if seed is None:
        raise ValueError("generate_dataset требует явный seed")
    if n == 2 and normalize:
        raise NotApplicable("Двухпальцевые векторы не нормируются")
    shape = VectorShape(n, with_normals and n > 2, normalize)
    names = tuple(class_names or (c.source_mesh for c in objects))
    workers = get_setting('WORKERS') if workers is None else workers

    for contacts in objects:
        if len(contacts) < n:
            raise TooFewCandidates(f"{contacts}: кандидатов {len(contacts)} < n = {n}")

    blocks, labels = [], []
    for label, contacts in enumerate(objects):
        started = time.perf_counter()
        jobs = [(contacts, shape, sigma, seed, label, start, count) for start, count in _chunks(N, workers)]
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                parts = list(executor.map(_object_rows, jobs))
        else:
            parts = [_object_rows(job) for job in jobs]
        blocks.append(np.vstack(parts) if parts else np.empty((0, shape.width)))
        labels.append(np.full(N, label, dtype=np.int64))
        logger.info(
            f"Объект '{names[label]}': {N} захватов за {time.perf_counter() - started:.2f} с"
        )

    dataset = LabeledDataset(
        vectors=np.vstack(blocks),
        labels=np.concatenate(labels),
        class_names=names,
        shape=shape,
        sigma=float(sigma),
        seed=int(seed),
    )
    logger.info(f"Сгенерирован {dataset}")
    return dataset


def split_validation(dataset, fraction=None, seed=None):
    """
    Детерминированное разбиение на обучающую и проверочную части.

    Из каждого класса в проверку уходит round(fraction * N_class) строк.
    """
    fraction = get_setting('VALIDATION_FRACTION') if fraction is None else float(fraction)
    if not 0 <= fraction < 1:
        raise ValueError(f"Доля проверки должна лежать в [0, 1): {fraction}")
    seed = dataset.seed if seed is None else seed
    rng = derive_rng(seed, stream=STREAM_SPLIT)
    train, validation = [], []
    for label in range(dataset.m):
        rows = np.flatnonzero(dataset.labels == label)
        rows = rows[rng.permutation(len(rows))]
        held = int(round(fraction * len(rows)))
        validation.append(np.sort(rows[:held]))
        train.append(np.sort(rows[held:]))
    return dataset.subset(np.concatenate(train)), dataset.subset(np.concatenate(validation))
