# evaluation/geometry.py
"""
Распознавание формы по семействам примитивов: каждое семейство - набор
неравномерно растянутых вариаций базового примитива; модель учится на
нормированных захватах, собранных со всех вариаций семейства.
"""
import logging
from dataclasses import replace

import numpy as np

from graspid.exceptions import GraspIdError
from graspid.rng import derive_rng, stream_id
from mesh_io.contacts import mesh_to_contacts
from mesh_io.models import PrimitiveKind
from mesh_io.utils import generate_primitive, scale_mesh
from recognition.models import Method
from recognition.runner import STREAM_QUERY, recognize
from recognition.samplers import ContactSampler
from sampling.models import LabeledDataset
from sampling.sampler import generate_dataset

logger = logging.getLogger('evaluation')

STREAM_VARIATIONS = 9

# Базовые примитивы семейств: единичный куб, шар диаметра 1, цилиндр 1 x 1
PRIMITIVE_FAMILIES = {
    'box': (PrimitiveKind.BOX, (1.0, 1.0, 1.0)),
    'ellipsoid': (PrimitiveKind.SPHERE, (0.5,)),
    'cylinder': (PrimitiveKind.CYLINDER, (0.5, 1.0)),
}

DEFAULT_VARIATION_RANGE = (0.5, 1.5)


def _family(name):
    if name not in PRIMITIVE_FAMILIES:
        raise ValueError(f"Неизвестное семейство '{name}', доступны: {sorted(PRIMITIVE_FAMILIES)}")
    return list(PRIMITIVE_FAMILIES).index(name)


def variation_factors(family, count, variation_range=DEFAULT_VARIATION_RANGE, seed=0):
    """Множители (sx, sy, sz) для `count` вариаций, каждый равномерно из диапазона."""
    lo, hi = variation_range
    if not 0 < lo <= hi:
        raise ValueError(f"Диапазон растяжения должен быть 0 < min <= max: {variation_range}")
    stream = stream_id(STREAM_VARIATIONS, _family(family))
    return np.array([derive_rng(seed, stream, i).uniform(lo, hi, size=3) for i in range(count)])


def primitive_variations(family, count, variation_range=DEFAULT_VARIATION_RANGE, seed=0, resolution=None):
    """Сетки `count` вариаций семейства; имя вариации - '<семейство>_<номер>'."""
    if count < 1:
        raise ValueError(f"Число вариаций должно быть >= 1: {count}")
    factors = variation_factors(family, count, variation_range, seed)
    kind, dims = PRIMITIVE_FAMILIES[family]
    base = generate_primitive(kind, dims, resolution=resolution, name=family)
    meshes = [
        replace(scale_mesh(base, *scale), name=f"{family}_{i:03d}")
        for i, scale in enumerate(factors)
    ]
    logger.info(f"Семейство '{family}': {count} вариаций, растяжение {tuple(variation_range)}")
    return meshes


def family_dataset(variations, n, samples_per_variation, seed, with_normals=True, sigma=0.0, workers=None):
    """
    Нормированные захваты со всех вариаций, размеченные семейством.

    Args:
        variations: {семейство: [сетки вариаций]} в порядке классов
    """
    contact_sets, owners, names = [], [], []
    for label, (family, meshes) in enumerate(variations.items()):
        for mesh in meshes:
            contact_sets.append(mesh_to_contacts(mesh))
            owners.append(label)
            names.append(mesh.name)
    pooled = generate_dataset(
        contact_sets, n, samples_per_variation,
        with_normals=with_normals, normalize=True, sigma=sigma, seed=seed,
        workers=workers, class_names=names,
    )
    dataset = LabeledDataset(
        vectors=pooled.vectors,
        labels=np.asarray(owners, dtype=np.int64)[pooled.labels],
        class_names=tuple(variations),
        shape=pooled.shape,
        sigma=pooled.sigma,
        seed=pooled.seed,
    )
    logger.info(f"Датасет семейств: {dataset}")
    return dataset


def geometry_recognition(model, queries, trials=10, method=Method.BC_NP, threshold=None,
                         max_iterations=None, seed=0, auxiliary=None, with_normals=True, sigma=0.0):
    """
    Таблица долей ответов по семействам для каждой сетки-запроса.

    Опыт, в котором запрос не даёт невырожденных захватов, считается в
    'failed', таблица строится всё равно.

    Returns:
        [{'query': имя, 'trials': T, 'failed': F, 'rates': {семейство: %}, 'predicted': семейство}, ...]
    """
    if not model.shape.normalized:
        raise ValueError(f"Распознавание формы требует нормированную модель: {model}")
    method = Method(method)
    rows = []
    for index, mesh in enumerate(queries):
        contacts = mesh_to_contacts(mesh)
        counts = np.zeros(model.m, dtype=np.int64)
        failed = 0
        for trial in range(trials):
            sampler = ContactSampler(
                contacts,
                n=model.shape.n,
                seed=seed,
                stream=stream_id(STREAM_QUERY, STREAM_VARIATIONS, index, trial),
                with_normals=with_normals,
                sigma=sigma,
            )
            try:
                result = recognize(
                    method, sampler,
                    model=model,
                    threshold=threshold,
                    max_iterations=max_iterations,
                    auxiliary=auxiliary,
                )
            except GraspIdError as e:
                logger.warning(f"Запрос '{mesh.name}', опыт {trial}: {e}")
                failed += 1
                continue
            counts[result.predicted] += 1
        done = max(1, trials - failed)
        rates = {name: 100.0 * float(counts[label]) / done for label, name in enumerate(model.class_names)}
        predicted = model.class_names[int(np.argmax(counts))] if counts.any() else None
        rows.append({
            'query': mesh.name,
            'trials': trials,
            'failed': failed,
            'rates': rates,
            'predicted': predicted,
        })
        logger.info(f"Запрос '{mesh.name}': {predicted} ({rates.get(predicted, 0.0):.0f}%)")
    return rows
