# sampling/models.py
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from grasp_param.models import ParamVector, VectorShape
from .exceptions import InvalidPolicy

logger = logging.getLogger('sampling')


@dataclass(frozen=True)
class IncompleteGraspPolicy:
    """
    Распределение числа пальцев z, реально коснувшихся объекта.

    Захваты менее чем из трёх пальцев не рассматриваются (перевыбираются),
    поэтому носитель распределения начинается с z = 3.
    """
    probabilities: Tuple[Tuple[int, float], ...]
    name: str = "custom"

    def __post_init__(self):
        pairs = tuple(sorted((int(z), float(p)) for z, p in self.probabilities))
        if not pairs:
            raise InvalidPolicy("Пустое распределение числа пальцев")
        zs = [z for z, _ in pairs]
        if len(set(zs)) != len(zs):
            raise InvalidPolicy(f"Повторяющиеся значения z: {zs}")
        if min(zs) < 3:
            raise InvalidPolicy(f"Носитель должен начинаться не ниже z = 3: {zs}")
        if any(p < 0 for _, p in pairs):
            raise InvalidPolicy("Вероятности должны быть неотрицательными")
        total = sum(p for _, p in pairs)
        if abs(total - 1.0) > 1e-9:
            raise InvalidPolicy(f"Сумма вероятностей {total} != 1")
        object.__setattr__(self, 'probabilities', pairs)

    @classmethod
    def from_dict(cls, mapping, name="custom"):
        return cls(probabilities=tuple(mapping.items()), name=name)

    @classmethod
    def full(cls, n):
        """Вырожденная политика: всегда все n пальцев."""
        return cls(probabilities=((n, 1.0),), name=f"full{n}")

    @property
    def support(self):
        return tuple(z for z, _ in self.probabilities)

    @property
    def max_z(self):
        return max(self.support)

    def check_for(self, n):
        if self.max_z > n:
            raise InvalidPolicy(f"Политика {self.name} допускает z = {self.max_z} > n = {n}")

    def draw(self, rng):
        zs = np.array(self.support)
        ps = np.array([p for _, p in self.probabilities])
        return int(rng.choice(zs, p=ps))

    def as_dict(self):
        return {str(z): p for z, p in self.probabilities}


P4 = IncompleteGraspPolicy.from_dict({3: 0.4, 4: 0.6}, name="p4")
P5 = IncompleteGraspPolicy.from_dict({3: 0.2, 4: 0.3, 5: 0.5}, name="p5")

POLICY_PRESETS = {'p4': P4, 'p5': P5}


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """
    Размеченные векторы Q_M = {(q_i, o_i)}.

    `vectors` - матрица (M, w), `labels` - индексы классов от 0 до m-1
    в порядке `class_names`. Все строки имеют форму `shape`.
    """
    vectors: np.ndarray
    labels: np.ndarray
    class_names: Tuple[str, ...]
    shape: VectorShape
    sigma: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.float64, copy=True)
        if vectors.size == 0:
            vectors = vectors.reshape(0, self.shape.width)
        labels = np.array(self.labels, dtype=np.int64, copy=True).ravel()
        names = tuple(str(name) for name in self.class_names)
        if vectors.ndim != 2 or vectors.shape[1] != self.shape.width:
            raise ValueError(f"Ожидается матрица (M, {self.shape.width}), получено {vectors.shape}")
        if len(labels) != len(vectors):
            raise ValueError(f"Меток {len(labels)}, векторов {len(vectors)}")
        if not names:
            raise ValueError("Датасет без классов")
        if len(set(names)) != len(names):
            raise ValueError(f"Имена классов повторяются: {names}")
        if labels.size and (labels.min() < 0 or labels.max() >= len(names)):
            raise ValueError(f"Метки вне диапазона [0, {len(names) - 1}]")
        vectors.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, 'vectors', vectors)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'class_names', names)

    @property
    def M(self):
        return len(self.labels)

    @property
    def m(self):
        return len(self.class_names)

    @property
    def class_counts(self):
        return np.bincount(self.labels, minlength=self.m)

    @property
    def samples_per_class(self):
        """N, если все классы одинаково представлены, иначе None."""
        counts = self.class_counts
        return int(counts[0]) if np.all(counts == counts[0]) else None

    def of_class(self, label):
        return self.vectors[self.labels == label]

    def vector(self, index):
        shape = self.shape
        return ParamVector(
            values=self.vectors[index],
            n=shape.n,
            with_normals=shape.with_normals,
            normalized=shape.normalized,
            dimensionality=shape.dimensionality,
        )

    def subset(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            vectors=self.vectors[indices],
            labels=self.labels[indices],
            class_names=self.class_names,
            shape=self.shape,
            sigma=self.sigma,
            seed=self.seed,
        )

    def manifest(self):
        return {
            'class_names': list(self.class_names),
            **self.shape.as_dict(),
            'sigma': self.sigma,
            'seed': self.seed,
            'counts': [int(c) for c in self.class_counts],
        }

    def __str__(self):
        return f"Датасет: {self.m} классов, M = {self.M}, {self.shape}"
