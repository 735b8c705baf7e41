# classifiers/models.py
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from grasp_param.models import VectorShape

logger = logging.getLogger('classifiers')


class ClassifierKind(str, Enum):
    KDE = "kde"
    KNN = "knn"
    MLP = "mlp"


def _frozen(array, dtype=np.float64):
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ClassDistribution:
    """
    Распределение вероятностей по m классам.

    `uniform_fallback` помечает равномерный ответ, выданный вместо
    неопределённого (все правдоподобия ушли в машинный ноль).
    """
    probs: np.ndarray
    uniform_fallback: bool = False

    def __post_init__(self):
        probs = _frozen(self.probs).ravel()
        if len(probs) < 2:
            raise ValueError(f"Распределение требует m >= 2 классов, получено {len(probs)}")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("Вероятности должны быть конечными и неотрицательными")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"Сумма вероятностей {probs.sum()} != 1")
        object.__setattr__(self, 'probs', probs)

    @classmethod
    def uniform(cls, m, fallback=False):
        return cls(np.full(m, 1.0 / m), uniform_fallback=fallback)

    @classmethod
    def one_hot(cls, m, index):
        probs = np.zeros(m)
        probs[index] = 1.0
        return cls(probs)

    @property
    def m(self):
        return len(self.probs)

    @property
    def argmax(self):
        # np.argmax берёт наименьший индекс среди равных
        return int(np.argmax(self.probs))

    @property
    def max(self):
        return float(self.probs[self.argmax])

    def __str__(self):
        return "(" + ", ".join(f"{p:.3f}" for p in self.probs) + ")"


@dataclass(frozen=True, eq=False)
class KdeModel:
    """
    Ядерная оценка плотности с гауссовым ядром: обучающие векторы каждого
    класса и общая ширина окна sigma.
    """
    vectors: np.ndarray
    labels: np.ndarray
    bandwidth: float
    shape: VectorShape
    class_names: Tuple[str, ...]
    kind: ClassifierKind = field(default=ClassifierKind.KDE, init=False)

    def __post_init__(self):
        _check_training(self)
        if not np.isfinite(self.bandwidth) or self.bandwidth <= 0:
            raise ValueError(f"Ширина окна должна быть положительной: {self.bandwidth}")
        object.__setattr__(self, 'bandwidth', float(self.bandwidth))

    @property
    def m(self):
        return len(self.class_names)

    def class_vectors(self, label):
        return self.vectors[self.labels == label]

    def __str__(self):
        return f"KDE (sigma = {self.bandwidth:.4g}, M = {len(self.labels)}, {self.shape})"


@dataclass(frozen=True, eq=False)
class KnnModel:
    vectors: np.ndarray
    labels: np.ndarray
    k: int
    shape: VectorShape
    class_names: Tuple[str, ...]
    epsilon: float = 1e-12
    kind: ClassifierKind = field(default=ClassifierKind.KNN, init=False)

    def __post_init__(self):
        _check_training(self)
        if not 1 <= int(self.k) <= len(self.labels):
            raise ValueError(f"k = {self.k} вне [1, {len(self.labels)}]")
        object.__setattr__(self, 'k', int(self.k))

    @property
    def m(self):
        return len(self.class_names)

    def __str__(self):
        return f"kNN (k = {self.k}, M = {len(self.labels)}, {self.shape})"


@dataclass(frozen=True, eq=False)
class MlpModel:
    """
    Многослойный перцептрон: ReLU на скрытых слоях, softmax на выходе.

    Входы стандартизуются по `input_mean` / `input_scale`, сохранённым при обучении.
    """
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]
    input_mean: np.ndarray
    input_scale: np.ndarray
    shape: VectorShape
    class_names: Tuple[str, ...]
    loss_history: Tuple[float, ...] = ()
    kind: ClassifierKind = field(default=ClassifierKind.MLP, init=False)

    def __post_init__(self):
        weights = tuple(_frozen(w) for w in self.weights)
        biases = tuple(_frozen(b).ravel() for b in self.biases)
        if len(weights) != len(biases) or not weights:
            raise ValueError("Число матриц весов и векторов смещений не совпадает")
        for w, b in zip(weights, biases):
            if w.ndim != 2 or w.shape[1] != len(b):
                raise ValueError(f"Слой {w.shape} не согласован со смещением {b.shape}")
        for prev, nxt in zip(weights, weights[1:]):
            if prev.shape[1] != nxt.shape[0]:
                raise ValueError("Размеры соседних слоёв не согласованы")
        if weights[0].shape[0] != self.shape.width:
            raise ValueError(f"Вход сети {weights[0].shape[0]} != w = {self.shape.width}")
        if weights[-1].shape[1] != len(self.class_names):
            raise ValueError(f"Выход сети {weights[-1].shape[1]} != m = {len(self.class_names)}")
        if not all(np.all(np.isfinite(a)) for a in weights + biases):
            raise ValueError("Параметры сети должны быть конечными")
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'biases', biases)
        object.__setattr__(self, 'input_mean', _frozen(self.input_mean).ravel())
        object.__setattr__(self, 'input_scale', _frozen(self.input_scale).ravel())
        object.__setattr__(self, 'class_names', tuple(self.class_names))
        object.__setattr__(self, 'loss_history', tuple(float(x) for x in self.loss_history))

    @property
    def m(self):
        return len(self.class_names)

    @property
    def layer_sizes(self):
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def __str__(self):
        return f"MLP {'-'.join(map(str, self.layer_sizes))} ({self.shape})"


def _check_training(model):
    vectors = _frozen(model.vectors)
    labels = _frozen(model.labels, np.int64).ravel()
    names = tuple(model.class_names)
    if vectors.ndim != 2 or vectors.shape[1] != model.shape.width:
        raise ValueError(f"Ожидается матрица (M, {model.shape.width}), получено {vectors.shape}")
    if len(labels) != len(vectors):
        raise ValueError("Число меток не совпадает с числом векторов")
    counts = np.bincount(labels, minlength=len(names)) if labels.size else np.zeros(len(names), int)
    if len(counts) != len(names) or np.any(counts == 0):
        raise ValueError(f"У каждого из {len(names)} классов должен быть хотя бы один вектор: {counts.tolist()}")
    object.__setattr__(model, 'vectors', vectors)
    object.__setattr__(model, 'labels', labels)
    object.__setattr__(model, 'class_names', names)


@dataclass(frozen=True, eq=False)
class SufficiencyReport:
    """
    Матрица ошибок (строка - истинный класс) и проверка достаточности:
    класс i удовлетворяет условию, если P(l=i|O_i) строго больше любой P(l=j|O_i).
    """
    confusion: np.ndarray
    class_names: Tuple[str, ...]
    counts: np.ndarray
    mean_pmax: Optional[np.ndarray] = None

    def __post_init__(self):
        confusion = _frozen(self.confusion)
        if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1]:
            raise ValueError(f"Матрица ошибок должна быть квадратной: {confusion.shape}")
        if np.max(np.abs(confusion.sum(axis=1) - 1.0)) > 1e-9:
            raise ValueError("Строки матрицы ошибок должны суммироваться в 1")
        object.__setattr__(self, 'confusion', confusion)
        object.__setattr__(self, 'counts', _frozen(self.counts, np.int64))
        object.__setattr__(self, 'class_names', tuple(self.class_names))
        if self.mean_pmax is not None:
            object.__setattr__(self, 'mean_pmax', _frozen(self.mean_pmax))

    @property
    def m(self):
        return len(self.confusion)

    @property
    def satisfied(self):
        """Флаги классов, для которых диагональ строго доминирует в строке."""
        diag = np.diag(self.confusion)
        off = self.confusion.copy()
        np.fill_diagonal(off, -np.inf)
        return diag > off.max(axis=1)

    @property
    def m_p(self):
        return int(self.satisfied.sum())

    @property
    def sufficient(self):
        return self.m_p == self.m

    @property
    def eta(self):
        """Верхняя граница успешности итеративного распознавания, %."""
        return 100.0 * self.m_p / self.m

    @property
    def accuracy(self):
        """Доля верных ответов по всей выборке."""
        return float(np.dot(np.diag(self.confusion), self.counts) / self.counts.sum())

    def as_dict(self):
        return {
            'class_names': list(self.class_names),
            'confusion': self.confusion.tolist(),
            'counts': self.counts.tolist(),
            'satisfied': self.satisfied.tolist(),
            'm_p': self.m_p,
            'eta': self.eta,
            'sufficient': self.sufficient,
            'accuracy': self.accuracy,
        }
