# evaluation/models.py
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from graspid.conf import get_setting
from recognition.models import Method
from sampling.models import IncompleteGraspPolicy

logger = logging.getLogger('evaluation')


@dataclass(frozen=True, eq=False)
class TrialConfig:
    """
    Протокол опытов распознавания: объекты-запросы (наборы контактов в
    порядке классов), метод, порог, число опытов на объект и сид.
    """
    objects: Tuple
    class_names: Tuple[str, ...]
    n: int
    with_normals: bool = True
    method: Method = Method.BC_NP
    threshold: float = field(default_factory=lambda: get_setting('THRESHOLD'))
    max_iterations: int = field(default_factory=lambda: get_setting('MAX_ITERATIONS'))
    trials: int = field(default_factory=lambda: get_setting('TRIALS_PER_OBJECT'))
    seed: int = 0
    sigma: float = 0.0
    scale_range: Optional[Tuple[float, float]] = None
    z: Optional[int] = None
    k: Optional[int] = None
    policy: Optional[IncompleteGraspPolicy] = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'method', Method(self.method))
        object.__setattr__(self, 'objects', tuple(self.objects))
        object.__setattr__(self, 'class_names', tuple(self.class_names))
        if self.trials < 1:
            raise ValueError(f"Число опытов должно быть >= 1: {self.trials}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"Порог должен лежать в [0, 1]: {self.threshold}")
        if len(self.objects) != len(self.class_names):
            raise ValueError(f"Объектов {len(self.objects)}, имён классов {len(self.class_names)}")
        if self.scale_range is not None:
            lo, hi = self.scale_range
            if not 0 < lo <= hi:
                raise ValueError(f"Диапазон масштабов должен быть 0 < min <= max: {self.scale_range}")

    @classmethod
    def from_run_config(cls, config, method=None, contact_sets=None):
        recognition, evaluation = config.recognition, config.evaluation
        return cls(
            objects=contact_sets if contact_sets is not None else config.contact_sets(),
            class_names=config.class_names,
            n=config.grasp['n'],
            with_normals=config.grasp['with_normals'],
            method=method or recognition['method'],
            threshold=recognition['threshold'],
            max_iterations=recognition['max_iterations'],
            trials=evaluation['trials'],
            seed=config.seed,
            sigma=recognition['sigma'],
            z=recognition['z'],
            k=recognition['combinations'],
            policy=recognition['policy'],
            workers=config.workers,
        )

    def as_dict(self):
        return {
            'class_names': list(self.class_names),
            'n': self.n,
            'with_normals': self.with_normals,
            'method': self.method.value,
            'threshold': self.threshold,
            'max_iterations': self.max_iterations,
            'trials': self.trials,
            'seed': self.seed,
            'sigma': self.sigma,
            'scale_range': list(self.scale_range) if self.scale_range else None,
            'z': self.z,
            'k': self.k,
            'policy': self.policy.as_dict() if self.policy else None,
        }


@dataclass(frozen=True)
class TrialRecord:
    object: str
    label: int
    trial: int
    method: str
    converged: bool
    physical_grasps: int
    updates: int
    predicted: int
    predicted_name: str
    certainty: float
    scale: float = 1.0
    skipped_updates: int = 0

    @property
    def correct(self):
        return self.predicted == self.label

    def as_row(self):
        return {
            'object': self.object,
            'trial': self.trial,
            'method': self.method,
            'converged': int(self.converged),
            'samples': self.physical_grasps,
            'updates': self.updates,
            'predicted': self.predicted_name,
            'correct': int(self.correct),
            'certainty': f"{self.certainty:.6f}",
            'scale': f"{self.scale:.6f}",
        }


def _stats(values):
    if not values:
        return {'count': 0, 'mean': None, 'std': None}
    values = np.asarray(values, dtype=np.float64)
    return {'count': len(values), 'mean': float(values.mean()), 'std': float(values.std())}


@dataclass(frozen=True, eq=False)
class TrialReport:
    """
    Итог серии опытов. Успех считается в двух вариантах:
    success - итоговый лидер верен (сошлось к верному классу или бюджет
    исчерпан, но argmax верен); converged_success - сошлось к верному классу.
    Статистика числа захватов считается отдельно по сошедшимся и нет.
    """
    config: TrialConfig
    records: Tuple[TrialRecord, ...]

    @property
    def class_names(self):
        return self.config.class_names

    @property
    def m(self):
        return len(self.class_names)

    def _rates(self, records):
        total = len(records)
        if total == 0:
            return {'trials': 0}
        converged = [r for r in records if r.converged]
        return {
            'trials': total,
            'success': 100.0 * sum(r.correct for r in records) / total,
            'converged_success': 100.0 * sum(r.correct and r.converged for r in records) / total,
            'converged': len(converged),
            'not_converged': total - len(converged),
            'samples_converged': _stats([r.physical_grasps for r in converged]),
            'samples_not_converged': _stats([r.physical_grasps for r in records if not r.converged]),
        }

    def per_object(self):
        return {
            name: self._rates([r for r in self.records if r.label == label])
            for label, name in enumerate(self.class_names)
        }

    def overall(self):
        return self._rates(list(self.records))

    @property
    def success_rate(self):
        return self.overall().get('success', 0.0)

    def confusion_counts(self):
        counts = np.zeros((self.m, self.m), dtype=np.int64)
        for r in self.records:
            counts[r.label, r.predicted] += 1
        return counts

    def confusion(self):
        """Строчно-стохастическая матрица итоговых ответов (строка - истинный объект)."""
        counts = self.confusion_counts().astype(np.float64)
        totals = counts.sum(axis=1, keepdims=True)
        return np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)

    def as_dict(self):
        return {
            'config': self.config.as_dict(),
            'overall': self.overall(),
            'per_object': self.per_object(),
            'confusion': self.confusion().tolist(),
        }

    def __str__(self):
        overall = self.overall()
        return (
            f"{self.config.method.value}: успех {overall.get('success', 0):.1f}% "
            f"(со сходимостью {overall.get('converged_success', 0):.1f}%) по {overall['trials']} опытам"
        )


@dataclass(frozen=True)
class GraspQuality:
    """Отношение объёмов многогранника захвата и объекта; средний угол между нормалями (рад)."""
    volume_ratio: Optional[float]
    mean_normal_angle: Optional[float] = None


@dataclass(frozen=True)
class QualitySample:
    """Пара (качество, уверенность); volume_ratio = None - у захвата нет объёма, опыт пропущен."""
    object: str
    label: int
    sample: int
    volume_ratio: Optional[float]
    mean_normal_angle: Optional[float]
    certainty: float

    @property
    def measured(self):
        return self.volume_ratio is not None

    def as_row(self):
        angle = self.mean_normal_angle
        return {
            'object': self.object,
            'sample': self.sample,
            'volume_ratio': f"{self.volume_ratio:.8f}" if self.measured else "",
            'mean_normal_angle': "" if angle is None else f"{angle:.8f}",
            'certainty': f"{self.certainty:.8f}",
        }
