# recognition/models.py
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import softmax

logger = logging.getLogger('recognition')

# Пометки записей трассы
FLAG_ALL_ZERO = "all_zero_likelihood"
FLAG_PRIOR = "prior"
FLAG_DEGENERATE = "degenerate_combination"
FLAG_EXHAUSTED = "sampler_exhausted"


class IcMode(str, Enum):
    ARGMAX_ONLY = "argmax_only"          # s_i += p_i только для i = argmax p
    FULL_ACCUMULATE = "full_accumulate"  # s += p


class PriorSource(str, Enum):
    NP = "np"  # равномерный 1/m
    IP = "ip"  # предсказание вспомогательного классификатора по первому захвату


class Method(str, Enum):
    IC = "ic"
    IC_FULL = "ic_full"
    BC_NP = "bc_np"
    BC_IP = "bc_ip"

    @property
    def bayesian(self):
        return self in (Method.BC_NP, Method.BC_IP)

    @property
    def ic_mode(self):
        return IcMode.FULL_ACCUMULATE if self is Method.IC_FULL else IcMode.ARGMAX_ONLY

    @property
    def prior(self):
        return PriorSource.IP if self is Method.BC_IP else PriorSource.NP


@dataclass(frozen=True)
class UpdateStatus:
    """Итог одного обновления: сошлось ли и текущий лидер."""
    converged: bool
    predicted: int
    certainty: float


@dataclass(frozen=True, eq=False)
class TraceRecord:
    """
    Одна запись трассы: номер обновления, номер физического захвата, z,
    наблюдение (p для IC, логарифмы правдоподобий для BC) и состояние после него.
    """
    iteration: int
    grasp: int
    z: int
    observation: Tuple[float, ...]
    state: Tuple[float, ...]
    predicted: int
    certainty: float
    converged: bool
    flag: Optional[str] = None


def _check_threshold(threshold):
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"Порог должен лежать в [0, 1]: {threshold}")
    return float(threshold)


@dataclass(eq=False)
class IcSession:
    """
    Состояние итеративной классификации: накопленные баллы s и порог.

    Сессия принадлежит одному владельцу и не разделяется между потоками.
    """
    m: int
    threshold: float
    mode: IcMode = IcMode.ARGMAX_ONLY
    scores: np.ndarray = None
    iteration: int = 0
    trace: List[TraceRecord] = field(default_factory=list)

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"Распознавание требует m >= 2 классов, получено {self.m}")
        self.threshold = _check_threshold(self.threshold)
        self.mode = IcMode(self.mode)
        if self.scores is None:
            self.scores = np.zeros(self.m)

    @property
    def leader(self):
        return int(np.argmax(self.scores))

    @property
    def normalized(self):
        """s / sum(s); до первого обновления - нули."""
        total = self.scores.sum()
        return self.scores / total if total > 0 else np.zeros(self.m)

    @property
    def certainty(self):
        """ŝ_max: на первой итерации s_o без нормировки, далее s_o / sum(s)."""
        if self.iteration == 0:
            return 0.0
        if self.iteration == 1:
            return float(self.scores[self.leader])
        return float(self.normalized[self.leader])

    def state(self):
        return self.scores.copy()


@dataclass(eq=False)
class BcSession:
    """
    Байесовское распознавание: апостериорное распределение хранится
    в виде логарифмов (ненормированных), нормируется при чтении.
    """
    m: int
    threshold: float
    prior_source: PriorSource = PriorSource.NP
    log_posterior: np.ndarray = None
    iteration: int = 0
    skipped: int = 0
    trace: List[TraceRecord] = field(default_factory=list)

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"Распознавание требует m >= 2 классов, получено {self.m}")
        self.threshold = _check_threshold(self.threshold)
        self.prior_source = PriorSource(self.prior_source)
        if self.log_posterior is None:
            self.log_posterior = np.full(self.m, -np.log(self.m))

    def set_prior(self, probs):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.shape != (self.m,) or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"Априорное распределение должно быть симплексом длины {self.m}")
        with np.errstate(divide='ignore'):
            self.log_posterior = np.log(probs)

    @property
    def posterior(self):
        return softmax(self.log_posterior)

    @property
    def leader(self):
        return int(np.argmax(self.log_posterior))

    @property
    def certainty(self):
        return float(self.posterior[self.leader])

    def state(self):
        return self.posterior


@dataclass(frozen=True, eq=False)
class RecognitionResult:
    """
    Итог распознавания. physical_grasps - число физических захватов
    (включая захват для априорного распределения IP), updates - число
    обновлений сессии (для z-вариантов больше числа захватов).
    """
    predicted: int
    class_name: str
    method: Method
    threshold: float
    converged: bool
    certainty: float
    physical_grasps: int
    updates: int
    state: Tuple[float, ...]
    trace: Tuple[TraceRecord, ...] = ()
    skipped_updates: int = 0
    sampler_exhausted: bool = False
    prior: Optional[Tuple[float, ...]] = None
    class_names: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.physical_grasps < 1:
            raise ValueError("Распознавание использует хотя бы один захват")
        if self.converged and not self.certainty > self.threshold:
            raise ValueError(f"Сходимость при уверенности {self.certainty} <= {self.threshold}")

    def prediction_after(self, grasps):
        """Лидер после первых `grasps` физических захватов (для кривых без порога)."""
        predicted = self.predicted
        for record in self.trace:
            if record.grasp >= grasps:
                break
            predicted = record.predicted
        return predicted

    def __str__(self):
        status = "сошлось" if self.converged else "не сошлось"
        return (
            f"{self.method.value}: '{self.class_name}' ({status}, уверенность {self.certainty:.3f}, "
            f"захватов {self.physical_grasps}, обновлений {self.updates})"
        )
