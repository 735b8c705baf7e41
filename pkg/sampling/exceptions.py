# sampling/exceptions.py
from graspid.exceptions import GraspIdError


class TooFewCandidates(GraspIdError):
    """Контактных кандидатов меньше, чем пальцев в захвате."""


class PersistentDegeneracy(GraspIdError):
    """Исчерпан бюджет повторных выборок: объект даёт почти только вырожденные захваты."""


class InvalidZ(GraspIdError):
    """Число пальцев подзахвата вне [3, n]."""


class InvalidK(GraspIdError):
    """Запрошено больше комбинаций, чем существует."""


class InvalidPolicy(GraspIdError):
    """Распределение числа пальцев не нормировано или выходит за [3, n]."""
