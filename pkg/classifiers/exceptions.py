# classifiers/exceptions.py
from graspid.exceptions import GraspIdError


class DivergenceDetected(GraspIdError):
    """Функция потерь при обучении стала нечисловой."""


class EmptyClass(GraspIdError):
    """В выборке нет ни одного примера некоторого класса."""


class ModelFormatError(GraspIdError):
    """Файл модели повреждён или имеет неизвестную версию."""
