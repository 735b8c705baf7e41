# grasp_param/exceptions.py
from graspid.exceptions import GraspIdError


class DegenerateGrasp(GraspIdError):
    """Контакты коллинеарны / компланарны или часть точек лежит внутри оболочки."""


class NonConvexUnsupported(GraspIdError):
    """Плоский захват не в выпуклом положении: вогнутые многоугольники не поддерживаются."""


class NotApplicable(GraspIdError):
    """Нормировка масштаба неприменима (уже нормирован или n = 2)."""


class InfeasibleVector(GraspIdError):
    """Вектор не соответствует ни одному допустимому захвату."""


class ShapeMismatch(GraspIdError):
    """Векторы (или вектор и модель) имеют разную форму метаданных."""
