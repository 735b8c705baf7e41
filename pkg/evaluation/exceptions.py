# evaluation/exceptions.py
from graspid.exceptions import GraspIdError, MetadataMismatch


class NotNormalizedModel(GraspIdError):
    """Опыты с масштабированием требуют модель на нормированных векторах."""


class DegenerateVariance(GraspIdError):
    """У одной из величин нет разброса: ранговая корреляция не определена."""


class ConfigMismatch(MetadataMismatch):
    """Настройки опытов не согласованы с моделью (n, нормали, классы)."""
