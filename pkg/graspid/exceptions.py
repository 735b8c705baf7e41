# graspid/exceptions.py


class GraspIdError(ValueError):
    """Базовая ошибка предметной области: нарушение входных данных или инварианта."""


class MetadataMismatch(GraspIdError):
    """Артефакты (датасет, модель, конфиг) не согласованы по n / нормалям / нормировке."""
