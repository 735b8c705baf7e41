# recognition/exceptions.py
from graspid.exceptions import GraspIdError


class SamplerExhausted(GraspIdError):
    """Источник захватов закончился раньше, чем распознавание смогло начаться."""


class MissingModelForZ(GraspIdError):
    """Для числа пальцев z, выпавшего из политики, нет обученной модели."""
