# mesh_io/exceptions.py
from graspid.exceptions import GraspIdError


class ParseError(GraspIdError):
    """Файл сетки повреждён или не соответствует заявленному формату."""


class EmptyMesh(GraspIdError):
    """После очистки в сетке не осталось ни одной грани."""


class OrientationUnknown(GraspIdError):
    """Невозможно определить, куда смотрит внутренняя нормаль грани."""


class InvalidDims(GraspIdError):
    """Недопустимые размеры или разрешение примитива."""


class NotOriented(GraspIdError):
    """Объём не определён: сетка не замкнута или ориентирована несогласованно."""
