# mesh_io/utils.py - объём, площадь, масштабирование и примитивы
import logging

import numpy as np
import trimesh

from graspid.conf import get_setting
from .exceptions import InvalidDims, NotOriented
from .loaders import from_trimesh
from .models import PrimitiveKind, TriangleMesh

logger = logging.getLogger('mesh_io')

# Число размеров для каждого примитива
PRIMITIVE_DIMS = {
    PrimitiveKind.BOX: ("x", "y", "z"),
    PrimitiveKind.SPHERE: ("radius",),
    PrimitiveKind.CYLINDER: ("radius", "height"),
}


def mesh_volume(mesh):
    """
    Объём замкнутой сетки: сумма знаковых тетраэдров относительно начала координат.

    Raises:
        NotOriented: сетка не замкнута или ориентирована несогласованно
    """
    if not mesh.oriented:
        raise NotOriented(f"Сетка '{mesh.name}' не ориентирована, объём не определён")
    tri = mesh.vertices[mesh.faces]
    signed = np.einsum('ij,ij->i', tri[:, 0], np.cross(tri[:, 1], tri[:, 2]))
    return float(signed.sum() / 6.0)


def mesh_surface_area(mesh):
    """Площадь поверхности: сумма площадей граней."""
    tri = mesh.vertices[mesh.faces]
    cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    return float(0.5 * np.linalg.norm(cross, axis=1).sum())


def scale_mesh(mesh, sx, sy, sz):
    """
    Неравномерное масштабирование вдоль главных осей.

    Связность граней не меняется; положительные множители сохраняют ориентацию.
    """
    factors = np.array([sx, sy, sz], dtype=np.float64)
    if np.any(factors <= 0):
        raise InvalidDims(f"Множители масштаба должны быть положительными: {factors.tolist()}")
    return TriangleMesh(
        vertices=mesh.vertices * factors,
        faces=mesh.faces,
        name=mesh.name,
        oriented=mesh.oriented,
    )


def generate_primitive(kind, dims, resolution=None, name=None):
    """
    Строит замкнутую, ориентированную наружу сетку примитива с центром в начале координат.

    Args:
        kind: PrimitiveKind (BOX, SPHERE, CYLINDER)
        dims: BOX - (x, y, z); SPHERE - (radius,); CYLINDER - (radius, height)
        resolution: SPHERE - число подразбиений икосферы,
                    CYLINDER - число секторов (не меньше MIN_SEGMENTS); для BOX игнорируется

    Raises:
        InvalidDims: неверное число или знак размеров, слишком грубая тесселяция
    """
    kind = PrimitiveKind(kind)
    dims = np.atleast_1d(np.asarray(dims, dtype=np.float64))
    expected = PRIMITIVE_DIMS[kind]
    if len(dims) != len(expected):
        raise InvalidDims(f"{kind.value}: ожидаются размеры {expected}, получено {dims.tolist()}")
    if np.any(~np.isfinite(dims)) or np.any(dims <= 0):
        raise InvalidDims(f"{kind.value}: размеры должны быть положительными: {dims.tolist()}")

    if kind is PrimitiveKind.BOX:
        tm = trimesh.creation.box(extents=dims)
    elif kind is PrimitiveKind.SPHERE:
        subdivisions = get_setting('SPHERE_SUBDIVISIONS') if resolution is None else int(resolution)
        if subdivisions < 1:
            raise InvalidDims(f"sphere: число подразбиений должно быть >= 1, получено {subdivisions}")
        tm = trimesh.creation.icosphere(subdivisions=subdivisions, radius=dims[0])
    else:
        sections = get_setting('CYLINDER_SECTIONS') if resolution is None else int(resolution)
        if sections < get_setting('MIN_SEGMENTS'):
            raise InvalidDims(
                f"cylinder: секторов должно быть >= {get_setting('MIN_SEGMENTS')}, получено {sections}"
            )
        tm = trimesh.creation.cylinder(radius=dims[0], height=dims[1], sections=sections)

    mesh = from_trimesh(tm, name or kind.value)
    logger.debug(f"Сгенерирован примитив {mesh}")
    return mesh
