# mesh_io/loaders.py
import io
import logging
from pathlib import Path

import numpy as np
import trimesh

from graspid.conf import get_setting
from .exceptions import ParseError, EmptyMesh
from .models import MeshFormat, TriangleMesh

logger = logging.getLogger('mesh_io')


def _is_oriented(tm):
    return bool(tm.is_watertight and tm.is_winding_consistent and tm.volume > 0)


def from_trimesh(tm, name, drop_degenerate=True):
    """
    Преобразует trimesh.Trimesh в TriangleMesh.

    Вырожденные грани (площадь не больше MIN_FACE_AREA) отбрасываются.
    Замкнутая сетка, вывернутая наизнанку, переориентируется наружу.
    """
    if drop_degenerate and len(tm.faces):
        keep = tm.area_faces > get_setting('MIN_FACE_AREA')
        dropped = int((~keep).sum())
        if dropped:
            logger.info(f"Сетка '{name}': отброшено вырожденных граней: {dropped}")
            tm = trimesh.Trimesh(vertices=tm.vertices, faces=tm.faces[keep], process=False)
            tm.remove_unreferenced_vertices()

    if len(tm.faces) == 0:
        raise EmptyMesh(f"Сетка '{name}' не содержит допустимых граней")

    if tm.is_watertight and tm.is_winding_consistent and tm.volume < 0:
        tm = tm.copy()
        tm.invert()
        logger.info(f"Сетка '{name}' была вывернута, ориентация исправлена")

    return TriangleMesh(
        vertices=np.asarray(tm.vertices),
        faces=np.asarray(tm.faces),
        name=name,
        oriented=_is_oriented(tm),
    )


def load_mesh(data, format, name="mesh"):
    """
    Загружает сетку из байтового потока в формате OBJ, STL (ASCII/binary) или OFF.

    Args:
        data: содержимое файла (bytes)
        format: MeshFormat или строка 'obj' / 'stl' / 'off'
        name: идентификатор объекта

    Returns:
        TriangleMesh без вырожденных граней

    Raises:
        ParseError: файл повреждён
        EmptyMesh: нет ни одной допустимой грани
    """
    fmt = MeshFormat(format)
    try:
        tm = trimesh.load_mesh(io.BytesIO(data), file_type=fmt.value, process=False)
    except Exception as e:
        raise ParseError(f"Не удалось разобрать {fmt.value.upper()} '{name}': {e}") from e

    if isinstance(tm, trimesh.Scene):
        geometries = [g for g in tm.geometry.values() if isinstance(g, trimesh.Trimesh)]
        if not geometries:
            raise EmptyMesh(f"Сетка '{name}' не содержит треугольников")
        tm = trimesh.util.concatenate(geometries)
    if not isinstance(tm, trimesh.Trimesh):
        raise ParseError(f"Файл '{name}' не является треугольной сеткой")

    if fmt is MeshFormat.STL:
        # STL хранит каждую грань с собственными вершинами; без слияния сетка не замкнута
        tm.merge_vertices()

    faces = np.asarray(tm.faces)
    if faces.size and (faces.min() < 0 or faces.max() >= len(tm.vertices)):
        raise ParseError(f"Сетка '{name}': индекс грани вне диапазона вершин")

    mesh = from_trimesh(tm, name)
    logger.debug(f"Загружена сетка {mesh}")
    return mesh


def load_mesh_file(path, name=None):
    """Загружает сетку с диска; формат определяется по расширению."""
    path = Path(path)
    return load_mesh(path.read_bytes(), MeshFormat.from_path(path), name=name or path.stem)


def export_mesh(mesh, path):
    """Сохраняет сетку в OBJ / STL / OFF по расширению файла."""
    path = Path(path)
    fmt = MeshFormat.from_path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mesh.to_trimesh().export(str(path), file_type=fmt.value)
    logger.info(f"Сетка '{mesh.name}' сохранена в {path}")
    return path
