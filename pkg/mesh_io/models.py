# mesh_io/models.py
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import trimesh

logger = logging.getLogger('mesh_io')


class MeshFormat(str, Enum):
    OBJ = "obj"
    STL = "stl"
    OFF = "off"

    @classmethod
    def from_path(cls, path):
        suffix = str(path).rsplit('.', 1)[-1].lower()
        try:
            return cls(suffix)
        except ValueError:
            raise ValueError(f"Неизвестный формат сетки: .{suffix}")


class PrimitiveKind(str, Enum):
    BOX = "box"
    SPHERE = "sphere"
    CYLINDER = "cylinder"


def _frozen(array, dtype):
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """
    Треугольная сетка объекта.

    `oriented` истинно только для замкнутой сетки с согласованной внешней
    ориентацией граней: объём считается лишь для таких сеток.
    """
    vertices: np.ndarray
    faces: np.ndarray
    name: str = "mesh"
    oriented: bool = False

    def __post_init__(self):
        vertices = _frozen(self.vertices, np.float64).reshape(-1, 3)
        faces = _frozen(self.faces, np.int64).reshape(-1, 3)
        if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise ValueError(f"Сетка '{self.name}': индекс грани вне диапазона вершин")
        object.__setattr__(self, 'vertices', vertices)
        object.__setattr__(self, 'faces', faces)

    @property
    def vertex_count(self):
        return len(self.vertices)

    @property
    def face_count(self):
        return len(self.faces)

    def to_trimesh(self):
        """Представление trimesh без какой-либо обработки (вершины и грани как есть)."""
        return trimesh.Trimesh(vertices=self.vertices, faces=self.faces, process=False)

    def __str__(self):
        return f"{self.name} ({self.vertex_count} вершин, {self.face_count} граней)"


@dataclass(frozen=True, eq=False)
class ContactCandidateSet:
    """
    Множество кортежей (точка, внутренняя единичная нормаль), из которого
    выбираются контакты при генерации захватов.
    """
    points: np.ndarray
    normals: np.ndarray
    source_mesh: str = "mesh"
    orientation_inferred: bool = False

    def __post_init__(self):
        points = _frozen(self.points, np.float64).reshape(-1, 3)
        normals = _frozen(self.normals, np.float64).reshape(-1, 3)
        if points.shape != normals.shape:
            raise ValueError("Число точек и нормалей не совпадает")
        norms = np.linalg.norm(normals, axis=1)
        if norms.size and np.max(np.abs(norms - 1.0)) > 1e-9:
            raise ValueError(f"Набор '{self.source_mesh}': нормали должны быть единичными")
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'normals', normals)

    def __len__(self):
        return len(self.points)

    def subset(self, indices):
        return ContactCandidateSet(
            points=self.points[indices],
            normals=self.normals[indices],
            source_mesh=self.source_mesh,
            orientation_inferred=self.orientation_inferred,
        )

    def scaled(self, factor):
        """Равномерно масштабированная копия: точки умножаются, нормали не меняются."""
        return ContactCandidateSet(
            points=self.points * float(factor),
            normals=self.normals,
            source_mesh=self.source_mesh,
            orientation_inferred=self.orientation_inferred,
        )

    def __str__(self):
        return f"Контакты {self.source_mesh} ({len(self)} шт.)"
