# grasp_param/models.py
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np


class Dimensionality(str, Enum):
    PLANAR = "planar"
    SPATIAL = "spatial"


class ComponentKind(str, Enum):
    ANGLE = "angle"          # внутренний угол треугольника / многоугольника, (0, pi)
    LENGTH = "length"        # длина в единицах сетки
    DIHEDRAL = "dihedral"    # внутренний двугранный угол, (0, pi)
    AZIMUTH = "azimuth"      # циклический угол, (-pi, pi]
    ELEVATION = "elevation"  # [-pi/2, pi/2]


def param_dimension(n, with_normals, dimensionality=Dimensionality.SPATIAL):
    """
    Размерность w вектора параметризации.

    SPATIAL: 5n-6 с нормалями, 3n-6 без; PLANAR: 3n-3 и 2n-3; при n = 2 всегда 1.
    """
    dimensionality = Dimensionality(dimensionality)
    if n < 2:
        raise ValueError(f"Захват требует хотя бы двух контактов, n = {n}")
    if n == 2:
        if with_normals:
            raise ValueError("При n = 2 нормали не параметризуются")
        return 1
    if dimensionality is Dimensionality.SPATIAL:
        return 5 * n - 6 if with_normals else 3 * n - 6
    return 3 * n - 3 if with_normals else 2 * n - 3


def component_kinds(n, with_normals, dimensionality=Dimensionality.SPATIAL):
    """Тип каждой компоненты вектора в порядке их следования."""
    dimensionality = Dimensionality(dimensionality)
    if n == 2:
        return (ComponentKind.LENGTH,)
    if dimensionality is Dimensionality.SPATIAL:
        kinds = [ComponentKind.ANGLE, ComponentKind.ANGLE, ComponentKind.LENGTH]
        kinds += [ComponentKind.ANGLE, ComponentKind.ANGLE, ComponentKind.DIHEDRAL] * (n - 3)
        if with_normals:
            kinds += [ComponentKind.AZIMUTH, ComponentKind.ELEVATION] * n
    else:
        kinds = [ComponentKind.ANGLE] * (n - 1) + [ComponentKind.LENGTH] * (n - 2)
        if with_normals:
            kinds += [ComponentKind.AZIMUTH] * n
    return tuple(kinds)


@dataclass(frozen=True)
class VectorShape:
    """Метаданные, по которым векторы (и модели) должны совпадать."""
    n: int
    with_normals: bool
    normalized: bool
    dimensionality: Dimensionality = Dimensionality.SPATIAL

    def __post_init__(self):
        object.__setattr__(self, 'dimensionality', Dimensionality(self.dimensionality))
        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 'with_normals', bool(self.with_normals))
        object.__setattr__(self, 'normalized', bool(self.normalized))
        param_dimension(self.n, self.with_normals, self.dimensionality)

    @property
    def width(self):
        return param_dimension(self.n, self.with_normals, self.dimensionality)

    @property
    def kinds(self):
        return component_kinds(self.n, self.with_normals, self.dimensionality)

    @property
    def circular_mask(self):
        return np.array([k is ComponentKind.AZIMUTH for k in self.kinds], dtype=bool)

    def with_n(self, n):
        return VectorShape(n, self.with_normals, self.normalized, self.dimensionality)

    def as_dict(self):
        return {
            'n': self.n,
            'with_normals': self.with_normals,
            'normalized': self.normalized,
            'dimensionality': self.dimensionality.value,
        }

    def __str__(self):
        normals = "с нормалями" if self.with_normals else "без нормалей"
        scale = ", нормирован" if self.normalized else ""
        return f"{self.dimensionality.value} n={self.n} {normals}{scale} (w={self.width})"


@dataclass(frozen=True, eq=False)
class Grasp:
    """
    Наблюдение захвата: n точек контакта и, при наличии, единичные нормали.

    Размерность (PLANAR / SPATIAL) определяется по числу координат точек.
    """
    points: np.ndarray
    normals: Optional[np.ndarray] = None

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64, copy=True)
        if points.ndim != 2 or points.shape[1] not in (2, 3):
            raise ValueError(f"Точки захвата должны иметь форму (n, 2) или (n, 3), получено {points.shape}")
        if len(points) < 2:
            raise ValueError("Захват требует хотя бы двух контактов")
        points.setflags(write=False)
        object.__setattr__(self, 'points', points)

        if self.normals is not None:
            normals = np.array(self.normals, dtype=np.float64, copy=True)
            if normals.shape != points.shape:
                raise ValueError(f"Форма нормалей {normals.shape} не совпадает с точками {points.shape}")
            if len(points) < 3:
                raise ValueError("При n = 2 нормали не параметризуются")
            if np.max(np.abs(np.linalg.norm(normals, axis=1) - 1.0)) > 1e-9:
                raise ValueError("Нормали захвата должны быть единичными")
            normals.setflags(write=False)
            object.__setattr__(self, 'normals', normals)

    @property
    def n(self):
        return len(self.points)

    @property
    def has_normals(self):
        return self.normals is not None

    @property
    def dimensionality(self):
        return Dimensionality.PLANAR if self.points.shape[1] == 2 else Dimensionality.SPATIAL

    def subset(self, indices):
        indices = list(indices)
        return Grasp(
            points=self.points[indices],
            normals=None if self.normals is None else self.normals[indices],
        )

    def without_normals(self):
        return Grasp(points=self.points)

    def is_degenerate(self):
        from .polyhedron import check_nondegenerate
        from .exceptions import DegenerateGrasp
        try:
            check_nondegenerate(self.points)
        except DegenerateGrasp:
            return True
        return False


@dataclass(frozen=True, eq=False)
class Facet:
    """Грань оболочки: вершины против часовой стрелки, если смотреть снаружи."""
    vertices: Tuple[int, int, int]
    normal: np.ndarray
    area: float

    def edges(self):
        a, b, c = self.vertices
        return ((a, b), (b, c), (c, a))

    def third(self, a, b):
        return next(v for v in self.vertices if v != a and v != b)


@dataclass(frozen=True)
class ChainLink:
    """
    Звено цепочки параметризации: грань, опорное ребро (va, vb), новая вершина
    и грань-родитель, через ребро которой звено присоединено (None для t1).
    """
    facet: int
    edge: Tuple[int, int]
    new_vertex: int
    parent: Optional[int] = None


@dataclass(frozen=True, eq=False)
class GraspPolyhedron:
    points: np.ndarray
    facets: Tuple[Facet, ...]
    chain: Tuple[ChainLink, ...]

    @property
    def total_area(self):
        return float(sum(f.area for f in self.facets))

    @property
    def A(self):
        return float(np.sqrt(self.total_area))

    @property
    def vertex_order(self):
        """Канонический порядок вершин: концы опорного ребра t1, третья вершина t1, затем новые."""
        first = self.chain[0]
        return (first.edge[0], first.edge[1], first.new_vertex) + tuple(
            link.new_vertex for link in self.chain[1:]
        )


@dataclass(frozen=True, eq=False)
class ParamVector:
    """
    Вектор параметризации q с метаданными.

    `area_scale` - величина A (корень из суммарной площади граней) исходного
    многогранника; используется при нормировке масштаба.
    """
    values: np.ndarray
    n: int
    with_normals: bool
    normalized: bool = False
    dimensionality: Dimensionality = Dimensionality.SPATIAL
    area_scale: Optional[float] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True).ravel()
        object.__setattr__(self, 'dimensionality', Dimensionality(self.dimensionality))
        expected = param_dimension(self.n, self.with_normals, self.dimensionality)
        if len(values) != expected:
            raise ValueError(f"Ожидается вектор длины {expected}, получено {len(values)}")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def w(self):
        return len(self.values)

    @property
    def shape(self):
        return VectorShape(self.n, self.with_normals, self.normalized, self.dimensionality)

    @property
    def kinds(self):
        return component_kinds(self.n, self.with_normals, self.dimensionality)

    def csv_row(self):
        """Метаданные и w значений одной строкой CSV (углы в радианах)."""
        meta = [str(self.n), str(int(self.with_normals)), str(int(self.normalized)), self.dimensionality.value]
        return ",".join(meta + [repr(float(v)) for v in self.values])

    @classmethod
    def from_csv_row(cls, row):
        parts = row.strip().split(",")
        n, with_normals, normalized, dimensionality = parts[:4]
        return cls(
            values=[float(v) for v in parts[4:]],
            n=int(n),
            with_normals=bool(int(with_normals)),
            normalized=bool(int(normalized)),
            dimensionality=dimensionality,
        )
