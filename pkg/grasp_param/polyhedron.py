# grasp_param/polyhedron.py
"""
Многогранник захвата и цепочка треугольников параметризации.

Все дискретные выборы (t1, опорное ребро, очередное звено) делаются по
ключам, инвариантным к движению и к порядку входных точек. Равенства
сравниваются после квантования с относительным шагом TIE_TOLERANCE.

Эти ключи не различают зеркальные варианты, поэтому варианты, равные по
ключам, разрешаются по самому вектору: остаются ветви с лексикографически
наименьшим префиксом (квантованные компоненты звена и нормали его новых
вершин), остальные отбрасываются на каждом шаге.
"""
import logging
from dataclasses import dataclass
from typing import FrozenSet, Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from graspid.conf import get_setting
from .exceptions import DegenerateGrasp
from .models import ChainLink, Facet, GraspPolyhedron

logger = logging.getLogger('grasp_param')

TWO_PI = 2.0 * np.pi

# Предел числа равноправных ветвей (достигается только у сильно симметричных захватов)
MAX_BRANCHES = 256


def check_nondegenerate(points):
    """
    Проверка невырожденности по сингулярным числам центрированной матрицы точек.

    n = 2: точки различны; n = 3 (или плоский случай): не коллинеарны;
    n >= 4 в пространстве: не компланарны.

    Raises:
        DegenerateGrasp
    """
    points = np.asarray(points, dtype=np.float64)
    n, dim = points.shape
    centered = points - points.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    if s[0] <= 1e-12:
        raise DegenerateGrasp("Все контакты совпадают")
    ratio = get_setting('COPLANARITY_RATIO')
    if n == 2:
        return
    if s[1] < ratio * s[0]:
        raise DegenerateGrasp("Контакты коллинеарны")
    if dim == 3 and n >= 4 and s[2] < ratio * s[0]:
        raise DegenerateGrasp("Контакты компланарны")


class _Quantizer:
    """Квантование длин, площадей и углов относительно собственного масштаба захвата."""

    def __init__(self, points):
        diffs = points[:, None, :] - points[None, :, :]
        self.distances = np.linalg.norm(diffs, axis=2)
        self.scale = float(self.distances.max())
        self.step = get_setting('TIE_TOLERANCE')
        self.turn = int(round(TWO_PI / self.step))
        centroid = points.mean(axis=0)
        to_centroid = np.linalg.norm(points - centroid, axis=1)
        farthest = self.distances.max(axis=1)
        # Инвариант вершины без опоры на систему координат
        self.vertex_keys = [
            (self.length(to_centroid[i]), self.length(farthest[i])) for i in range(len(points))
        ]

    def length(self, value):
        return int(round(value / (self.scale * self.step)))

    def area(self, value):
        return int(round(value / (self.scale * self.scale * self.step)))

    def angle(self, value):
        return int(round(value / self.step))

    def azimuth(self, value):
        return self.angle(value) % self.turn

    def prefer_small(self, vertices):
        """Часть ключа, при которой под max() выигрывают вершины с меньшими инвариантами."""
        return tuple((-a, -b) for a, b in (self.vertex_keys[v] for v in vertices))


def interior_angle(points, at, b, c):
    u = points[b] - points[at]
    v = points[c] - points[at]
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), np.dot(u, v)))


def dihedral_angle(normal_a, normal_b):
    """Внутренний двугранный угол выпуклой оболочки по внешним нормалям двух граней."""
    between = np.arctan2(np.linalg.norm(np.cross(normal_a, normal_b)), np.dot(normal_a, normal_b))
    return float(np.pi - between)


def encode_normal(normal, frame):
    """
    (азимут, угол места) нормали в базисе (u, v, w).

    На полюсе азимут не определён и принимается равным 0.
    """
    u, v, w = frame
    x, y, z = float(np.dot(normal, u)), float(np.dot(normal, v)), float(np.dot(normal, w))
    planar = np.hypot(x, y)
    if planar < get_setting('TIE_TOLERANCE'):
        return 0.0, float(np.copysign(np.pi / 2, z))
    azimuth = np.arctan2(y, x)
    if azimuth <= -np.pi:
        azimuth = np.pi
    elevation = np.arctan2(z, planar)
    return float(azimuth), float(elevation)


def chain_frame(points, facet, edge):
    """Базис (u, v, w) по t1: u вдоль опорного ребра, w - внешняя нормаль t1."""
    va, vb = edge
    u = points[vb] - points[va]
    u = u / np.linalg.norm(u)
    w = facet.normal
    return u, np.cross(w, u), w


def link_values(points, facets, link, frame, normals=None):
    """
    Компоненты вектора, которые добавляет звено.

    t1: (g1, g2, d) и нормали трёх его вершин; следующее звено: (g1, g2,
    двугранный угол) и нормаль новой вершины.
    """
    if link.parent is None:
        va, vb = link.edge
        values = [
            interior_angle(points, va, vb, link.new_vertex),
            interior_angle(points, vb, va, link.new_vertex),
            float(np.linalg.norm(points[vb] - points[va])),
        ]
        vertices = (va, vb, link.new_vertex)
    else:
        y, x = link.edge
        values = [
            interior_angle(points, y, x, link.new_vertex),
            interior_angle(points, x, y, link.new_vertex),
            dihedral_angle(facets[link.parent].normal, facets[link.facet].normal),
        ]
        vertices = (link.new_vertex,)
    if normals is not None:
        for vertex in vertices:
            values += encode_normal(normals[vertex], frame)
    return values


def chain_values(points, facets, chain, normals=None):
    """Вектор по цепочке: геометрия всех звеньев, затем нормали в каноническом порядке вершин."""
    frame = chain_frame(points, facets[chain[0].facet], chain[0].edge)
    geometry, angles = [], []
    for link in chain:
        values = link_values(points, facets, link, frame, normals)
        geometry += values[:3]
        angles += values[3:]
    return geometry + angles


def _quantize_link(quant, values, first):
    key = [
        quant.angle(values[0]),
        quant.angle(values[1]),
        quant.length(values[2]) if first else quant.angle(values[2]),
    ]
    for azimuth, elevation in zip(values[3::2], values[4::2]):
        key += [quant.azimuth(azimuth), quant.angle(elevation)]
    return tuple(key)


def oriented_facets(points, hull):
    facets = []
    for simplex, equation in zip(hull.simplices, hull.equations):
        a, b, c = (int(v) for v in simplex)
        cross = np.cross(points[b] - points[a], points[c] - points[a])
        if np.dot(cross, equation[:3]) < 0:
            b, c = c, b
            cross = -cross
        double_area = float(np.linalg.norm(cross))
        if double_area <= 0:
            continue
        facets.append(Facet(vertices=(a, b, c), normal=cross / double_area, area=0.5 * double_area))
    return facets


def _facet_key(facet, points, quant):
    a, b, c = facet.vertices
    lengths = sorted(
        (quant.length(quant.distances[x, y]) for x, y in facet.edges()), reverse=True
    )
    perimeter = quant.distances[a, b] + quant.distances[b, c] + quant.distances[c, a]
    return (
        quant.area(facet.area),
        quant.length(perimeter),
        tuple(lengths),
        quant.prefer_small(sorted(facet.vertices, key=lambda v: quant.vertex_keys[v])),
    )


def _edge_map(facets):
    return {edge: index for index, facet in enumerate(facets) for edge in facet.edges()}


def _check_flat_faces(facets):
    """Четыре и более контакта в одной грани оболочки: её триангуляция зависит от порядка точек."""
    edges = _edge_map(facets)
    limit = 1.0 - get_setting('COPLANARITY_RATIO')
    for facet in facets:
        for x, y in facet.edges():
            across = edges.get((y, x))
            if across is not None and np.dot(facet.normal, facets[across].normal) > limit:
                raise DegenerateGrasp("Четыре или более контакта лежат в одной грани оболочки")


def _best(items, key):
    """Все элементы с наибольшим ключом."""
    items = list(items)
    keys = [key(item) for item in items]
    top = max(keys)
    return [item for item, k in zip(items, keys) if k == top]


@dataclass(frozen=True, eq=False)
class _Branch:
    chain: Tuple[ChainLink, ...]
    region: FrozenSet[int]
    covered: FrozenSet[int]
    frame: tuple
    key: tuple


def _prune(branches):
    """Ветви с наименьшим префиксом вектора, без повторов."""
    smallest = min(branch.key for branch in branches)
    kept = {}
    for branch in branches:
        if branch.key == smallest and branch.chain not in kept:
            kept[branch.chain] = branch
    kept = list(kept.values())
    if len(kept) > MAX_BRANCHES:
        logger.debug(f"Равноправных ветвей цепочки {len(kept)}, оставлено {MAX_BRANCHES}")
        kept = kept[:MAX_BRANCHES]
    return kept


def _absorb(facets, edges, region, covered):
    """Грани за фронтом, не добавляющие новой вершины."""
    region = set(region)
    absorbed = True
    while absorbed:
        absorbed = False
        for index in sorted(region):
            for x, y in facets[index].edges():
                across = edges[(y, x)]
                if across not in region and set(facets[across].vertices) <= covered:
                    region.add(across)
                    absorbed = True
    return region


def select_chain(points, facets, quant=None, normals=None):
    """
    Цепочка t1 ... t_{n-2}.

    t1 - грань наибольшей площади, опорное ребро - её наибольшее ребро.
    Далее поддерживается фронт - рёбра уже пройденной области. Грани за
    фронтом, не добавляющие новой вершины, поглощаются без параметров;
    из остальных выбирается грань за наибольшим ребром фронта. Варианты,
    равные по этим ключам, разрешаются по наименьшему вектору (с нормалями,
    если они переданы).
    """
    points = np.asarray(points, dtype=np.float64)
    quant = quant or _Quantizer(points)
    edges = _edge_map(facets)
    n = len(points)

    def extension_key(x, y):
        # (x, y) - ребро области; грань за ним содержит (y, x)
        across = facets[edges[(y, x)]]
        return (
            quant.length(quant.distances[x, y]),
            quant.area(across.area),
            quant.prefer_small((y, x, across.third(x, y))),
        )

    branches = []
    for first in _best(range(len(facets)), key=lambda i: _facet_key(facets[i], points, quant)):
        # Опорное ребро t1 - то же ребро, через которое присоединяется t2
        for va, vb in _best(facets[first].edges(), key=lambda e: extension_key(*e)):
            link = ChainLink(facet=first, edge=(va, vb), new_vertex=facets[first].third(va, vb))
            frame = chain_frame(points, facets[first], link.edge)
            branches.append(_Branch(
                chain=(link,),
                region=frozenset({first}),
                covered=frozenset({va, vb, link.new_vertex}),
                frame=frame,
                key=_quantize_link(quant, link_values(points, facets, link, frame, normals), True),
            ))
    branches = _prune(branches)

    while len(branches[0].covered) < n:
        grown = []
        for branch in branches:
            region = _absorb(facets, edges, branch.region, branch.covered)
            candidates = []
            for index in sorted(region):
                for x, y in facets[index].edges():
                    across = edges[(y, x)]
                    if across in region:
                        continue
                    new_vertex = facets[across].third(x, y)
                    candidates.append(ChainLink(facet=across, edge=(y, x), new_vertex=new_vertex, parent=index))
            for link in _best(candidates, key=lambda c: extension_key(c.edge[1], c.edge[0])):
                values = link_values(points, facets, link, branch.frame, normals)
                grown.append(_Branch(
                    chain=branch.chain + (link,),
                    region=frozenset(region | {link.facet}),
                    covered=branch.covered | {link.new_vertex},
                    frame=branch.frame,
                    key=branch.key + _quantize_link(quant, values, False),
                ))
        branches = _prune(grown)

    return branches[0].chain


def _single_triangle(points, normals, quant):
    """
    n = 3: ориентация единственного треугольника.

    С нормалями - сторона, к которой смотрит средняя нормаль; при
    неопределённости - та, где азимут первой нормали в [0, pi).
    Без нормалей - так, чтобы угол при va был не больше угла при vb.
    Равные по длине опорные рёбра разрешаются по наименьшему вектору.
    """
    pairs = _best(
        [(0, 1), (1, 2), (2, 0)],
        key=lambda e: (quant.length(quant.distances[e[0], e[1]]), quant.prefer_small(sorted(e, key=lambda v: quant.vertex_keys[v]))),
    )

    options = []
    for a, b in pairs:
        c = 3 - a - b
        cross = np.cross(points[b] - points[a], points[c] - points[a])
        double_area = float(np.linalg.norm(cross))
        normal = cross / double_area
        forward = Facet(vertices=(a, b, c), normal=normal, area=0.5 * double_area)
        backward = Facet(vertices=(b, a, c), normal=-normal, area=0.5 * double_area)

        if normals is None:
            chosen = forward if interior_angle(points, a, b, c) <= interior_angle(points, b, a, c) else backward
        else:
            side = float(np.dot(normals.mean(axis=0), normal))
            if side > 1e-9:
                chosen = forward
            elif side < -1e-9:
                chosen = backward
            else:
                u = (points[b] - points[a]) / np.linalg.norm(points[b] - points[a])
                v = np.cross(normal, u)
                azimuth = np.arctan2(np.dot(normals[a], v), np.dot(normals[a], u))
                chosen = forward if 0 <= azimuth < np.pi else backward

        va, vb, _ = chosen.vertices
        link = ChainLink(facet=0, edge=(va, vb), new_vertex=c)
        frame = chain_frame(points, chosen, link.edge)
        key = _quantize_link(quant, link_values(points, (chosen,), link, frame, normals), True)
        options.append((key, chosen, link))

    _, chosen, link = min(options, key=lambda option: option[0])
    return (chosen,), (link,)


def build_polyhedron(points, normals=None):
    """
    Выпуклая оболочка контактов (Quickhull) с триангулированными внешними
    гранями и цепочкой параметризации.

    Args:
        points: n >= 3 точек в пространстве
        normals: нормали контактов; ориентируют треугольник при n = 3 и
            разрешают равные по ключам варианты цепочки

    Raises:
        DegenerateGrasp: коллинеарность, компланарность, точка внутри оболочки
            или плоская грань оболочки с четырьмя и более контактами
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError(f"Ожидаются точки в пространстве, получено {points.shape}")
    n = len(points)
    if n < 3:
        raise DegenerateGrasp(f"Многогранник требует n >= 3, n = {n}")
    check_nondegenerate(points)
    if normals is not None:
        normals = np.asarray(normals, dtype=np.float64)
    quant = _Quantizer(points)

    if n == 3:
        facets, chain = _single_triangle(points, normals, quant)
        return GraspPolyhedron(points=points, facets=facets, chain=chain)

    try:
        hull = ConvexHull(points)
    except QhullError as e:
        raise DegenerateGrasp(f"Оболочка не построена: {e}") from e
    if len(hull.vertices) < n:
        raise DegenerateGrasp(f"{n - len(hull.vertices)} контакт(ов) лежат внутри оболочки")

    facets = tuple(oriented_facets(points, hull))
    _check_flat_faces(facets)
    chain = select_chain(points, facets, quant, normals)
    return GraspPolyhedron(points=points, facets=facets, chain=chain)
