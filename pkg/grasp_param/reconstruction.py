# grasp_param/reconstruction.py
"""
Обратное отображение: восстановление захвата по вектору параметризации.

Используется как проверка инъективности. Пространственный захват
собирается звено за звеном в каноническом базисе (t1 в плоскости xy,
d вдоль +x, первая вершина в начале координат); ребро, к которому
присоединяется очередное звено, в векторе не записано, поэтому оно
ищется перебором с отсечением по выпуклости. Найденный захват
принимается, только если его собственная параметризация совпадает с
исходным вектором.
"""
import logging

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from graspid.exceptions import GraspIdError
from .exceptions import InfeasibleVector
from .models import Dimensionality, Facet, Grasp
from .parameterization import max_component_error, normalize_scale, parameterize
from .polyhedron import oriented_facets

logger = logging.getLogger('grasp_param')

ROUND_TRIP_TOLERANCE = 1e-6


def _check_triangle(g1, g2):
    if not (g1 > 0 and g2 > 0 and g1 + g2 < np.pi):
        raise InfeasibleVector(f"Углы треугольника {g1:.6g} и {g2:.6g} не дают треугольника")


def _within_tolerance(candidate, vector):
    if vector.normalized:
        candidate = normalize_scale(candidate)
    scale = max(1.0, float(np.max(np.abs(vector.values))))
    return max_component_error(candidate, vector) <= ROUND_TRIP_TOLERANCE * scale


def _matches(grasp, target):
    try:
        candidate = parameterize(grasp)
    except GraspIdError:
        return False
    return _within_tolerance(candidate, target)


def _hull_facets(points):
    if len(points) == 3:
        cross = np.cross(points[1] - points[0], points[2] - points[0])
        return [Facet(vertices=(0, 1, 2), normal=np.array([0.0, 0.0, 1.0]), area=0.5 * np.linalg.norm(cross))]
    try:
        hull = ConvexHull(points)
    except QhullError:
        return None
    if len(hull.vertices) < len(points):
        return None
    return oriented_facets(points, hull)


def _fold(points, x, y, normal, g1, g2, dihedral):
    """
    Вершина треугольника за ребром (x, y) грани с внешней нормалью normal.

    Новая грань проходит ребро в обратном направлении (y, x): g1 - угол
    при y, g2 - угол при x, dihedral - внутренний двугранный угол между гранями.
    """
    edge = points[x] - points[y]
    length = np.linalg.norm(edge)
    u = edge / length
    outward = np.cross(normal, u)
    bend = np.pi - dihedral
    folded = np.cos(bend) * outward - np.sin(bend) * normal
    r = length * np.sin(g2) / np.sin(g1 + g2)
    apex = points[y] + r * (np.cos(g1) * u + np.sin(g1) * folded)
    return apex, np.cross(u, folded)


def _extend(points, links, accept, tol):
    if not links:
        return points if accept(points) else None

    g1, g2, dihedral = links[0]
    facets = _hull_facets(points)
    if facets is None:
        return None

    candidates = [
        (np.linalg.norm(points[x] - points[y]), x, y, facet.normal)
        for facet in facets for x, y in facet.edges()
    ]
    candidates.sort(key=lambda item: -item[0])

    for _, x, y, normal in candidates:
        apex, new_normal = _fold(points, x, y, normal, g1, g2, dihedral)
        # все прежние вершины остаются по внутреннюю сторону новой грани
        if np.any((points - points[y]) @ new_normal > tol):
            continue
        if len(points) > 3 and not any(
            np.dot(apex - points[f.vertices[0]], f.normal) > tol for f in facets
        ):
            continue
        found = _extend(np.vstack([points, apex]), links[1:], accept, tol)
        if found is not None:
            return found
    return None


def _decode_normals(vector, frame):
    u, v, w = frame
    angles = vector.values[3 * vector.n - 6:].reshape(vector.n, 2)
    azimuth, elevation = angles[:, 0], angles[:, 1]
    return (
        (np.cos(elevation) * np.cos(azimuth))[:, None] * u
        + (np.cos(elevation) * np.sin(azimuth))[:, None] * v
        + np.sin(elevation)[:, None] * w
    )


def _reconstruct_spatial(vector):
    n = vector.n
    values = vector.values
    g1, g2, d = values[:3]
    _check_triangle(g1, g2)
    if not d > 0:
        raise InfeasibleVector(f"Длина опорного ребра должна быть положительной: {d}")

    links = [tuple(values[3 + 3 * j:6 + 3 * j]) for j in range(n - 3)]
    for link_g1, link_g2, dihedral in links:
        _check_triangle(link_g1, link_g2)
        if not 0 < dihedral <= np.pi:
            raise InfeasibleVector(f"Двугранный угол вне (0, pi]: {dihedral}")

    r = d * np.sin(g2) / np.sin(g1 + g2)
    base = np.array([
        [0.0, 0.0, 0.0],
        [d, 0.0, 0.0],
        [r * np.cos(g1), r * np.sin(g1), 0.0],
    ])

    # точки собираются в порядке вершин цепочки, базис t1 совпадает с осями
    if vector.with_normals:
        normals = _decode_normals(vector, np.eye(3))

        def accept(points):
            return _matches(Grasp(points=points, normals=normals), vector)
    else:
        def accept(points):
            return _matches(Grasp(points=points), vector)

    points = _extend(base, links, accept, tol=1e-9 * d)
    if points is None:
        raise InfeasibleVector("Ни одна выпуклая сборка цепочки не воспроизводит вектор")
    return Grasp(points=points, normals=normals if vector.with_normals else None)


def _reconstruct_planar(vector):
    n = vector.n
    values = vector.values
    angles = values[:n - 1]
    lengths = values[n - 1:2 * n - 3]
    if np.any(angles <= 0) or np.any(angles >= np.pi):
        raise InfeasibleVector("Внутренние углы многоугольника должны лежать в (0, pi)")
    if np.any(lengths <= 0):
        raise InfeasibleVector("Длины рёбер должны быть положительными")

    points = [np.zeros(2), np.array([lengths[0], 0.0])]
    heading = 0.0
    for k in range(1, n - 2):
        heading += np.pi - angles[k]
        points.append(points[-1] + lengths[k] * np.array([np.cos(heading), np.sin(heading)]))
    heading += np.pi - angles[n - 2]

    # последняя вершина - пересечение луча из v_{n-2} и луча из v_0
    forward = np.array([np.cos(heading), np.sin(heading)])
    back = np.array([np.cos(angles[0]), np.sin(angles[0])])
    system = np.column_stack([forward, -back])
    if abs(np.linalg.det(system)) < 1e-12:
        raise InfeasibleVector("Последние рёбра многоугольника параллельны")
    s, t = np.linalg.solve(system, -points[-1])
    if s <= 0 or t <= 0:
        raise InfeasibleVector("Многоугольник не замыкается")
    points.append(t * back)
    points = np.array(points)

    normals = None
    if vector.with_normals:
        thetas = values[2 * n - 3:]
        edges = np.roll(points, -1, axis=0) - points
        directions = np.arctan2(edges[:, 1], edges[:, 0]) + thetas
        normals = np.column_stack([np.cos(directions), np.sin(directions)])

    grasp = Grasp(points=points, normals=normals)
    try:
        candidate = parameterize(grasp)
    except GraspIdError as e:
        raise InfeasibleVector(f"Восстановленный многоугольник недопустим: {e}") from e
    if not _within_tolerance(candidate, vector):
        raise InfeasibleVector("Восстановленный многоугольник не воспроизводит вектор")
    return grasp


def reconstruct(vector):
    """
    Захват в каноническом базисе, параметризация которого совпадает с vector
    с точностью ROUND_TRIP_TOLERANCE.

    Raises:
        InfeasibleVector: нарушено неравенство треугольника или выпуклость
    """
    if vector.n == 2:
        d = float(vector.values[0])
        if not d > 0:
            raise InfeasibleVector(f"Расстояние должно быть положительным: {d}")
        dim = 2 if vector.dimensionality is Dimensionality.PLANAR else 3
        points = np.zeros((2, dim))
        points[1, 0] = d
        return Grasp(points=points)
    if vector.dimensionality is Dimensionality.PLANAR:
        return _reconstruct_planar(vector)
    return _reconstruct_spatial(vector)
