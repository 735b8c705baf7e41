# grasp_param/parameterization.py
import logging

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from graspid.conf import get_setting
from .exceptions import DegenerateGrasp, NonConvexUnsupported, NotApplicable, ShapeMismatch
from .models import ComponentKind, Dimensionality, ParamVector, VectorShape
from .polyhedron import build_polyhedron, chain_values, check_nondegenerate

logger = logging.getLogger('grasp_param')

TWO_PI = 2.0 * np.pi


def wrap_angle(values):
    """Приведение угла (или массива углов) к (-pi, pi]."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(values, dtype=np.float64), TWO_PI)
    return wrapped if np.ndim(wrapped) else float(wrapped)


def wrapped_difference(a, b, circular_mask):
    """
    Покомпонентная разность a - b; для азимутов - кратчайшая по окружности.

    Работает с broadcasting: a (..., w), b (..., w), circular_mask (w,).
    """
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    if np.any(circular_mask):
        diff = np.where(circular_mask, np.mod(diff + np.pi, TWO_PI) - np.pi, diff)
    return diff


def parameterize_spatial(grasp):
    """
    Вектор пространственного захвата.

    [g1, g2, d] по t1, затем (g1, g2, dihedral) для каждого следующего звена
    цепочки; с нормалями - (азимут, угол места) каждой нормали в базисе t1
    в каноническом порядке вершин.

    Raises:
        DegenerateGrasp
    """
    if grasp.dimensionality is not Dimensionality.SPATIAL:
        raise ValueError("Ожидается пространственный захват")
    if grasp.n < 3:
        raise ValueError(f"Пространственная параметризация требует n >= 3, n = {grasp.n}")

    poly = build_polyhedron(grasp.points, grasp.normals)
    values = chain_values(poly.points, poly.facets, poly.chain, grasp.normals)
    return ParamVector(
        values=values,
        n=grasp.n,
        with_normals=grasp.has_normals,
        dimensionality=Dimensionality.SPATIAL,
        area_scale=poly.A,
    )


def _polygon_descriptor(points, normals, order, start, step):
    n = len(order)
    seq = [order[(start + k) % n] for k in range(n)]
    scale = max(np.linalg.norm(points[seq[k]] - points[seq[(k + 1) % n]]) for k in range(n))
    lengths = tuple(
        int(round(np.linalg.norm(points[seq[(k + 1) % n]] - points[seq[k]]) / (scale * step)))
        for k in range(n)
    )
    angles = tuple(
        int(round(_polygon_angle(points, seq[k - 1], seq[k], seq[(k + 1) % n]) / step)) for k in range(n)
    )
    thetas = ()
    if normals is not None:
        thetas = tuple(
            int(round(_edge_normal_angle(points, normals, seq[k], seq[(k + 1) % n]) / step)) for k in range(n)
        )
    return lengths + angles + thetas


def _polygon_angle(points, prev, at, nxt):
    a = points[prev] - points[at]
    b = points[nxt] - points[at]
    cross = a[0] * b[1] - a[1] * b[0]
    return float(np.arctan2(abs(cross), np.dot(a, b)))


def _edge_normal_angle(points, normals, at, nxt):
    """Знаковый угол от ребра at -> nxt до нормали в вершине at, (-pi, pi]."""
    edge = points[nxt] - points[at]
    normal = normals[at]
    angle = np.arctan2(edge[0] * normal[1] - edge[1] * normal[0], np.dot(edge, normal))
    return wrap_angle(angle)


def parameterize_planar(grasp):
    """
    Вектор плоского захвата: n-1 внутренних углов, n-2 длин рёбер, при
    наличии нормалей - n знаковых углов нормалей к следующему ребру.

    Вершины обходятся против часовой стрелки, начиная с наибольшего ребра.

    Raises:
        DegenerateGrasp: коллинеарность
        NonConvexUnsupported: точки не в выпуклом положении
    """
    if grasp.dimensionality is not Dimensionality.PLANAR:
        raise ValueError("Ожидается плоский захват")
    n = grasp.n
    if n < 3:
        raise ValueError(f"Плоская параметризация требует n >= 3, n = {n}")
    points = grasp.points
    check_nondegenerate(points)
    try:
        hull = ConvexHull(points)
    except QhullError as e:
        raise DegenerateGrasp(f"Многоугольник не построен: {e}") from e
    if len(hull.vertices) < n:
        raise NonConvexUnsupported(f"{n - len(hull.vertices)} контакт(ов) не в выпуклом положении")

    # для 2D scipy возвращает вершины оболочки против часовой стрелки
    order = [int(v) for v in hull.vertices]
    step = get_setting('TIE_TOLERANCE')
    start = max(range(n), key=lambda s: _polygon_descriptor(points, grasp.normals, order, s, step))
    seq = [order[(start + k) % n] for k in range(n)]

    values = [_polygon_angle(points, seq[k - 1], seq[k], seq[(k + 1) % n]) for k in range(n - 1)]
    values += [float(np.linalg.norm(points[seq[k + 1]] - points[seq[k]])) for k in range(n - 2)]
    if grasp.has_normals:
        values += [_edge_normal_angle(points, grasp.normals, seq[k], seq[(k + 1) % n]) for k in range(n)]

    area = float(hull.volume)  # для 2D это площадь многоугольника
    return ParamVector(
        values=values,
        n=n,
        with_normals=grasp.has_normals,
        dimensionality=Dimensionality.PLANAR,
        area_scale=float(np.sqrt(area)),
    )


def parameterize_two_finger(grasp):
    """Одномерный вектор двухпальцевого захвата: расстояние между контактами."""
    if grasp.n != 2:
        raise ValueError(f"Ожидается n = 2, n = {grasp.n}")
    distance = float(np.linalg.norm(grasp.points[1] - grasp.points[0]))
    if distance < 1e-12:
        raise DegenerateGrasp("Контакты двухпальцевого захвата совпадают")
    return ParamVector(
        values=[distance], n=2, with_normals=False, dimensionality=grasp.dimensionality,
    )


def parameterize(grasp):
    """Отображение захвата в вектор параметризации по числу контактов и размерности."""
    if grasp.n == 2:
        return parameterize_two_finger(grasp)
    if grasp.dimensionality is Dimensionality.PLANAR:
        return parameterize_planar(grasp)
    return parameterize_spatial(grasp)


def normalize_scale(vector, A=None):
    """
    Деление всех компонент-длин на A; углы не меняются.

    A по умолчанию берётся из самого вектора (area_scale).

    Raises:
        NotApplicable: вектор уже нормирован или n = 2
    """
    if vector.normalized:
        raise NotApplicable("Вектор уже нормирован")
    if vector.n == 2:
        raise NotApplicable("Нормировка двухпальцевого захвата всегда даёт 1")
    A = vector.area_scale if A is None else float(A)
    if A is None:
        raise ValueError("Не задан масштаб A для нормировки")
    if not np.isfinite(A) or A <= 0:
        raise ValueError(f"Масштаб A должен быть положительным: {A}")

    lengths = np.array([k is ComponentKind.LENGTH for k in vector.kinds])
    values = np.where(lengths, vector.values / A, vector.values)
    return ParamVector(
        values=values,
        n=vector.n,
        with_normals=vector.with_normals,
        normalized=True,
        dimensionality=vector.dimensionality,
        area_scale=A,
    )


def check_grasp_shape(grasp, shape):
    """
    Raises:
        ShapeMismatch: число контактов, размерность или наличие нормалей
            не соответствуют форме вектора
    """
    if grasp.n != shape.n:
        raise ShapeMismatch(f"Захват с n = {grasp.n} не подходит к форме {shape}")
    if grasp.dimensionality is not shape.dimensionality:
        raise ShapeMismatch(f"Захват {grasp.dimensionality.value} не подходит к форме {shape}")
    if shape.with_normals and not grasp.has_normals:
        raise ShapeMismatch(f"Форма {shape} требует нормалей контактов")


def vectorize(grasp, shape):
    """
    Вектор захвата в заданной форме: нормали отбрасываются, если форма их
    не содержит; при shape.normalized выполняется нормировка масштаба.
    """
    check_grasp_shape(grasp, shape)
    if grasp.has_normals and not shape.with_normals:
        grasp = grasp.without_normals()
    vector = parameterize(grasp)
    if shape.normalized:
        vector = normalize_scale(vector)
    return vector


def vectorize_many(grasps, shape):
    """Матрица (m, w) векторов; порядок строк совпадает с порядком захватов."""
    rows = [vectorize(grasp, shape).values for grasp in grasps]
    if not rows:
        return np.empty((0, shape.width))
    return np.vstack(rows)


def vector_distance(a, b):
    """
    Евклидово расстояние с кратчайшей разностью по окружности для азимутов.

    Raises:
        ShapeMismatch
    """
    if a.shape != b.shape:
        raise ShapeMismatch(f"Несовместимые векторы: {a.shape} и {b.shape}")
    diff = wrapped_difference(a.values, b.values, a.shape.circular_mask)
    return float(np.linalg.norm(diff))


def max_component_error(a, b):
    """Наибольшее покомпонентное отклонение (по окружности для азимутов)."""
    if a.shape != b.shape:
        raise ShapeMismatch(f"Несовместимые векторы: {a.shape} и {b.shape}")
    diff = wrapped_difference(a.values, b.values, a.shape.circular_mask)
    return float(np.max(np.abs(diff)))


def shape_of(grasp, normalized=True):
    """Форма вектора, которую естественно даёт данный захват."""
    return VectorShape(grasp.n, grasp.has_normals, normalized and grasp.n > 2, grasp.dimensionality)

