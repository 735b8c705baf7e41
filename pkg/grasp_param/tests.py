# grasp_param/tests.py
import itertools

import numpy as np
from django.test import SimpleTestCase, tag

from graspid.rng import derive_rng
from mesh_io.contacts import mesh_to_contacts
from mesh_io.models import PrimitiveKind
from mesh_io.utils import generate_primitive
from .exceptions import DegenerateGrasp, InfeasibleVector, NonConvexUnsupported, NotApplicable, ShapeMismatch
from .models import ComponentKind, Dimensionality, Grasp, ParamVector, VectorShape, param_dimension
from .parameterization import (
    max_component_error, normalize_scale, parameterize, parameterize_planar,
    parameterize_two_finger, vector_distance, vectorize,
)
from .polyhedron import build_polyhedron, encode_normal
from .reconstruction import reconstruct
from .serializers import GraspSerializer, ParamVectorSerializer
from .utils import random_motion, scale_grasp

TETRAHEDRON = np.array([
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
]) / (2.0 * np.sqrt(2.0))  # ребро 1


def _unit(vectors):
    return vectors / np.linalg.norm(vectors, axis=-1, keepdims=True)


def sphere_grasp(rng, n, with_normals=True, dim=3):
    """Контакты на единичной сфере (окружности) - всегда в выпуклом положении."""
    if dim == 3:
        points = _unit(rng.normal(size=(n, 3))) * rng.uniform(0.5, 2.0)
    else:
        angles = np.sort(rng.uniform(0, 2 * np.pi, size=n))
        points = np.column_stack([np.cos(angles), np.sin(angles)])
    normals = _unit(rng.normal(size=(n, dim))) if with_normals else None
    return Grasp(points=points, normals=normals)


class PolyhedronTests(SimpleTestCase):
    def test_regular_tetrahedron_area(self):
        """Тест площади правильного тетраэдра"""
        poly = build_polyhedron(TETRAHEDRON)
        self.assertEqual(len(poly.facets), 4)
        self.assertAlmostEqual(poly.total_area, np.sqrt(3.0), places=12)
        self.assertAlmostEqual(poly.A, 3 ** 0.25, places=5)

    def test_single_triangle(self):
        """Тест: три точки дают одну грань"""
        poly = build_polyhedron([[0, 0, 0], [3, 0, 0], [0, 4, 0]])
        self.assertEqual(len(poly.facets), 1)
        self.assertEqual(len(poly.chain), 1)
        self.assertAlmostEqual(poly.total_area, 6.0)

    def test_coplanar_points_rejected(self):
        """Тест: четыре компланарные точки - вырожденный захват"""
        with self.assertRaises(DegenerateGrasp):
            build_polyhedron([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])

    def test_interior_point_rejected(self):
        """Тест: точка внутри оболочки"""
        points = np.vstack([TETRAHEDRON, [[0.0, 0.0, 0.0]]])
        with self.assertRaises(DegenerateGrasp):
            build_polyhedron(points)

    def test_collinear_rejected(self):
        """Тест коллинеарных точек"""
        with self.assertRaises(DegenerateGrasp):
            build_polyhedron([[0, 0, 0], [1, 1, 1], [2, 2, 2]])

    def test_largest_face_is_first(self):
        """Тест: увеличенная грань становится t1"""
        points = np.array([[0, 0, 0], [4, 0, 0], [0, 3, 0], [0.5, 0.5, 1.0]])
        poly = build_polyhedron(points)
        first = poly.facets[poly.chain[0].facet]
        self.assertEqual(set(first.vertices), {0, 1, 2})
        # опорное ребро - гипотенуза
        self.assertEqual(set(poly.chain[0].edge), {1, 2})

    def test_chain_covers_all_vertices(self):
        """Тест: цепочка из n - 2 граней покрывает все вершины"""
        rng = derive_rng(7)
        for n in range(4, 9):
            grasp = sphere_grasp(rng, n, with_normals=False)
            poly = build_polyhedron(grasp.points)
            self.assertEqual(len(poly.chain), n - 2)
            self.assertEqual(sorted(poly.vertex_order), list(range(n)))

    def test_second_link_shares_reference_edge(self):
        """Тест: t2 присоединяется через опорное ребро t1"""
        rng = derive_rng(11)
        for _ in range(20):
            poly = build_polyhedron(sphere_grasp(rng, 5, with_normals=False).points)
            va, vb = poly.chain[0].edge
            self.assertEqual(poly.chain[1].edge, (vb, va))

    def test_outward_normals(self):
        """Тест ориентации граней наружу"""
        rng = derive_rng(3)
        points = sphere_grasp(rng, 6, with_normals=False).points
        poly = build_polyhedron(points)
        centroid = points.mean(axis=0)
        for facet in poly.facets:
            self.assertGreater(np.dot(points[facet.vertices[0]] - centroid, facet.normal), 0)


class SpatialParameterizationTests(SimpleTestCase):
    def test_tetrahedron_vector(self):
        """Тест вектора правильного тетраэдра"""
        q = parameterize(Grasp(points=TETRAHEDRON))
        self.assertEqual(q.w, 6)
        np.testing.assert_allclose(q.values[[0, 1, 3, 4]], np.pi / 3, atol=1e-12)
        self.assertAlmostEqual(q.values[2], 1.0, places=12)
        self.assertAlmostEqual(q.values[5], np.arccos(1.0 / 3.0), places=9)

    def test_345_triangle(self):
        """Тест треугольника 3-4-5 без нормалей"""
        q = parameterize(Grasp(points=[[0, 0, 0], [3, 0, 0], [0, 4, 0]]))
        self.assertEqual(q.w, 3)
        self.assertAlmostEqual(q.values[0], 0.6435, places=4)
        self.assertAlmostEqual(q.values[1], 0.9273, places=4)
        self.assertAlmostEqual(q.values[2], 5.0)

    def test_four_fingers_with_normals(self):
        """Тест размерности n = 4 с нормалями"""
        q = parameterize(sphere_grasp(derive_rng(1), 4))
        self.assertEqual(q.w, 14)

    def test_dimension_formula(self):
        """Тест формулы размерности для n от 2 до 10"""
        for n in range(3, 11):
            self.assertEqual(param_dimension(n, True), 5 * n - 6)
            self.assertEqual(param_dimension(n, False), 3 * n - 6)
            self.assertEqual(param_dimension(n, True, Dimensionality.PLANAR), 3 * n - 3)
            self.assertEqual(param_dimension(n, False, Dimensionality.PLANAR), 2 * n - 3)
        self.assertEqual(param_dimension(2, False), 1)
        self.assertEqual(param_dimension(2, False, Dimensionality.PLANAR), 1)
        with self.assertRaises(ValueError):
            param_dimension(2, True)

    def test_frame_invariance(self):
        """Тест инвариантности к жёсткому движению"""
        rng = derive_rng(2024)
        for trial in range(300):
            grasp = sphere_grasp(rng, 3 + trial % 4, with_normals=bool(trial % 2))
            moved = random_motion(grasp, rng, max_translation=10.0)
            self.assertLess(max_component_error(parameterize(grasp), parameterize(moved)), 1e-8)

    @tag('slow')
    def test_frame_invariance_thousand_pairs(self):
        """Тест инвариантности к движению на 1000 парах"""
        rng = derive_rng(99)
        for trial in range(1000):
            grasp = sphere_grasp(rng, 3 + trial % 5, with_normals=trial % 3 != 0)
            moved = random_motion(grasp, rng, max_translation=100.0)
            self.assertLess(max_component_error(parameterize(grasp), parameterize(moved)), 1e-8)

    def test_scale_invariance(self):
        """Тест инвариантности нормированного вектора к масштабу"""
        rng = derive_rng(5)
        for trial in range(200):
            grasp = sphere_grasp(rng, 3 + trial % 4)
            xi = rng.uniform(0.1, 5.0)
            scaled = random_motion(scale_grasp(grasp, xi), rng)
            a = normalize_scale(parameterize(grasp))
            b = normalize_scale(parameterize(scaled))
            self.assertLess(max_component_error(a, b), 1e-8)

    def test_angles_stable_under_scaling(self):
        """Тест: при масштабировании меняется только d"""
        grasp = sphere_grasp(derive_rng(8), 5)
        a = parameterize(grasp)
        b = parameterize(scale_grasp(grasp, 3.0))
        lengths = np.array([k is ComponentKind.LENGTH for k in a.kinds])
        np.testing.assert_allclose(a.values[~lengths], b.values[~lengths], atol=1e-12)
        self.assertAlmostEqual(b.values[2], 3.0 * a.values[2])

    def test_order_invariance(self):
        """Тест инвариантности к порядку контактов"""
        rng = derive_rng(13)
        for n in (3, 4, 5):
            grasp = sphere_grasp(rng, n)
            reference = parameterize(grasp)
            for perm in itertools.permutations(range(n)):
                q = parameterize(grasp.subset(perm))
                self.assertLess(max_component_error(reference, q), 1e-9)

    def test_tetrahedron_order_invariance(self):
        """Тест: все 24 порядка вершин правильного тетраэдра дают один вектор"""
        reference = parameterize(Grasp(points=TETRAHEDRON))
        for perm in itertools.permutations(range(4)):
            q = parameterize(Grasp(points=TETRAHEDRON[list(perm)]))
            self.assertLess(max_component_error(reference, q), 1e-9)

    def test_tetrahedron_inward_normals_order_invariance(self):
        """Тест: с внутренними нормалями все 24 порядка тетраэдра дают один вектор"""
        grasp = Grasp(points=TETRAHEDRON, normals=_unit(-TETRAHEDRON))
        reference = parameterize(grasp)
        for perm in itertools.permutations(range(4)):
            self.assertLess(max_component_error(reference, parameterize(grasp.subset(perm))), 1e-9)

    def test_normal_at_pole(self):
        """Тест: у нормали вдоль оси w азимут 0"""
        frame = np.eye(3)
        self.assertEqual(encode_normal(_unit(np.array([1e-14, -1e-14, 1.0])), frame), (0.0, np.pi / 2))
        self.assertEqual(encode_normal(np.array([0.0, 0.0, -1.0]), frame), (0.0, -np.pi / 2))

    def test_angle_ranges(self):
        """Тест диапазонов всех компонент"""
        rng = derive_rng(17)
        for trial in range(500):
            q = parameterize(sphere_grasp(rng, 3 + trial % 5))
            self.assertFalse(np.any(np.isnan(q.values)))
            for kind, value in zip(q.kinds, q.values):
                if kind in (ComponentKind.ANGLE, ComponentKind.DIHEDRAL):
                    self.assertTrue(0 < value < np.pi)
                elif kind is ComponentKind.AZIMUTH:
                    self.assertTrue(-np.pi < value <= np.pi)
                elif kind is ComponentKind.ELEVATION:
                    self.assertTrue(-np.pi / 2 <= value <= np.pi / 2)
                else:
                    self.assertGreater(value, 0)

    def test_degenerate_propagated(self):
        """Тест: компланарные контакты"""
        with self.assertRaises(DegenerateGrasp):
            parameterize(Grasp(points=[[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]))


# Четыре центра граней единичного куба: две зеркально равные грани оболочки
MIRRORED_POINTS = np.array([[-3, 1, -1], [-1, -3, 1], [1, -1, -3], [1, -1, 3]]) / 6.0
MIRRORED_NORMALS = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, -1]], dtype=np.float64)


def face_contacts(kind, dims, resolution=None):
    contacts = mesh_to_contacts(generate_primitive(kind, dims, resolution=resolution))
    return Grasp(points=contacts.points, normals=contacts.normals)


class SymmetricContactTests(SimpleTestCase):
    """Центры граней примитивов: много равных граней, рёбер и зеркальных пар."""

    def _assert_order_invariant(self, grasp, orders):
        try:
            reference = parameterize(grasp)
        except DegenerateGrasp:
            return False
        for order in orders:
            q = parameterize(grasp.subset(order))
            self.assertLess(max_component_error(reference, q), 1e-9, f"{grasp.points.round(4).tolist()} {order}")
        return True

    def _orders(self, n, rng, count=4):
        orders = [list(reversed(range(n))), [1, 0] + list(range(2, n)), list(range(1, n)) + [0]]
        return orders + [list(rng.permutation(n)) for _ in range(count)]

    def test_mirrored_faces(self):
        """Тест: зеркально равные грани не делают вектор зависимым от порядка"""
        orders = list(itertools.permutations(range(4)))
        grasp = Grasp(points=MIRRORED_POINTS, normals=MIRRORED_NORMALS)
        self.assertTrue(self._assert_order_invariant(grasp, orders))
        self.assertTrue(self._assert_order_invariant(grasp.without_normals(), orders))

    def test_mirrored_faces_round_trip(self):
        """Тест восстановления захвата с зеркально равными гранями"""
        for grasp in (Grasp(points=MIRRORED_POINTS, normals=MIRRORED_NORMALS), Grasp(points=MIRRORED_POINTS)):
            q = parameterize(grasp)
            self.assertLess(max_component_error(parameterize(reconstruct(q)), q), 1e-6)

    def test_cube_face_centres(self):
        """Тест: четвёрки центров граней куба инвариантны к порядку контактов"""
        cube = face_contacts(PrimitiveKind.BOX, (1.0, 1.0, 1.0))
        rng = derive_rng(41)
        valid = 0
        for combo in itertools.combinations(range(cube.n), 4):
            grasp = cube.subset(combo)
            orders = self._orders(4, rng, count=2)
            if self._assert_order_invariant(grasp, orders):
                valid += 1
                self._assert_order_invariant(grasp.without_normals(), orders)
        self.assertGreater(valid, 300)

    @tag('slow')
    def test_cube_face_centres_all_orders(self):
        """Тест: все 24 порядка каждой четвёрки центров граней куба"""
        cube = face_contacts(PrimitiveKind.BOX, (1.0, 1.0, 1.0))
        orders = list(itertools.permutations(range(4)))
        for combo in itertools.combinations(range(cube.n), 4):
            grasp = cube.subset(combo)
            if self._assert_order_invariant(grasp, orders):
                self._assert_order_invariant(grasp.without_normals(), orders)

    def test_box_face_centres(self):
        """Тест: захваты по центрам граней прямоугольного бруска"""
        box = face_contacts(PrimitiveKind.BOX, (1.0, 1.4, 0.8))
        rng = derive_rng(42)
        valid = 0
        for n in (4, 5):
            for combo in itertools.combinations(range(box.n), n):
                if self._assert_order_invariant(box.subset(combo), self._orders(n, rng, count=1)):
                    valid += 1
        self.assertGreater(valid, 0)

    def test_cylinder_face_centres(self):
        """Тест: захваты по центрам граней цилиндра"""
        cylinder = face_contacts(PrimitiveKind.CYLINDER, (0.3, 1.5), resolution=16)
        rng = derive_rng(43)
        valid = 0
        for trial in range(120):
            n = 4 + trial % 2
            grasp = cylinder.subset(np.sort(rng.choice(cylinder.n, size=n, replace=False)))
            if self._assert_order_invariant(grasp, self._orders(n, rng)):
                valid += 1
                self._assert_order_invariant(grasp.without_normals(), self._orders(n, rng, count=1))
        self.assertGreater(valid, 60)

    def test_flat_hull_face_rejected(self):
        """Тест: четыре контакта в одной грани оболочки - вырожденный захват"""
        points = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0.5, 0.5, 1.0]])
        with self.assertRaises(DegenerateGrasp):
            build_polyhedron(points)


class PlanarAndTwoFingerTests(SimpleTestCase):
    def test_unit_square(self):
        """Тест единичного квадрата"""
        q = parameterize_planar(Grasp(points=[[0, 0], [1, 0], [1, 1], [0, 1]]))
        self.assertEqual(q.w, 5)
        np.testing.assert_allclose(q.values, [np.pi / 2] * 3 + [1.0, 1.0], atol=1e-12)

    def test_planar_dimensions(self):
        """Тест размерностей плоских векторов"""
        rng = derive_rng(21)
        self.assertEqual(parameterize(sphere_grasp(rng, 4, dim=2)).w, 9)
        self.assertEqual(parameterize(sphere_grasp(rng, 3, dim=2)).w, 6)

    def test_longest_edge_first(self):
        """Тест: d1 - наибольшее ребро"""
        q = parameterize_planar(Grasp(points=[[0, 0], [4, 0], [4, 1], [0, 1]]))
        self.assertAlmostEqual(q.values[3], 4.0)

    def test_nonconvex_rejected(self):
        """Тест вогнутого многоугольника"""
        with self.assertRaises(NonConvexUnsupported):
            parameterize_planar(Grasp(points=[[0, 0], [4, 0], [2, 1], [2, 4]]))

    def test_planar_motion_invariance(self):
        """Тест инвариантности плоского вектора к повороту"""
        rng = derive_rng(22)
        for trial in range(100):
            grasp = sphere_grasp(rng, 3 + trial % 4, with_normals=bool(trial % 2), dim=2)
            moved = random_motion(grasp, rng)
            self.assertLess(max_component_error(parameterize(grasp), parameterize(moved)), 1e-8)

    def test_two_finger(self):
        """Тест двухпальцевого захвата"""
        q = parameterize_two_finger(Grasp(points=[[0, 0, 0], [0, 0, 2]]))
        np.testing.assert_allclose(q.values, [2.0])
        moved = random_motion(Grasp(points=[[0, 0, 0], [0, 0, 2]]), derive_rng(1))
        self.assertAlmostEqual(parameterize(moved).values[0], 2.0, places=12)

    def test_two_finger_coincident(self):
        """Тест совпадающих контактов"""
        with self.assertRaises(DegenerateGrasp):
            parameterize_two_finger(Grasp(points=[[1, 1, 1], [1, 1, 1]]))


class NormalizationTests(SimpleTestCase):
    def test_tetrahedron_scale(self):
        """Тест нормировки тетраэдров с ребром 1 и 2"""
        one = normalize_scale(parameterize(Grasp(points=TETRAHEDRON)))
        two = normalize_scale(parameterize(Grasp(points=2 * TETRAHEDRON)))
        self.assertAlmostEqual(one.values[2], 1 / 3 ** 0.25, places=4)
        self.assertLess(max_component_error(one, two), 1e-9)
        self.assertTrue(one.normalized)

    def test_unit_area_unchanged(self):
        """Тест: при A = 1 вектор не меняется"""
        q = parameterize(Grasp(points=TETRAHEDRON))
        np.testing.assert_array_equal(normalize_scale(q, A=1.0).values, q.values)

    def test_already_normalized(self):
        """Тест повторной нормировки"""
        q = normalize_scale(parameterize(Grasp(points=TETRAHEDRON)))
        with self.assertRaises(NotApplicable):
            normalize_scale(q)

    def test_two_finger_not_applicable(self):
        """Тест: двухпальцевый вектор не нормируется"""
        with self.assertRaises(NotApplicable):
            normalize_scale(parameterize(Grasp(points=[[0, 0, 0], [1, 0, 0]])))

    def test_vectorize_drops_normals(self):
        """Тест: форма без нормалей отбрасывает нормали захвата"""
        grasp = sphere_grasp(derive_rng(4), 4)
        q = vectorize(grasp, VectorShape(4, with_normals=False, normalized=True))
        self.assertEqual(q.w, 6)
        self.assertTrue(q.normalized)

    def test_vectorize_shape_mismatch(self):
        """Тест несовпадения формы"""
        grasp = sphere_grasp(derive_rng(4), 4, with_normals=False)
        with self.assertRaises(ShapeMismatch):
            vectorize(grasp, VectorShape(4, with_normals=True, normalized=False))
        with self.assertRaises(ShapeMismatch):
            vectorize(grasp, VectorShape(5, with_normals=False, normalized=False))


class DistanceTests(SimpleTestCase):
    def _planar(self, values):
        return ParamVector(values=values, n=3, with_normals=True, dimensionality=Dimensionality.PLANAR)

    def test_identity(self):
        """Тест нулевого расстояния"""
        q = parameterize(sphere_grasp(derive_rng(6), 5))
        self.assertEqual(vector_distance(q, q), 0.0)

    def test_azimuth_wraps(self):
        """Тест циклической разности азимутов"""
        a = self._planar([1.0, 1.0, 1.0, 3.1, 0.0, 0.0])
        b = self._planar([1.0, 1.0, 1.0, -3.1, 0.0, 0.0])
        self.assertAlmostEqual(vector_distance(a, b), 2 * np.pi - 6.2, places=12)

    def test_length_difference(self):
        """Тест разности длин"""
        a = self._planar([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
        b = self._planar([1.0, 1.0, 2.0, 0.0, 0.0, 0.0])
        self.assertAlmostEqual(vector_distance(a, b), 1.0)

    def test_shape_mismatch(self):
        """Тест векторов разной формы"""
        a = parameterize(Grasp(points=TETRAHEDRON))
        b = normalize_scale(a)
        with self.assertRaises(ShapeMismatch):
            vector_distance(a, b)


class ReconstructionTests(SimpleTestCase):
    def test_tetrahedron(self):
        """Тест восстановления правильного тетраэдра"""
        grasp = reconstruct(parameterize(Grasp(points=TETRAHEDRON)))
        diffs = grasp.points[:, None] - grasp.points[None]
        distances = np.linalg.norm(diffs, axis=2)[np.triu_indices(4, 1)]
        np.testing.assert_allclose(distances, 1.0, atol=1e-9)

    def test_canonical_frame(self):
        """Тест канонического базиса: первая вершина в начале, d вдоль +x"""
        q = parameterize(sphere_grasp(derive_rng(30), 5, with_normals=False))
        grasp = reconstruct(q)
        np.testing.assert_allclose(grasp.points[0], 0.0, atol=1e-12)
        np.testing.assert_allclose(grasp.points[1], [q.values[2], 0.0, 0.0], atol=1e-9)

    def test_round_trip(self):
        """Тест: parameterize(reconstruct(q)) = q"""
        rng = derive_rng(31)
        for trial in range(200):
            q = parameterize(sphere_grasp(rng, 3 + trial % 4, with_normals=bool(trial % 2)))
            self.assertLess(max_component_error(parameterize(reconstruct(q)), q), 1e-6)

    @tag('slow')
    def test_round_trip_thousand(self):
        """Тест обратного отображения на 1000 захватах"""
        rng = derive_rng(32)
        for trial in range(1000):
            q = parameterize(sphere_grasp(rng, 3 + trial % 5, with_normals=trial % 3 != 0))
            self.assertLess(max_component_error(parameterize(reconstruct(q)), q), 1e-6)

    def test_normalized_round_trip(self):
        """Тест восстановления нормированного вектора"""
        q = normalize_scale(parameterize(sphere_grasp(derive_rng(33), 5)))
        restored = normalize_scale(parameterize(reconstruct(q)))
        self.assertLess(max_component_error(restored, q), 1e-6)

    def test_planar_round_trip(self):
        """Тест восстановления плоского захвата"""
        rng = derive_rng(34)
        for trial in range(50):
            q = parameterize(sphere_grasp(rng, 3 + trial % 4, with_normals=bool(trial % 2), dim=2))
            self.assertLess(max_component_error(parameterize(reconstruct(q)), q), 1e-6)

    def test_infeasible_triangle(self):
        """Тест: сумма углов t1 не меньше pi"""
        q = ParamVector(values=[2.0, 1.5, 1.0], n=3, with_normals=False)
        with self.assertRaises(InfeasibleVector):
            reconstruct(q)


class SerializerTests(SimpleTestCase):
    def test_valid_grasp(self):
        """Тест разбора захвата"""
        serializer = GraspSerializer(data={
            'points': [[0, 0, 0], [1, 0, 0], [0, 1, 0]],
            'normals': [[0, 0, 1], [0, 0, 1], [0, 0, 1]],
        })
        self.assertTrue(serializer.is_valid(), serializer.errors)
        grasp = serializer.to_grasp()
        self.assertEqual(grasp.n, 3)
        self.assertTrue(grasp.has_normals)

    def test_non_unit_normals(self):
        """Тест неединичных нормалей"""
        serializer = GraspSerializer(data={
            'points': [[0, 0, 0], [1, 0, 0], [0, 1, 0]],
            'normals': [[0, 0, 2], [0, 0, 1], [0, 0, 1]],
        })
        self.assertFalse(serializer.is_valid())
        self.assertIn('normals', serializer.errors)

    def test_mixed_dimensions(self):
        """Тест точек разной размерности"""
        serializer = GraspSerializer(data={'points': [[0, 0, 0], [1, 0]]})
        self.assertFalse(serializer.is_valid())

    def test_vector_width_checked(self):
        """Тест длины вектора"""
        serializer = ParamVectorSerializer(data={
            'n': 4, 'with_normals': False, 'normalized': False, 'values': [1.0] * 5,
        })
        self.assertFalse(serializer.is_valid())
        self.assertIn('values', serializer.errors)
