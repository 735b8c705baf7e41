# mesh_io/tests.py
import tempfile
from pathlib import Path

import numpy as np
import trimesh
from django.test import SimpleTestCase
from scipy.spatial import ConvexHull
from scipy.spatial.transform import Rotation

from graspid.rng import derive_rng
from .contacts import export_contacts_csv, load_contacts_csv, mesh_to_contacts, perturb_contacts
from .exceptions import EmptyMesh, InvalidDims, NotOriented, ParseError
from .loaders import export_mesh, from_trimesh, load_mesh, load_mesh_file
from .models import ContactCandidateSet, PrimitiveKind, TriangleMesh
from .utils import generate_primitive, mesh_surface_area, mesh_volume, scale_mesh

TRIANGLE_OFF = b"OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n"


class LoadMeshTests(SimpleTestCase):
    def test_single_triangle_off(self):
        """Тест наименьшей допустимой сетки"""
        mesh = load_mesh(TRIANGLE_OFF, 'off', name='tri')
        self.assertEqual(mesh.vertex_count, 3)
        self.assertEqual(mesh.face_count, 1)
        self.assertFalse(mesh.oriented)

    def test_zero_area_face_dropped(self):
        """Тест удаления грани нулевой площади"""
        obj = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 0 0\nf 1 2 3\nf 1 2 4\n"
        mesh = load_mesh(obj, 'obj')
        self.assertEqual(mesh.face_count, 1)

    def test_only_degenerate_faces(self):
        """Тест сетки без допустимых граней"""
        obj = b"v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n"
        with self.assertRaises((EmptyMesh, ParseError)):
            load_mesh(obj, 'obj')

    def test_malformed_off(self):
        """Тест повреждённого файла"""
        with self.assertRaises((ParseError, EmptyMesh)):
            load_mesh(b"OFF\n3 1 0\n0 0 0\nxx yy\n", 'off')

    def test_unknown_format(self):
        """Тест неизвестного формата"""
        with self.assertRaises(ValueError):
            load_mesh(TRIANGLE_OFF, 'ply')

    def test_stl_round_trip_keeps_orientation(self):
        """Тест: куб, сохранённый в STL, загружается замкнутым и ориентированным"""
        cube = generate_primitive(PrimitiveKind.BOX, (1, 1, 1))
        with tempfile.TemporaryDirectory() as tmp:
            path = export_mesh(cube, Path(tmp) / 'cube.stl')
            loaded = load_mesh_file(path)
        self.assertEqual(loaded.name, 'cube')
        self.assertEqual(loaded.face_count, 12)
        self.assertTrue(loaded.oriented)
        self.assertAlmostEqual(mesh_volume(loaded), 1.0, places=9)

    def test_inverted_mesh_fixed(self):
        """Тест: вывернутая сетка переориентируется"""
        tm = trimesh.creation.box(extents=(1, 1, 1))
        tm.invert()
        mesh = from_trimesh(tm, 'inverted')
        self.assertTrue(mesh.oriented)
        self.assertAlmostEqual(mesh_volume(mesh), 1.0, places=9)

    def test_face_index_out_of_range(self):
        """Тест индекса грани вне диапазона"""
        with self.assertRaises(ValueError):
            TriangleMesh(vertices=np.zeros((3, 3)), faces=[[0, 1, 5]])


class ContactsTests(SimpleTestCase):
    def test_single_triangle_contact(self):
        """Тест центра и внутренней нормали треугольника"""
        contacts = mesh_to_contacts(load_mesh(TRIANGLE_OFF, 'off'))
        self.assertEqual(len(contacts), 1)
        np.testing.assert_allclose(contacts.points[0], [1 / 3, 1 / 3, 0], atol=1e-12)
        np.testing.assert_allclose(contacts.normals[0], [0, 0, -1], atol=1e-12)

    def test_cube_normals_point_inward(self):
        """Тест: нормали куба смотрят внутрь"""
        cube = generate_primitive(PrimitiveKind.BOX, (1, 1, 1))
        contacts = mesh_to_contacts(cube)
        self.assertEqual(len(contacts), 12)
        side = np.einsum('ij,ij->i', contacts.normals, contacts.points)
        self.assertTrue(np.all(side < 0))
        self.assertFalse(contacts.orientation_inferred)

    def test_normals_oppose_outward(self):
        """Тест: нормаль контакта противоположна внешней нормали грани"""
        mesh = generate_primitive(PrimitiveKind.SPHERE, (1.0,), resolution=2)
        contacts = mesh_to_contacts(mesh)
        outward = mesh.to_trimesh().face_normals
        dots = np.einsum('ij,ij->i', contacts.normals, outward)
        np.testing.assert_allclose(dots, -1.0, atol=1e-9)

    def test_unoriented_mesh_inferred(self):
        """Тест восстановления нормалей для незамкнутой сетки"""
        tm = trimesh.creation.icosphere(subdivisions=1)
        open_tm = trimesh.Trimesh(vertices=tm.vertices, faces=tm.faces[1:], process=False)
        mesh = from_trimesh(open_tm, 'open')
        self.assertFalse(mesh.oriented)
        with self.assertLogs('mesh_io', level='WARNING'):
            contacts = mesh_to_contacts(mesh)
        self.assertTrue(contacts.orientation_inferred)
        self.assertTrue(np.all(np.einsum('ij,ij->i', contacts.normals, contacts.points) < 0))

    def test_perturb_zero_sigma(self):
        """Тест: sigma = 0 не меняет набор"""
        contacts = mesh_to_contacts(generate_primitive(PrimitiveKind.BOX, (1, 1, 1)))
        same = perturb_contacts(contacts, 0.0, derive_rng(1))
        np.testing.assert_array_equal(same.points, contacts.points)

    def test_perturb_std(self):
        """Тест СКО шума на 10^4 точках"""
        points = np.zeros((10_000, 3))
        normals = np.tile([0.0, 0.0, 1.0], (10_000, 1))
        contacts = ContactCandidateSet(points=points, normals=normals)
        noisy = perturb_contacts(contacts, 0.01, derive_rng(2))
        std = noisy.points.std(axis=0)
        np.testing.assert_allclose(std, 0.01, rtol=0.05)
        np.testing.assert_array_equal(noisy.normals, normals)

    def test_perturb_deterministic(self):
        """Тест детерминированности шума"""
        contacts = mesh_to_contacts(generate_primitive(PrimitiveKind.SPHERE, (1.0,)))
        a = perturb_contacts(contacts, 0.05, derive_rng(3, stream=1))
        b = perturb_contacts(contacts, 0.05, derive_rng(3, stream=1))
        np.testing.assert_array_equal(a.points, b.points)

    def test_negative_sigma(self):
        """Тест отрицательной sigma"""
        contacts = mesh_to_contacts(generate_primitive(PrimitiveKind.BOX, (1, 1, 1)))
        with self.assertRaises(ValueError):
            perturb_contacts(contacts, -1.0, derive_rng(1))

    def test_empty_mesh_contacts(self):
        """Тест: у пустой сетки нет контактов"""
        mesh = TriangleMesh(vertices=np.zeros((0, 3)), faces=np.zeros((0, 3), dtype=np.int64), name='empty')
        with self.assertRaises(EmptyMesh):
            mesh_to_contacts(mesh)

    def test_csv_export(self):
        """Тест выгрузки контактов в CSV"""
        contacts = mesh_to_contacts(generate_primitive(PrimitiveKind.CYLINDER, (1.0, 2.0)))
        with tempfile.TemporaryDirectory() as tmp:
            path = export_contacts_csv(contacts, Path(tmp) / 'cyl.csv')
            self.assertEqual(path.read_text().splitlines()[0], 'px,py,pz,nx,ny,nz')
            loaded = load_contacts_csv(path)
        np.testing.assert_array_equal(loaded.points, contacts.points)
        self.assertEqual(loaded.source_mesh, 'cyl')


class PrimitiveTests(SimpleTestCase):
    def test_unit_box(self):
        """Тест единичного куба"""
        box = generate_primitive(PrimitiveKind.BOX, (1, 1, 1))
        self.assertEqual(box.face_count, 12)
        self.assertAlmostEqual(mesh_volume(box), 1.0, places=9)
        self.assertAlmostEqual(mesh_surface_area(box), 6.0, places=9)

    def test_sphere_volume(self):
        """Тест объёма сферы"""
        sphere = generate_primitive(PrimitiveKind.SPHERE, (1.0,), resolution=4)
        self.assertAlmostEqual(mesh_volume(sphere) / (4 * np.pi / 3), 1.0, delta=0.02)

    def test_cylinder_area(self):
        """Тест площади цилиндра"""
        cylinder = generate_primitive(PrimitiveKind.CYLINDER, (1.0, 2.0), resolution=128)
        self.assertAlmostEqual(mesh_surface_area(cylinder) / (6 * np.pi), 1.0, delta=0.02)

    def test_invalid_dims(self):
        """Тест недопустимых размеров"""
        with self.assertRaises(InvalidDims):
            generate_primitive(PrimitiveKind.BOX, (1, -1, 1))
        with self.assertRaises(InvalidDims):
            generate_primitive(PrimitiveKind.SPHERE, (1, 2))
        with self.assertRaises(InvalidDims):
            generate_primitive(PrimitiveKind.CYLINDER, (1, 1), resolution=4)

    def test_open_surface_volume(self):
        """Тест: объём незамкнутой сетки не определён"""
        mesh = load_mesh(TRIANGLE_OFF, 'off')
        self.assertAlmostEqual(mesh_surface_area(mesh), 0.5)
        with self.assertRaises(NotOriented):
            mesh_volume(mesh)


class ScaleTests(SimpleTestCase):
    def test_identity_scale(self):
        """Тест единичного масштаба"""
        box = generate_primitive(PrimitiveKind.BOX, (1, 2, 3))
        np.testing.assert_array_equal(scale_mesh(box, 1, 1, 1).vertices, box.vertices)

    def test_box_scaled(self):
        """Тест растяжения куба"""
        box = generate_primitive(PrimitiveKind.BOX, (1, 1, 1))
        self.assertAlmostEqual(mesh_volume(scale_mesh(box, 2, 1, 1)), 2.0, places=9)

    def test_ellipsoid(self):
        """Тест: растянутая сфера - эллипсоид"""
        sphere = generate_primitive(PrimitiveKind.SPHERE, (1.0,), resolution=4)
        volume = mesh_volume(scale_mesh(sphere, 0.5, 1.0, 1.5))
        self.assertAlmostEqual(volume / (4 * np.pi / 3 * 0.75), 1.0, delta=0.02)

    def test_uniform_scale_powers(self):
        """Тест: объём растёт как s^3, площадь как s^2"""
        mesh = generate_primitive(PrimitiveKind.CYLINDER, (0.7, 1.3))
        scaled = scale_mesh(mesh, 1.7, 1.7, 1.7)
        self.assertAlmostEqual(mesh_volume(scaled) / mesh_volume(mesh), 1.7 ** 3, delta=1e-9 * 1.7 ** 3)
        self.assertAlmostEqual(mesh_surface_area(scaled) / mesh_surface_area(mesh), 1.7 ** 2, delta=1e-9 * 1.7 ** 2)

    def test_nonpositive_factor(self):
        """Тест неположительного множителя"""
        with self.assertRaises(InvalidDims):
            scale_mesh(generate_primitive(PrimitiveKind.BOX, (1, 1, 1)), 0, 1, 1)

    def test_volume_rigid_invariance(self):
        """Тест инвариантности объёма к движению"""
        mesh = generate_primitive(PrimitiveKind.SPHERE, (1.0,))
        rotation = Rotation.random(random_state=derive_rng(4)).as_matrix()
        moved = TriangleMesh(
            vertices=mesh.vertices @ rotation.T + [3.0, -2.0, 5.0],
            faces=mesh.faces,
            oriented=True,
        )
        self.assertAlmostEqual(mesh_volume(moved) / mesh_volume(mesh), 1.0, delta=1e-9)

    def test_convex_hull_volume_oracle(self):
        """Тест объёма выпуклой сетки против ConvexHull"""
        points = derive_rng(5).normal(size=(60, 3))
        mesh = from_trimesh(trimesh.convex.convex_hull(points), 'hull')
        self.assertAlmostEqual(mesh_volume(mesh), ConvexHull(points).volume, delta=1e-9)
