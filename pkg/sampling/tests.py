# sampling/tests.py
import tempfile
from io import StringIO
from math import comb
from pathlib import Path

import numpy as np
import yaml
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from graspid.exceptions import MetadataMismatch
from graspid.rng import derive_rng
from grasp_param.models import Grasp
from mesh_io.contacts import mesh_to_contacts
from mesh_io.models import ContactCandidateSet, PrimitiveKind
from mesh_io.utils import generate_primitive
from .exceptions import InvalidK, InvalidPolicy, InvalidZ, PersistentDegeneracy, TooFewCandidates
from .models import P4, P5, IncompleteGraspPolicy
from .sampler import (
    generate_dataset, sample_grasp, sample_incomplete, sample_z_combinations, split_validation,
    z_combinations,
)
from .storage import load_dataset, save_dataset


def box_contacts():
    return mesh_to_contacts(generate_primitive(PrimitiveKind.BOX, (1.0, 1.4, 0.8)))


def sphere_contacts():
    return mesh_to_contacts(generate_primitive(PrimitiveKind.SPHERE, (0.5,), resolution=2))


def random_grasp(n, seed=0):
    rng = derive_rng(seed)
    points = rng.normal(size=(n, 3))
    normals = rng.normal(size=(n, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return Grasp(points=points, normals=normals)


class CombinationTests(SimpleTestCase):
    def test_three_finger_counts(self):
        """Тест числа трёхпальцевых подзахватов c(n,3)"""
        counts = [len(z_combinations(random_grasp(n), 3)) for n in (4, 5, 6, 7)]
        self.assertEqual(counts, [4, 10, 20, 35])

    def test_four_finger_counts(self):
        """Тест числа четырёхпальцевых подзахватов c(n,4)"""
        counts = [len(z_combinations(random_grasp(n), 4)) for n in (5, 6, 7)]
        self.assertEqual(counts, [5, 15, 35])

    def test_lexicographic_order(self):
        """Тест лексикографического порядка подзахватов"""
        grasp = random_grasp(4)
        subs = z_combinations(grasp, 3)
        np.testing.assert_array_equal(subs[0].points, grasp.points[[0, 1, 2]])
        np.testing.assert_array_equal(subs[-1].points, grasp.points[[1, 2, 3]])
        np.testing.assert_array_equal(subs[-1].normals, grasp.normals[[1, 2, 3]])

    def test_z_out_of_range(self):
        """Тест z вне [3, n]"""
        grasp = random_grasp(4)
        with self.assertRaises(InvalidZ):
            z_combinations(grasp, 5)
        with self.assertRaises(InvalidZ):
            z_combinations(grasp, 2)

    def test_sampled_combinations_distinct(self):
        """Тест: k выбранных подзахватов различны"""
        grasp = random_grasp(5)
        subs = sample_z_combinations(grasp, 3, k=4, rng=derive_rng(1))
        self.assertEqual(len(subs), 4)
        keys = {tuple(map(tuple, s.points)) for s in subs}
        self.assertEqual(len(keys), 4)

    def test_k_equal_to_count_takes_all(self):
        """Тест: при k = c(n,z) берутся все комбинации по порядку"""
        grasp = random_grasp(4)
        subs = sample_z_combinations(grasp, 3, k=4)
        expected = z_combinations(grasp, 3)
        for a, b in zip(subs, expected):
            np.testing.assert_array_equal(a.points, b.points)

    def test_k_too_large(self):
        """Тест k больше числа комбинаций"""
        with self.assertRaises(InvalidK):
            sample_z_combinations(random_grasp(4), 3, k=5, rng=derive_rng(1))
        with self.assertRaises(InvalidK):
            sample_z_combinations(random_grasp(4), 3, k=0, rng=derive_rng(1))

    def test_binomial_formula(self):
        """Тест совпадения с биномиальным коэффициентом"""
        for n in range(3, 9):
            for z in range(3, n + 1):
                self.assertEqual(len(z_combinations(random_grasp(n), z)), comb(n, z))


class PolicyTests(SimpleTestCase):
    def _frequencies(self, policy, draws=100_000):
        rng = derive_rng(7)
        zs = np.array([policy.draw(rng) for _ in range(draws)])
        return {z: float(np.mean(zs == z)) for z in policy.support}

    def test_p4_frequencies(self):
        """Тест частот z для p4"""
        freq = self._frequencies(P4)
        self.assertAlmostEqual(freq[3], 0.4, delta=0.01)
        self.assertAlmostEqual(freq[4], 0.6, delta=0.01)

    def test_p5_frequencies(self):
        """Тест частот z для p5"""
        freq = self._frequencies(P5)
        self.assertAlmostEqual(freq[3], 0.2, delta=0.01)
        self.assertAlmostEqual(freq[4], 0.3, delta=0.01)
        self.assertAlmostEqual(freq[5], 0.5, delta=0.01)

    def test_invalid_policies(self):
        """Тест недопустимых распределений"""
        with self.assertRaises(InvalidPolicy):
            IncompleteGraspPolicy.from_dict({3: 0.5, 4: 0.4})
        with self.assertRaises(InvalidPolicy):
            IncompleteGraspPolicy.from_dict({2: 0.5, 3: 0.5})
        with self.assertRaises(InvalidPolicy):
            IncompleteGraspPolicy.from_dict({})

    def test_policy_exceeding_n(self):
        """Тест политики, допускающей z > n"""
        with self.assertRaises(InvalidPolicy):
            P5.check_for(4)

    def test_full_policy(self):
        """Тест вырожденной политики z = n"""
        policy = IncompleteGraspPolicy.full(4)
        rng = derive_rng(3)
        self.assertTrue(all(policy.draw(rng) == 4 for _ in range(50)))

    def test_sample_incomplete_support(self):
        """Тест: неполный захват имеет z из носителя"""
        contacts = sphere_contacts()
        rng = derive_rng(11)
        sizes = {sample_incomplete(contacts, P5, rng).n for _ in range(60)}
        self.assertTrue(sizes <= {3, 4, 5})
        self.assertGreater(len(sizes), 1)


class SampleGraspTests(SimpleTestCase):
    def test_distinct_contacts(self):
        """Тест: контакты захвата различны и взяты из набора"""
        contacts = box_contacts()
        grasp = sample_grasp(contacts, 4, True, derive_rng(1))
        self.assertEqual(grasp.n, 4)
        self.assertEqual(len({tuple(p) for p in grasp.points}), 4)
        for point in grasp.points:
            self.assertTrue(np.any(np.all(contacts.points == point, axis=1)))

    def test_without_normals(self):
        """Тест захвата без нормалей"""
        grasp = sample_grasp(box_contacts(), 4, False, derive_rng(2))
        self.assertFalse(grasp.has_normals)

    def test_deterministic(self):
        """Тест воспроизводимости выбора"""
        a = sample_grasp(sphere_contacts(), 5, True, derive_rng(3, stream=9))
        b = sample_grasp(sphere_contacts(), 5, True, derive_rng(3, stream=9))
        np.testing.assert_array_equal(a.points, b.points)

    def test_too_few_candidates(self):
        """Тест набора меньше n"""
        contacts = box_contacts().subset([0, 1, 2])
        with self.assertRaises(TooFewCandidates):
            sample_grasp(contacts, 4, True, derive_rng(1))

    def test_flat_plate_persistent_degeneracy(self):
        """Тест: плоская пластина даёт только вырожденные четырёхпальцевые захваты"""
        xs, ys = np.meshgrid(np.arange(4.0), np.arange(4.0))
        points = np.column_stack([xs.ravel(), ys.ravel(), np.zeros(16)])
        normals = np.tile([0.0, 0.0, -1.0], (16, 1))
        plate = ContactCandidateSet(points=points, normals=normals, source_mesh='plate')
        with self.assertRaises(PersistentDegeneracy):
            sample_grasp(plate, 4, True, derive_rng(1), max_retries=5)


class DatasetTests(SimpleTestCase):
    def setUp(self):
        self.objects = [box_contacts(), sphere_contacts()]

    def test_counts_and_shape(self):
        """Тест размеров датасета"""
        dataset = generate_dataset(self.objects, n=4, N=25, seed=5, class_names=('box', 'sphere'))
        self.assertEqual(dataset.M, 50)
        self.assertEqual(dataset.vectors.shape, (50, 14))
        self.assertEqual(dataset.class_counts.tolist(), [25, 25])
        self.assertTrue(dataset.shape.normalized)

    def test_deterministic(self):
        """Тест воспроизводимости генерации"""
        a = generate_dataset(self.objects, n=4, N=10, seed=5)
        b = generate_dataset(self.objects, n=4, N=10, seed=5)
        np.testing.assert_array_equal(a.vectors, b.vectors)

    def test_worker_count_independent(self):
        """Тест независимости от числа воркеров"""
        single = generate_dataset(self.objects, n=4, N=12, seed=8, workers=1)
        parallel = generate_dataset(self.objects, n=4, N=12, seed=8, workers=3)
        np.testing.assert_array_equal(single.vectors, parallel.vectors)

    def test_seed_required(self):
        """Тест: генерация без сида запрещена"""
        with self.assertRaises(ValueError):
            generate_dataset(self.objects, n=4, N=5)

    def test_noise_changes_rows(self):
        """Тест шума на контактах при генерации"""
        clean = generate_dataset(self.objects, n=4, N=5, seed=5)
        noisy = generate_dataset(self.objects, n=4, N=5, seed=5, sigma=0.01)
        self.assertFalse(np.array_equal(clean.vectors, noisy.vectors))
        self.assertEqual(noisy.sigma, 0.01)

    def test_split_fraction(self):
        """Тест разбиения 15% на класс"""
        dataset = generate_dataset(self.objects, n=3, N=40, seed=2)
        train, validation = split_validation(dataset, 0.15)
        self.assertEqual(validation.class_counts.tolist(), [6, 6])
        self.assertEqual(train.class_counts.tolist(), [34, 34])
        again_train, _ = split_validation(dataset, 0.15)
        np.testing.assert_array_equal(train.vectors, again_train.vectors)

    def test_save_load(self):
        """Тест сохранения и загрузки датасета"""
        dataset = generate_dataset(self.objects, n=4, N=8, seed=3, class_names=('box', 'sphere'))
        with tempfile.TemporaryDirectory() as tmp:
            save_dataset(dataset, Path(tmp) / 'train')
            loaded = load_dataset(Path(tmp) / 'train')
        np.testing.assert_array_equal(loaded.vectors, dataset.vectors)
        self.assertEqual(loaded.class_names, ('box', 'sphere'))
        self.assertEqual(loaded.shape, dataset.shape)

    def test_load_width_mismatch(self):
        """Тест несовпадения манифеста и таблицы"""
        dataset = generate_dataset(self.objects, n=4, N=4, seed=3)
        with tempfile.TemporaryDirectory() as tmp:
            manifest, _ = save_dataset(dataset, Path(tmp) / 'train')
            text = manifest.read_text().replace('"with_normals": true', '"with_normals": false')
            manifest.write_text(text)
            with self.assertRaises(MetadataMismatch):
                load_dataset(Path(tmp) / 'train')


class GenDataCommandTests(SimpleTestCase):
    def _config(self, tmp, **extra):
        config = {
            'seed': 21,
            'objects': [
                {'primitive': 'box', 'dims': [1, 1, 1]},
                {'name': 'ellipsoid', 'primitive': 'sphere', 'dims': [0.5], 'scale': [1.0, 1.4, 0.7]},
                {'primitive': 'cylinder', 'dims': [0.4, 1.2], 'resolution': 16},
            ],
            'grasp': {'n': 4, 'with_normals': True},
            'data': {'samples_per_object': 100},
            'paths': {'dataset': 'out/train'},
            **extra,
        }
        path = Path(tmp) / 'run.yaml'
        path.write_text(yaml.safe_dump(config))
        return path

    def test_three_primitives(self):
        """Тест: 3 примитива, N = 100 -> 300 строк, повтор даёт тот же файл"""
        with tempfile.TemporaryDirectory() as tmp:
            config = self._config(tmp)
            call_command('gen_data', config=str(config), stdout=StringIO())
            table = Path(tmp) / 'out' / 'train.csv'
            first = table.read_bytes()
            dataset = load_dataset(table)
            call_command('gen_data', config=str(config), workers=2, stdout=StringIO())
            second = table.read_bytes()
        self.assertEqual(dataset.M, 300)
        self.assertEqual(dataset.class_names, ('box', 'ellipsoid', 'cylinder'))
        self.assertEqual(first, second)

    def test_missing_mesh_fails_fast(self):
        """Тест: отсутствующая сетка - ошибка проверки до генерации"""
        with tempfile.TemporaryDirectory() as tmp:
            config = self._config(tmp, objects=[{'mesh': 'nowhere.stl'}, {'primitive': 'box', 'dims': [1, 1, 1]}])
            with self.assertRaises(CommandError) as ctx:
                call_command('gen_data', config=str(config))
            self.assertEqual(ctx.exception.returncode, 2)
            self.assertFalse((Path(tmp) / 'out').exists())

    def test_missing_seed(self):
        """Тест: сид обязателен"""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'run.yaml'
            path.write_text(yaml.safe_dump({'grasp': {'n': 4}, 'objects': []}))
            with self.assertRaises(CommandError) as ctx:
                call_command('gen_data', config=str(path))
            self.assertEqual(ctx.exception.returncode, 2)
