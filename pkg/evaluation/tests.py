# evaluation/tests.py
import csv
import json
import tempfile
from dataclasses import replace
from io import StringIO
from pathlib import Path
from types import SimpleNamespace
from unittest import mock

import numpy as np
import yaml
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, tag

from classifiers.exceptions import EmptyClass
from classifiers.kde import fit_kde
from classifiers.models import ClassDistribution
from classifiers.predictors import predict
from graspid.rng import stream_id
from grasp_param.exceptions import DegenerateGrasp
from grasp_param.models import Grasp, VectorShape
from grasp_param.parameterization import vectorize
from mesh_io.contacts import mesh_to_contacts
from mesh_io.exceptions import NotOriented
from mesh_io.models import PrimitiveKind
from mesh_io.utils import generate_primitive
from recognition.models import Method
from recognition.runner import STREAM_QUERY
from recognition.samplers import ContactSampler
from sampling.exceptions import PersistentDegeneracy
from sampling.sampler import generate_dataset
from .exceptions import ConfigMismatch, DegenerateVariance, NotNormalizedModel
from .geometry import family_dataset, geometry_recognition, primitive_variations, variation_factors
from .models import TrialConfig
from .quality import circular_mean, grasp_quality, quality_correlation, quality_trials
from .reports import write_report
from .trials import data_ablation, run_trials, scaled_object_trials, subsample, success_vs_samples

NAMES = ('box', 'sphere', 'cylinder')


def primitive_contacts():
    return [
        mesh_to_contacts(generate_primitive(PrimitiveKind.BOX, (1.0, 1.4, 0.8))),
        mesh_to_contacts(generate_primitive(PrimitiveKind.SPHERE, (0.6,), resolution=2)),
        mesh_to_contacts(generate_primitive(PrimitiveKind.CYLINDER, (0.3, 1.5), resolution=16)),
    ]


def stub_model(n=4, m=3, normalized=True, names=None):
    """Заглушка модели: только метаданные; ответы подменяются через mock."""
    return SimpleNamespace(
        shape=VectorShape(n, True, normalized),
        class_names=tuple(names or NAMES[:m]),
        m=m,
    )


def trial_config(objects, **kwargs):
    return TrialConfig(objects=objects, class_names=NAMES[:len(objects)], n=4, **kwargs)


class TrialsTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.contacts = primitive_contacts()
        cls.dataset = generate_dataset(cls.contacts, n=4, N=40, seed=5, class_names=NAMES)
        cls.model = fit_kde(cls.dataset)

    def test_oracle(self):
        """Тест: оракул - 100% успеха за один захват"""
        config = trial_config(self.contacts, method=Method.IC, trials=5)
        answers = [ClassDistribution.one_hot(3, label) for label in range(3) for _ in range(5)]
        with mock.patch('recognition.runner.predict', side_effect=answers):
            report = run_trials(config, stub_model())
        overall = report.overall()
        self.assertEqual(overall['success'], 100.0)
        self.assertEqual(overall['converged'], 15)
        self.assertEqual(overall['samples_converged']['mean'], 1.0)
        self.assertEqual(overall['samples_not_converged']['count'], 0)

    def test_uniform_chance_floor(self):
        """Тест: неинформативный классификатор - успех 1/m при исчерпании бюджета"""
        config = trial_config(self.contacts, trials=4, max_iterations=6)
        with mock.patch('recognition.runner.log_likelihoods', return_value=np.full((1, 3), -2.0)):
            report = run_trials(config, stub_model())
        overall = report.overall()
        self.assertAlmostEqual(overall['success'], 100.0 / 3)
        self.assertEqual(overall['converged_success'], 0.0)
        self.assertEqual(overall['not_converged'], 12)
        self.assertEqual(overall['samples_not_converged']['mean'], 6.0)

    def test_confusion_row_stochastic(self):
        """Тест: строки матрицы ошибок суммируются в 1"""
        report = run_trials(trial_config(self.contacts, trials=6), self.model)
        np.testing.assert_allclose(report.confusion().sum(axis=1), 1.0, atol=1e-9)
        self.assertEqual(report.confusion_counts().sum(), 18)
        for rates in report.per_object().values():
            self.assertTrue(0.0 <= rates['success'] <= 100.0)

    def test_workers_do_not_change_report(self):
        """Тест: итог не зависит от числа воркеров"""
        serial = run_trials(trial_config(self.contacts, trials=4, workers=1), self.model)
        parallel = run_trials(trial_config(self.contacts, trials=4, workers=2), self.model)
        self.assertEqual(serial.records, parallel.records)

    def test_report_files_byte_stable(self):
        """Тест: повторный запуск с тем же сидом даёт одинаковые файлы"""
        with tempfile.TemporaryDirectory() as tmp:
            first = write_report(run_trials(trial_config(self.contacts, trials=3), self.model), Path(tmp) / 'a')
            second = write_report(run_trials(trial_config(self.contacts, trials=3), self.model), Path(tmp) / 'b')
            for a, b in zip(first, second):
                self.assertEqual(a.read_bytes(), b.read_bytes())
            with open(first[1], encoding='utf-8') as fh:
                rows = list(csv.DictReader(fh))
            self.assertEqual(len(rows), 9)
            self.assertEqual(rows[0]['object'], 'box')
            self.assertIn(rows[0]['correct'], ('0', '1'))

    def test_config_mismatch(self):
        """Тест: классы модели не совпадают с протоколом"""
        with self.assertRaises(ConfigMismatch):
            run_trials(trial_config(self.contacts), stub_model(names=('a', 'b', 'c')))
        with self.assertRaises(ConfigMismatch):
            run_trials(trial_config(self.contacts), stub_model(n=5))

    def test_curve_first_point_is_one_shot_accuracy(self):
        """Тест: успех при k = 1 равен точности одиночного ответа на тех же захватах"""
        config = trial_config(self.contacts, method=Method.IC, trials=6)
        curve = success_vs_samples(config, self.model, max_k=4)
        self.assertEqual([point['k'] for point in curve], [1, 2, 3, 4])

        hits = 0
        for label, contacts in enumerate(self.contacts):
            for trial in range(6):
                sampler = ContactSampler(contacts, n=4, seed=0, stream=stream_id(STREAM_QUERY, label, trial))
                grasp = sampler.next_grasp()
                hits += predict(self.model, vectorize(grasp, self.model.shape)).argmax == label
        self.assertAlmostEqual(curve[0]['success'], 100.0 * hits / 18)

    def test_full_fraction_reproduces_trials(self):
        """Тест: доля 1.0 повторяет обычную серию опытов"""
        config = trial_config(self.contacts, trials=3)
        curve = data_ablation(config, self.dataset, [1.0])
        report = run_trials(config, self.model)
        self.assertEqual(curve[0]['rows'], self.dataset.M)
        self.assertEqual(curve[0]['success'], report.overall()['success'])
        self.assertAlmostEqual(curve[0]['mean_samples'], np.mean([r.physical_grasps for r in report.records]))

    def test_subsample_empty_class(self):
        """Тест: слишком малая доля оставляет класс пустым"""
        with self.assertRaises(EmptyClass):
            subsample(self.dataset, 0.01, seed=0)
        half = subsample(self.dataset, 0.5, seed=0)
        np.testing.assert_array_equal(half.class_counts, [20, 20, 20])

    def test_unit_scale_matches_unscaled(self):
        """Тест: масштаб 1 совпадает с опытами без масштабирования"""
        config = trial_config(self.contacts, trials=3)
        scaled = scaled_object_trials(config, self.model, (1.0, 1.0))
        self.assertEqual(scaled.records, run_trials(config, self.model).records)

    def test_scaled_requires_normalized_model(self):
        """Тест: модель без нормировки масштаба"""
        with self.assertRaises(NotNormalizedModel):
            scaled_object_trials(trial_config(self.contacts), stub_model(normalized=False), (0.5, 2.0))

    def test_trial_config_validation(self):
        """Тест проверки протокола"""
        with self.assertRaises(ValueError):
            trial_config(self.contacts, trials=0)
        with self.assertRaises(ValueError):
            trial_config(self.contacts, threshold=1.5)
        with self.assertRaises(ValueError):
            trial_config(self.contacts, scale_range=(2.0, 1.0))


class QualityTests(SimpleTestCase):
    def setUp(self):
        self.cube = generate_primitive(PrimitiveKind.BOX, (1.0, 1.0, 1.0))

    def test_inscribed_tetrahedron(self):
        """Тест: правильный тетраэдр в единичном кубе занимает 1/3 объёма"""
        points = np.array([[0, 0, 0], [1, 1, 0], [1, 0, 1], [0, 1, 1]], dtype=np.float64) - 0.5
        quality = grasp_quality(Grasp(points=points), self.cube)
        self.assertAlmostEqual(quality.volume_ratio, 1 / 3, places=9)
        self.assertIsNone(quality.mean_normal_angle)

    def test_identical_normals(self):
        """Тест: одинаковые нормали - средний угол 0"""
        points = np.array([[0, 0, 0], [0.4, 0, 0], [0, 0.4, 0], [0, 0, 0.4]]) - 0.2
        normals = np.tile([0.0, 0.0, 1.0], (4, 1))
        quality = grasp_quality(Grasp(points=points, normals=normals), self.cube)
        self.assertAlmostEqual(quality.mean_normal_angle, 0.0, places=12)

    def test_circular_mean_wraps(self):
        """Тест: круговое среднее 350 и 10 градусов - 0"""
        self.assertAlmostEqual(circular_mean(np.radians([350.0, 10.0])), 0.0, places=12)
        self.assertAlmostEqual(circular_mean([0.5, 0.5, 0.5]), 0.5, places=12)

    def test_degenerate_grasp(self):
        """Тест: плоский или трёхточечный захват не имеет объёма"""
        flat = np.array([[0, 0, 0], [0.3, 0, 0], [0, 0.3, 0], [0.3, 0.3, 0]], dtype=np.float64)
        with self.assertRaises(DegenerateGrasp):
            grasp_quality(Grasp(points=flat), self.cube)
        with self.assertRaises(DegenerateGrasp):
            grasp_quality(Grasp(points=flat[:3] + [0, 0, 0.1]), self.cube)

    def test_not_oriented(self):
        """Тест: объём неориентированной сетки не определён"""
        points = np.array([[0, 0, 0], [1, 1, 0], [1, 0, 1], [0, 1, 1]], dtype=np.float64) - 0.5
        with self.assertRaises(NotOriented):
            grasp_quality(Grasp(points=points), replace(self.cube, oriented=False))

    def test_spearman_monotone(self):
        """Тест: монотонные пары дают rho = 1"""
        quality = np.arange(120, dtype=np.float64)
        result = quality_correlation(quality, quality ** 2)
        self.assertAlmostEqual(result['rho'], 1.0)
        self.assertTrue(result['significant'])
        self.assertEqual(result['pairs'], 120)

    def test_constant_certainty(self):
        """Тест: постоянная уверенность"""
        with self.assertRaises(DegenerateVariance):
            quality_correlation(np.arange(100), np.full(100, 0.5))

    def test_too_few_pairs(self):
        """Тест: меньше 100 пар"""
        with self.assertRaises(ValueError):
            quality_correlation(np.arange(99), np.arange(99))

    def test_quality_trials(self):
        """Тест пар (качество, уверенность) по объектам модели"""
        meshes = [
            generate_primitive(PrimitiveKind.BOX, (1.0, 1.4, 0.8)),
            generate_primitive(PrimitiveKind.CYLINDER, (0.3, 1.5), resolution=16),
        ]
        contacts = [mesh_to_contacts(mesh) for mesh in meshes]
        model = fit_kde(generate_dataset(contacts, n=4, N=30, seed=1, class_names=('box', 'cylinder')))
        rows = quality_trials(meshes, model, samples=10, seed=3)
        self.assertEqual(len(rows), 20)
        self.assertEqual([r.object for r in rows[:1] + rows[-1:]], ['box', 'cylinder'])
        for row in rows:
            self.assertTrue(0.0 < row.volume_ratio <= 1.0)
            self.assertTrue(0.0 <= row.certainty <= 1.0)
            self.assertTrue(0.0 <= row.mean_normal_angle <= np.pi)
        self.assertEqual(rows, quality_trials(meshes, model, samples=10, seed=3))

    def test_three_finger_trials_skipped(self):
        """Тест: захваты из трёх пальцев без объёма пропускаются, серия не прерывается"""
        meshes = [
            generate_primitive(PrimitiveKind.BOX, (1.0, 1.4, 0.8)),
            generate_primitive(PrimitiveKind.CYLINDER, (0.3, 1.5), resolution=16),
        ]
        contacts = [mesh_to_contacts(mesh) for mesh in meshes]
        model = fit_kde(generate_dataset(contacts, n=3, N=30, seed=1, class_names=('box', 'cylinder')))
        rows = quality_trials(meshes, model, samples=5, seed=3)
        self.assertEqual(len(rows), 10)
        for row in rows:
            self.assertFalse(row.measured)
            self.assertIsNone(row.mean_normal_angle)
            self.assertTrue(0.0 <= row.certainty <= 1.0)
            self.assertEqual(row.as_row()['volume_ratio'], '')


class GeometryTests(SimpleTestCase):
    def test_variation_factors(self):
        """Тест: множители растяжения в диапазоне и воспроизводимы"""
        factors = variation_factors('box', 20, (0.5, 1.5), seed=2)
        self.assertEqual(factors.shape, (20, 3))
        self.assertTrue(np.all((factors >= 0.5) & (factors <= 1.5)))
        np.testing.assert_array_equal(factors, variation_factors('box', 20, (0.5, 1.5), seed=2))
        self.assertFalse(np.array_equal(factors, variation_factors('cylinder', 20, (0.5, 1.5), seed=2)))

    def test_unknown_family(self):
        """Тест: неизвестное семейство"""
        with self.assertRaises(ValueError):
            primitive_variations('torus', 2)

    def test_variations(self):
        """Тест: вариации - растянутые копии базового примитива"""
        meshes = primitive_variations('box', 3, seed=1)
        self.assertEqual([m.name for m in meshes], ['box_000', 'box_001', 'box_002'])
        extents = meshes[0].vertices.max(axis=0) - meshes[0].vertices.min(axis=0)
        np.testing.assert_allclose(extents, variation_factors('box', 1, seed=1)[0])
        self.assertTrue(all(m.oriented for m in meshes))

    def test_family_dataset(self):
        """Тест: строки вариаций размечены семейством"""
        variations = {family: primitive_variations(family, 2, seed=0) for family in ('box', 'cylinder')}
        dataset = family_dataset(variations, n=4, samples_per_variation=5, seed=0)
        self.assertEqual(dataset.class_names, ('box', 'cylinder'))
        np.testing.assert_array_equal(dataset.class_counts, [10, 10])
        self.assertTrue(dataset.shape.normalized)

    def test_rate_table(self):
        """Тест: таблица долей по запросам"""
        model = stub_model(names=('box', 'ellipsoid', 'cylinder'))
        queries = primitive_variations('box', 2, seed=4)
        with mock.patch('recognition.runner.predict', return_value=ClassDistribution.one_hot(3, 2)):
            rows = geometry_recognition(model, queries, trials=3, method=Method.IC)
        self.assertEqual([row['query'] for row in rows], ['box_000', 'box_001'])
        self.assertEqual(rows[0]['rates'], {'box': 0.0, 'ellipsoid': 0.0, 'cylinder': 100.0})
        self.assertEqual(rows[0]['predicted'], 'cylinder')

    def test_failed_trials_still_reported(self):
        """Тест: опыты без невырожденных захватов не прерывают таблицу"""
        model = stub_model(names=('box', 'ellipsoid', 'cylinder'))
        flat = generate_primitive(PrimitiveKind.BOX, (1.0, 1.0, 0.01), name='flat')
        with mock.patch('evaluation.geometry.recognize', side_effect=PersistentDegeneracy("плоский")):
            rows = geometry_recognition(model, [flat], trials=4)
        self.assertEqual(rows[0]['failed'], 4)
        self.assertIsNone(rows[0]['predicted'])
        self.assertEqual(sum(rows[0]['rates'].values()), 0.0)

    def test_requires_normalized_model(self):
        """Тест: модель без нормировки"""
        with self.assertRaises(ValueError):
            geometry_recognition(stub_model(normalized=False), [], trials=1)


@tag('slow')
class HeldOutPrimitiveTests(SimpleTestCase):
    def test_held_out_variations(self):
        """Тест: отложенная вариация узнаётся своим семейством в >= 9 из 10 опытов"""
        variations, held_out = {}, []
        for family in ('box', 'ellipsoid', 'cylinder'):
            meshes = primitive_variations(family, 11, seed=6)
            variations[family] = meshes[:-1]
            held_out.append(meshes[-1])
        model = fit_kde(family_dataset(variations, n=4, samples_per_variation=60, seed=6))
        rows = geometry_recognition(model, held_out, trials=10, seed=6)
        self.assertGreaterEqual(rows[0]['rates']['box'], 90.0)

    def test_uniformly_scaled_sphere(self):
        """Тест: шар, увеличенный втрое, относится к эллипсоидам"""
        variations = {family: primitive_variations(family, 10, seed=7) for family in ('box', 'ellipsoid', 'cylinder')}
        model = fit_kde(family_dataset(variations, n=4, samples_per_variation=60, seed=7))
        sphere = generate_primitive(PrimitiveKind.SPHERE, (1.5,), name='big_sphere')
        rows = geometry_recognition(model, [sphere], trials=10, seed=7)
        self.assertEqual(rows[0]['predicted'], 'ellipsoid')


class EvaluationCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.config = self.root / 'run.yaml'
        self.config.write_text(yaml.safe_dump({
            'seed': 4,
            'objects': [
                {'primitive': 'box', 'dims': [1, 1.4, 0.8]},
                {'primitive': 'sphere', 'dims': [0.6], 'resolution': 2},
                {'primitive': 'cylinder', 'dims': [0.3, 1.5], 'resolution': 16},
            ],
            'grasp': {'n': 4, 'with_normals': True},
            'data': {'samples_per_object': 50},
            'evaluation': {'trials': 3, 'fractions': [0.5, 1.0], 'scale_range': [0.5, 2.0], 'variations': 2},
            'paths': {'dataset': 'train', 'model': 'kde.model', 'reports': 'reports'},
        }))
        call_command('gen_data', config=str(self.config), stdout=StringIO())
        call_command('train', config=str(self.config), stdout=StringIO())

    def tearDown(self):
        self.tmp.cleanup()

    def test_evaluate_methods(self):
        """Тест: два метода на общих сидах - два отчёта и сводка"""
        call_command('evaluate', config=str(self.config), methods=['ic', 'bc_np'], curve=True, max_k=3, stdout=StringIO())
        reports = self.root / 'reports'
        for name in ('ic.json', 'ic_trials.csv', 'ic_confusion.csv', 'bc_np.json', 'bc_np_curve.csv'):
            self.assertTrue((reports / name).is_file(), name)
        summary = json.loads((reports / 'summary.json').read_text())
        self.assertEqual(set(summary), {'ic', 'bc_np'})
        self.assertEqual(summary['ic']['trials'], 9)

    def test_evaluate_idempotent(self):
        """Тест: повторный запуск даёт те же байты"""
        call_command('evaluate', config=str(self.config), stdout=StringIO())
        first = (self.root / 'reports' / 'bc_np_trials.csv').read_bytes()
        call_command('evaluate', config=str(self.config), workers=2, stdout=StringIO())
        self.assertEqual(first, (self.root / 'reports' / 'bc_np_trials.csv').read_bytes())

    def test_evaluate_extras(self):
        """Тест абляции, масштаба и сравнения классификаторов"""
        call_command('evaluate', config=str(self.config), ablation=True, scaled=True, compare=True,
                     stdout=StringIO())
        reports = self.root / 'reports'
        with open(reports / 'ablation.csv', encoding='utf-8') as fh:
            self.assertEqual(len(list(csv.DictReader(fh))), 2)
        with open(reports / 'classifiers.csv', encoding='utf-8') as fh:
            self.assertEqual([row['classifier'] for row in csv.DictReader(fh)], ['kde', 'knn', 'mlp'])
        self.assertTrue((reports / 'bc_np_scaled_trials.csv').is_file())

    def test_ablation_full_fraction_matches_trained_model(self):
        """Тест: доля 1.0 обучается на той же части, что и train, и повторяет основной отчёт"""
        call_command('evaluate', config=str(self.config), ablation=True, stdout=StringIO())
        summary = json.loads((self.root / 'reports' / 'summary.json').read_text())
        trained = json.loads((self.root / 'kde.model.report.json').read_text())
        full = summary['ablation'][-1]
        self.assertEqual(full['fraction'], 1.0)
        self.assertEqual(full['rows'], trained['train_rows'])
        self.assertEqual(full['success'], summary['bc_np']['success'])
        self.assertEqual(full['converged_success'], summary['bc_np']['converged_success'])

    def test_quality_command(self):
        """Тест команды качества захватов"""
        call_command('quality', config=str(self.config), samples=40, stdout=StringIO())
        reports = self.root / 'reports'
        correlation = json.loads((reports / 'quality.json').read_text())
        self.assertEqual(correlation['volume_ratio']['pairs'], 120)
        self.assertEqual(correlation['skipped'], 0)
        self.assertIn('mean_normal_angle', correlation)

    def test_primitives_command(self):
        """Тест команды распознавания формы"""
        call_command('primitives', config=str(self.config), samples=30, trials=2, stdout=StringIO())
        with open(self.root / 'reports' / 'primitives.csv', encoding='utf-8') as fh:
            rows = list(csv.DictReader(fh))
        self.assertEqual([row['query'] for row in rows], ['box_002', 'ellipsoid_002', 'cylinder_002'])

    def test_class_mismatch(self):
        """Тест: модель, обученная на других классах - код 2"""
        other = self.root / 'other.yaml'
        raw = yaml.safe_load(self.config.read_text())
        raw['objects'][0]['name'] = 'crate'
        other.write_text(yaml.safe_dump(raw))
        with self.assertRaises(CommandError) as ctx:
            call_command('evaluate', config=str(other), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)
