# classifiers/tests.py
import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
import yaml
from scipy.integrate import trapezoid
from django.core.management import call_command
from django.test import SimpleTestCase

from graspid.rng import derive_rng
from grasp_param.exceptions import ShapeMismatch
from grasp_param.models import ParamVector, VectorShape
from grasp_param.parameterization import vectorize
from grasp_param.utils import random_motion
from mesh_io.contacts import mesh_to_contacts
from mesh_io.models import PrimitiveKind
from mesh_io.utils import generate_primitive
from sampling.models import LabeledDataset
from sampling.sampler import generate_dataset, sample_grasp
from .exceptions import DivergenceDetected, EmptyClass, ModelFormatError
from .kde import fit_kde, kde_likelihood, kde_log_likelihoods, kde_predict, log_kernel_constant, select_bandwidth
from .knn import fit_knn, knn_predict
from .mlp import init_parameters, loss_and_gradients, mlp_predict, mlp_predict_batch, mlp_train
from .models import ClassDistribution, KdeModel, KnnModel, MlpModel
from .predictors import predict, predict_batch
from .storage import load_model, save_model
from .sufficiency import (
    compare_classifiers, confusion_from_predictions, confusion_matrix, expected_scores,
)

# Ширина 1: двухпальцевый вектор (одно расстояние)
LINE = VectorShape(2, False, False)
# Ширина 3: трёхпальцевый пространственный вектор без нормалей
TRIPLE = VectorShape(3, False, False)


def line_dataset(points, labels, names=('a', 'b')):
    return LabeledDataset(
        vectors=np.asarray(points, dtype=np.float64).reshape(-1, 1),
        labels=labels, class_names=names, shape=LINE,
    )


def separable_dataset(per_class=100, seed=0):
    """Два класса в R^3, разделённые плоскостью x + y = 0 с зазором."""
    rng = derive_rng(seed)
    a = rng.normal(size=(per_class, 3)) * 0.5 + [2.0, 2.0, 0.0]
    b = rng.normal(size=(per_class, 3)) * 0.5 + [-2.0, -2.0, 0.0]
    return LabeledDataset(
        vectors=np.vstack([a, b]),
        labels=np.repeat([0, 1], per_class),
        class_names=('a', 'b'),
        shape=TRIPLE,
    )


class ClassDistributionTests(SimpleTestCase):
    def test_simplex_checked(self):
        """Тест проверки суммы вероятностей"""
        with self.assertRaises(ValueError):
            ClassDistribution([0.5, 0.6])
        with self.assertRaises(ValueError):
            ClassDistribution([1.0])

    def test_argmax_tie_lowest_index(self):
        """Тест: при равенстве выбирается меньший индекс"""
        self.assertEqual(ClassDistribution([0.25, 0.375, 0.375]).argmax, 1)
        self.assertEqual(ClassDistribution.uniform(4).argmax, 0)


class KdeTests(SimpleTestCase):
    def test_kernel_at_zero(self):
        """Тест значения ядра в нуле: 1/sqrt(2 pi)"""
        model = KdeModel(np.array([[0.0], [50.0]]), [0, 1], 1.0, LINE, ('a', 'b'))
        self.assertAlmostEqual(kde_likelihood(model, [0.0], 0), 1.0 / np.sqrt(2 * np.pi), delta=1e-12)

    def test_far_query_vanishes(self):
        """Тест гауссова хвоста"""
        model = KdeModel(np.array([[0.0], [1.0]]), [0, 1], 1.0, LINE, ('a', 'b'))
        self.assertLess(kde_likelihood(model, [60.0], 0), 1e-300)

    def test_brute_force_oracle(self):
        """Тест против прямого суммирования на 100 случайных наборах"""
        rng = derive_rng(1)
        for _ in range(100):
            vectors = rng.normal(size=(6, 3))
            labels = np.array([0, 0, 0, 1, 1, 1])
            sigma = rng.uniform(0.3, 2.0)
            model = KdeModel(vectors, labels, sigma, TRIPLE, ('a', 'b'))
            q = rng.normal(size=3)
            for label in (0, 1):
                data = vectors[labels == label]
                sq = np.sum((data - q) ** 2, axis=1)
                direct = np.mean((2 * np.pi * sigma ** 2) ** -1.5 * np.exp(-sq / (2 * sigma ** 2)))
                self.assertAlmostEqual(kde_likelihood(model, q, label), direct, delta=1e-12)

    def test_density_integrates_to_one(self):
        """Тест: плотность KDE интегрируется в 1"""
        data = derive_rng(2).normal(size=40)
        model = KdeModel(np.concatenate([data, [100.0]]).reshape(-1, 1), [0] * 40 + [1], 0.3, LINE, ('a', 'b'))
        grid = np.linspace(-10, 10, 8001)
        density = np.exp(kde_log_likelihoods(model, grid.reshape(-1, 1))[:, 0])
        self.assertAlmostEqual(trapezoid(density, grid), 1.0, delta=0.02)

    def test_circular_components_wrap(self):
        """Тест: разность азимутов берётся по окружности"""
        shape = VectorShape(3, True, False, 'planar')
        base = np.array([1.0, 1.0, 1.0, 0.0, 0.0, np.pi - 0.01])
        other = base.copy()
        other[5] = -np.pi + 0.01
        model = KdeModel(np.vstack([base, base + 10.0]), [0, 1], 0.1, shape, ('a', 'b'))
        near = kde_likelihood(model, other, 0)
        expected = (2 * np.pi * 0.01) ** -3 * np.exp(-(0.02 ** 2) / (2 * 0.01))
        self.assertAlmostEqual(near / expected, 1.0, delta=1e-9)

    def test_symmetric_classes(self):
        """Тест симметричных классов: (0.5, 0.5)"""
        model = KdeModel(np.array([[-1.0], [1.0]]), [0, 1], 1.0, LINE, ('a', 'b'))
        np.testing.assert_allclose(kde_predict(model, [0.0]).probs, [0.5, 0.5], atol=1e-12)

    def test_coincident_point(self):
        """Тест: запрос в точке класса, далёкого от другого"""
        model = KdeModel(np.array([[0.0], [8.0]]), [0, 1], 1.0, LINE, ('a', 'b'))
        self.assertGreater(kde_predict(model, [0.0]).probs[0], 0.99)

    def test_underflow_fallback(self):
        """Тест равномерного ответа при исчезающих правдоподобиях"""
        model = KdeModel(np.array([[0.0], [1.0]]), [0, 1], 0.01, LINE, ('a', 'b'))
        with self.assertLogs('classifiers', level='WARNING'):
            result = kde_predict(model, [1e6])
        self.assertTrue(result.uniform_fallback)
        np.testing.assert_allclose(result.probs, [0.5, 0.5])

    def test_constant_does_not_matter(self):
        """Тест: нормирующая константа ядра не влияет на апостериорное распределение"""
        dataset = separable_dataset(20)
        model = fit_kde(dataset)
        q = np.array([0.3, -0.1, 0.2])
        logs = kde_log_likelihoods(model, q)[0] - log_kernel_constant(3, model.bandwidth)
        without = np.exp(logs - logs.max()) / np.exp(logs - logs.max()).sum()
        np.testing.assert_allclose(kde_predict(model, q).probs, without, atol=1e-12)

    def test_shape_mismatch(self):
        """Тест несовместимого вектора"""
        model = fit_kde(separable_dataset(5))
        vector = ParamVector(values=[1.0], n=2, with_normals=False)
        with self.assertRaises(ShapeMismatch):
            kde_predict(model, vector)

    def test_rigid_invariance(self):
        """Тест инвариантности правдоподобия к движению захвата"""
        box = mesh_to_contacts(generate_primitive(PrimitiveKind.BOX, (1.0, 1.5, 0.7)))
        sphere = mesh_to_contacts(generate_primitive(PrimitiveKind.SPHERE, (0.6,), resolution=2))
        dataset = generate_dataset([box, sphere], n=4, N=60, seed=4)
        model = fit_kde(dataset)
        rng = derive_rng(9)
        for _ in range(10):
            grasp = sample_grasp(box, 4, True, rng)
            moved = random_motion(grasp, rng, max_translation=5.0)
            a = kde_log_likelihoods(model, vectorize(grasp, dataset.shape))[0]
            b = kde_log_likelihoods(model, vectorize(moved, dataset.shape))[0]
            np.testing.assert_allclose(np.exp(b - a), 1.0, atol=1e-8)


class BandwidthTests(SimpleTestCase):
    def test_single_point_floor(self):
        """Тест: одна точка -> нижняя граница 1e-3"""
        self.assertEqual(select_bandwidth(np.array([[3.0]])), 1e-3)

    def test_standard_normal_rule(self):
        """Тест правила Скотта на нормальных данных"""
        data = derive_rng(3).normal(size=(10_000, 1))
        self.assertAlmostEqual(select_bandwidth(data) / 10_000 ** -0.2, 1.0, delta=0.1)

    def test_override(self):
        """Тест явной ширины окна"""
        model = fit_kde(separable_dataset(10), bandwidth=0.5)
        self.assertEqual(model.bandwidth, 0.5)


class KnnTests(SimpleTestCase):
    def test_exact_match_one_hot(self):
        """Тест: k = 1, запрос совпадает с точкой класса"""
        dataset = line_dataset([0.0, 1.0, 2.0, 3.0], [0, 1, 2, 1], names=('a', 'b', 'c'))
        np.testing.assert_array_equal(knn_predict(fit_knn(dataset, k=1), [2.0]).probs, [0, 0, 1])

    def test_all_equal_distances_uniform(self):
        """Тест: k = M, все расстояния равны -> равномерное распределение"""
        model = KnnModel(np.ones((4, 1)), [0, 1, 0, 1], 4, LINE, ('a', 'b'))
        np.testing.assert_allclose(knn_predict(model, [3.0]).probs, [0.5, 0.5], atol=1e-12)

    def test_hand_computed_vote(self):
        """Тест взвешенного голосования на пяти точках"""
        model = KnnModel(np.arange(5.0).reshape(-1, 1), [0, 0, 1, 1, 0], 3, LINE, ('a', 'b'))
        eps = 1e-12
        w = [1 / (0.2 + eps), 1 / (0.8 + eps), 1 / (1.2 + eps)]
        expected = np.array([w[0] + w[2], w[1]]) / sum(w)
        np.testing.assert_allclose(knn_predict(model, [1.2]).probs, expected, atol=1e-12)

    def test_tie_by_training_order(self):
        """Тест: равные расстояния упорядочены по номеру строки"""
        model = KnnModel(np.array([[-1.0], [1.0]]), [1, 0], 1, LINE, ('a', 'b'))
        self.assertEqual(knn_predict(model, [0.0]).argmax, 1)


class MlpTests(SimpleTestCase):
    def test_separable_training(self):
        """Тест обучения на линейно разделимых данных"""
        dataset = separable_dataset(100)
        model = mlp_train(dataset, hidden_layers=1, width=16, epochs=100, batch_size=20, seed=1)
        predicted = np.argmax(mlp_predict_batch(model, dataset.vectors), axis=1)
        self.assertGreaterEqual(np.mean(predicted == dataset.labels), 0.99)

    def test_loss_decreases(self):
        """Тест: сглаженные потери не растут"""
        model = mlp_train(
            separable_dataset(100), hidden_layers=1, width=16, epochs=40, batch_size=20,
            step_size=0.01, seed=2,
        )
        smoothed = np.convolve(model.loss_history, np.ones(5) / 5, mode='valid')
        self.assertTrue(np.all(np.diff(smoothed) <= 1e-2))
        self.assertLess(smoothed[-1], smoothed[0])

    def test_untrained_output_is_simplex(self):
        """Тест: выход необученной сети - распределение"""
        weights, biases = init_parameters((3, 8, 8, 2), derive_rng(5))
        model = MlpModel(weights, biases, np.zeros(3), np.ones(3), TRIPLE, ('a', 'b'))
        result = mlp_predict(model, [10.0, -3.0, 0.5])
        self.assertAlmostEqual(result.probs.sum(), 1.0, delta=1e-9)

    def test_gradient_check(self):
        """Тест аналитического градиента против центральных разностей"""
        rng = derive_rng(6)
        weights, biases = init_parameters((3, 4, 2), rng)
        X = rng.normal(size=(5, 3))
        y = np.array([0, 1, 1, 0, 1])
        _, grads_w, grads_b = loss_and_gradients(weights, biases, X, y)
        h = 1e-6
        worst = 0.0
        for params, grads in ((weights, grads_w), (biases, grads_b)):
            for array, grad in zip(params, grads):
                for index in np.ndindex(array.shape):
                    saved = array[index]
                    array[index] = saved + h
                    plus = loss_and_gradients(weights, biases, X, y)[0]
                    array[index] = saved - h
                    minus = loss_and_gradients(weights, biases, X, y)[0]
                    array[index] = saved
                    numeric = (plus - minus) / (2 * h)
                    worst = max(worst, abs(numeric - grad[index]) / max(1e-8, abs(numeric) + abs(grad[index])))
        self.assertLess(worst, 1e-4)

    def test_seed_deterministic(self):
        """Тест воспроизводимости обучения"""
        dataset = separable_dataset(30)
        a = mlp_train(dataset, hidden_layers=2, width=8, epochs=5, seed=3)
        b = mlp_train(dataset, hidden_layers=2, width=8, epochs=5, seed=3)
        for wa, wb in zip(a.weights, b.weights):
            np.testing.assert_array_equal(wa, wb)

    def test_divergence(self):
        """Тест обнаружения расходимости"""
        with self.assertRaises(DivergenceDetected):
            mlp_train(separable_dataset(30), hidden_layers=2, width=8, epochs=3, batch_size=10,
                      step_size=1e300, seed=1)


class SufficiencyTests(SimpleTestCase):
    def test_perfect_classifier(self):
        """Тест идеального классификатора"""
        labels = np.repeat(np.arange(3), 5)
        report = confusion_from_predictions(labels, labels, 3, ('a', 'b', 'c'))
        np.testing.assert_array_equal(report.confusion, np.eye(3))
        self.assertEqual(report.m_p, 3)
        self.assertEqual(report.eta, 100.0)
        self.assertTrue(report.sufficient)

    def test_constant_classifier(self):
        """Тест классификатора, всегда отвечающего классом 1"""
        labels = np.repeat(np.arange(4), 3)
        report = confusion_from_predictions(labels, np.zeros(12), 4, ('a', 'b', 'c', 'd'))
        self.assertEqual(report.m_p, 1)
        self.assertEqual(report.eta, 25.0)
        self.assertFalse(report.sufficient)

    def test_empty_class(self):
        """Тест отсутствующего класса"""
        with self.assertRaises(EmptyClass):
            confusion_from_predictions([0, 0], [0, 0], 2, ('a', 'b'))

    def test_expected_scores_uniform_fallback(self):
        """Тест ожидаемых баллов при равномерном p_max"""
        confusion = np.array([[0.7, 0.3], [0.4, 0.6]])
        # m = 2: (m + 2) / (2m) = 1
        np.testing.assert_allclose(expected_scores(confusion), confusion)
        mean_pmax = np.array([[0.9, np.nan], [0.6, 0.8]])
        scores = expected_scores(confusion, mean_pmax)
        self.assertAlmostEqual(scores[0, 1], 0.3 * 1.0)
        self.assertAlmostEqual(scores[0, 0], 0.63)

    def test_kde_report_recount(self):
        """Тест: eta совпадает с пересчётом по матрице"""
        dataset = separable_dataset(30)
        report = confusion_matrix(fit_kde(dataset), dataset)
        np.testing.assert_allclose(report.confusion.sum(axis=1), 1.0, atol=1e-9)
        recount = sum(
            all(report.confusion[i, i] > report.confusion[i, j] for j in range(report.m) if j != i)
            for i in range(report.m)
        )
        self.assertEqual(report.eta, 100.0 * recount / report.m)

    def test_compare_classifiers(self):
        """Тест сравнения трёх классификаторов"""
        results = compare_classifiers(
            separable_dataset(40, seed=1), separable_dataset(10, seed=2),
            options={'hidden_layers': 1, 'width': 8, 'epochs': 20},
        )
        self.assertEqual(set(results), {'kde', 'knn', 'mlp'})
        self.assertGreater(results['kde']['accuracy'], 0.9)


class StorageTests(SimpleTestCase):
    def _round_trip(self, model, queries):
        with tempfile.TemporaryDirectory() as tmp:
            path = save_model(model, Path(tmp) / 'model.bin')
            loaded = load_model(path)
        np.testing.assert_array_equal(predict_batch(loaded, queries), predict_batch(model, queries))
        self.assertEqual(loaded.kind, model.kind)
        self.assertEqual(loaded.shape, model.shape)
        return loaded

    def test_kde_knn_mlp_round_trip(self):
        """Тест: загруженная модель даёт те же предсказания"""
        dataset = separable_dataset(20)
        queries = derive_rng(3).normal(size=(7, 3))
        self._round_trip(fit_kde(dataset), queries)
        self.assertEqual(self._round_trip(fit_knn(dataset, k=3), queries).k, 3)
        mlp = mlp_train(dataset, hidden_layers=2, width=8, epochs=3, seed=1)
        self.assertEqual(self._round_trip(mlp, queries).layer_sizes, (3, 8, 8, 2))

    def test_unknown_version(self):
        """Тест неизвестной версии формата"""
        model = fit_kde(separable_dataset(5))
        with tempfile.TemporaryDirectory() as tmp:
            path = save_model(model, Path(tmp) / 'model.bin')
            lines = path.read_bytes().split(b"\n", 2)
            header = json.loads(lines[1])
            header['version'] = 99
            path.write_bytes(lines[0] + b"\n" + json.dumps(header).encode() + b"\n" + lines[2])
            with self.assertRaises(ModelFormatError):
                load_model(path)

    def test_truncated(self):
        """Тест усечённого файла"""
        model = fit_knn(separable_dataset(5), k=1)
        with tempfile.TemporaryDirectory() as tmp:
            path = save_model(model, Path(tmp) / 'model.bin')
            path.write_bytes(path.read_bytes()[:-8])
            with self.assertRaises(ModelFormatError):
                load_model(path)

    def test_not_a_model(self):
        """Тест чужого файла"""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'junk.bin'
            path.write_bytes(b"hello\n")
            with self.assertRaises(ModelFormatError):
                load_model(path)


class TrainCommandTests(SimpleTestCase):
    def test_gen_data_then_train(self):
        """Тест: обученная модель загружается и воспроизводит предсказание"""
        with tempfile.TemporaryDirectory() as tmp:
            config = Path(tmp) / 'run.yaml'
            config.write_text(yaml.safe_dump({
                'seed': 5,
                'objects': [
                    {'primitive': 'box', 'dims': [1, 1, 1]},
                    {'primitive': 'cylinder', 'dims': [0.3, 1.5], 'resolution': 16},
                ],
                'grasp': {'n': 3, 'with_normals': True},
                'data': {'samples_per_object': 60},
                'classifier': {'kind': 'kde'},
                'paths': {'dataset': 'train', 'model': 'kde.model'},
            }))
            call_command('gen_data', config=str(config), stdout=StringIO())
            out = StringIO()
            call_command('train', config=str(config), stdout=out)
            model = load_model(Path(tmp) / 'kde.model')
            report = json.loads((Path(tmp) / 'kde.model.report.json').read_text())
        self.assertEqual(model.class_names, ('box', 'cylinder'))
        self.assertEqual(report['validation_rows'], 18)
        self.assertIn('sufficiency', report)
        self.assertEqual(len(model.vectors), 102)
        self.assertIn('Модель', out.getvalue())
        self.assertEqual(predict(model, model.vectors[0]).m, 2)
