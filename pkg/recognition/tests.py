# recognition/tests.py
import json
import tempfile
from io import StringIO
from pathlib import Path
from types import SimpleNamespace
from unittest import mock

import numpy as np
import yaml
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, tag
from rest_framework import serializers

from classifiers.kde import fit_kde
from classifiers.models import ClassDistribution
from graspid.rng import derive_rng, stream_id
from grasp_param.models import VectorShape
from mesh_io.contacts import mesh_to_contacts
from mesh_io.models import PrimitiveKind
from mesh_io.utils import generate_primitive
from sampling.models import P4, P5, IncompleteGraspPolicy
from sampling.sampler import generate_dataset
from .exceptions import MissingModelForZ, SamplerExhausted
from .models import FLAG_ALL_ZERO, FLAG_PRIOR, BcSession, IcMode, IcSession, Method, PriorSource
from .runner import STREAM_QUERY, recognize, run_bc, run_bc_z, run_heterogeneous, run_ic, run_ic_z
from .samplers import ContactSampler, StreamSampler
from .signals import recognition_finished
from .storage import export_trace, read_trace
from .updates import bc_update, ic_update


def box_contacts():
    return mesh_to_contacts(generate_primitive(PrimitiveKind.BOX, (1.0, 1.4, 0.8)))


def stub_model(n, m=3, with_normals=True):
    """Заглушка модели: только метаданные; ответы подменяются через mock."""
    return SimpleNamespace(
        shape=VectorShape(n, with_normals, True),
        class_names=tuple(f"c{i}" for i in range(m)),
    )


def constant_predict(probs):
    return mock.patch('recognition.runner.predict', return_value=ClassDistribution(probs))


def sequence_predict(rows):
    return mock.patch('recognition.runner.predict', side_effect=[ClassDistribution(p) for p in rows])


def constant_likelihoods(logs):
    return mock.patch('recognition.runner.log_likelihoods', return_value=np.array([logs], dtype=np.float64))


class IcUpdateTests(SimpleTestCase):
    def test_first_iteration_continue(self):
        """Тест: p = (0.7, 0.2, 0.1) на первой итерации -> продолжение"""
        session = IcSession(3, 0.85)
        status = ic_update(session, [0.7, 0.2, 0.1])
        np.testing.assert_allclose(session.scores, [0.7, 0.0, 0.0])
        self.assertAlmostEqual(status.certainty, 0.7)
        self.assertFalse(status.converged)

    def test_first_iteration_converges(self):
        """Тест: уверенный первый ответ сразу даёт сходимость"""
        session = IcSession(3, 0.85)
        status = ic_update(session, [0.9, 0.05, 0.05])
        self.assertTrue(status.converged)
        self.assertEqual(status.predicted, 0)

    def test_two_iterations(self):
        """Тест: (0.6, 0.4, 0), затем (0.8, 0.1, 0.1) -> s = (1.4, 0, 0)"""
        session = IcSession(3, 0.85)
        self.assertFalse(ic_update(session, [0.6, 0.4, 0.0]).converged)
        status = ic_update(session, [0.8, 0.1, 0.1])
        np.testing.assert_allclose(session.scores, [1.4, 0.0, 0.0])
        self.assertAlmostEqual(status.certainty, 1.0)
        self.assertTrue(status.converged)

    def test_score_sum_increments(self):
        """Тест: сумма баллов растёт на max(p) или ровно на 1"""
        rng = derive_rng(0)
        for mode, step in ((IcMode.ARGMAX_ONLY, np.max), (IcMode.FULL_ACCUMULATE, np.sum)):
            session = IcSession(4, 1.0, mode=mode)
            previous = session.scores.copy()
            for _ in range(50):
                p = rng.dirichlet(np.ones(4))
                ic_update(session, p)
                self.assertAlmostEqual(session.scores.sum() - previous.sum(), step(p), delta=1e-12)
                self.assertTrue(np.all(session.scores >= previous))
                previous = session.scores.copy()

    def test_permutation_equivariance(self):
        """Тест: перестановка классов переставляет баллы"""
        rng = derive_rng(1)
        perm = np.array([2, 0, 3, 1])
        a, b = IcSession(4, 1.0), IcSession(4, 1.0)
        for _ in range(20):
            p = rng.dirichlet(np.ones(4))
            ic_update(a, p)
            ic_update(b, p[perm])
        np.testing.assert_allclose(b.scores, a.scores[perm])
        self.assertEqual(perm[b.leader], a.leader)

    def test_wrong_class_count(self):
        """Тест несовпадения числа классов"""
        with self.assertRaises(ValueError):
            ic_update(IcSession(3, 0.85), [0.5, 0.5])


class BcUpdateTests(SimpleTestCase):
    def test_one_step_bayes(self):
        """Тест: равномерное априорное, правдоподобия (0.8, 0.2)"""
        session = BcSession(2, 0.85)
        bc_update(session, [0.8, 0.2])
        np.testing.assert_allclose(session.posterior, [0.8, 0.2], atol=1e-12)

    def test_uninformative_observation(self):
        """Тест: равные правдоподобия не меняют распределение"""
        session = BcSession(3, 0.85)
        session.set_prior([0.5, 0.3, 0.2])
        bc_update(session, [0.4, 0.4, 0.4])
        np.testing.assert_allclose(session.posterior, [0.5, 0.3, 0.2], atol=1e-12)

    def test_hand_bayes(self):
        """Тест: (0.8, 0.2) * (0.2, 0.8) -> (0.5, 0.5)"""
        session = BcSession(2, 0.85)
        session.set_prior([0.8, 0.2])
        status = bc_update(session, [0.2, 0.8])
        np.testing.assert_allclose(session.posterior, [0.5, 0.5], atol=1e-12)
        self.assertEqual(status.predicted, 0)

    def test_all_zero_skipped(self):
        """Тест: нулевые правдоподобия пропускаются с пометкой"""
        session = BcSession(2, 0.85)
        bc_update(session, [0.9, 0.1])
        with self.assertLogs('recognition', level='WARNING'):
            bc_update(session, [-np.inf, -np.inf], log_space=True)
        np.testing.assert_allclose(session.posterior, [0.9, 0.1], atol=1e-12)
        self.assertEqual(session.skipped, 1)
        self.assertEqual(session.trace[-1].flag, FLAG_ALL_ZERO)

    def test_posterior_stays_simplex(self):
        """Тест: после каждого шага - распределение"""
        rng = derive_rng(2)
        session = BcSession(5, 1.0)
        for _ in range(100):
            bc_update(session, rng.normal(-300, 50, size=5), log_space=True)
            self.assertAlmostEqual(session.posterior.sum(), 1.0, delta=1e-12)
            self.assertTrue(np.all(session.posterior >= 0))

    def test_invalid_likelihoods(self):
        """Тест отрицательных правдоподобий"""
        with self.assertRaises(ValueError):
            bc_update(BcSession(2, 0.85), [-0.1, 1.0])


class RunTests(SimpleTestCase):
    def setUp(self):
        self.contacts = box_contacts()

    def sampler(self, n=4, seed=3, policy=None):
        return ContactSampler(self.contacts, n=n, seed=seed, stream=stream_id(STREAM_QUERY, 0), policy=policy)

    def test_oracle_converges_immediately(self):
        """Тест: оракул сходится за один захват"""
        with constant_predict([0.0, 0.0, 1.0]):
            result = run_ic(self.sampler(), stub_model(4), threshold=0.85)
        self.assertTrue(result.converged)
        self.assertEqual((result.predicted, result.physical_grasps, result.updates), (2, 1, 1))

    def test_uniform_full_accumulate_exhausts_budget(self):
        """Тест: равномерный классификатор не сходится (накопление всего p)"""
        with constant_predict([0.25] * 4):
            result = run_ic(self.sampler(), stub_model(4, m=4), threshold=0.85, max_iterations=30,
                            mode=IcMode.FULL_ACCUMULATE)
        self.assertFalse(result.converged)
        self.assertEqual(result.physical_grasps, 30)
        self.assertEqual(result.predicted, 0)

    def test_uniform_argmax_only_locks_lowest_index(self):
        """Тест: при накоплении только максимума равенство уводит все баллы в класс 0"""
        with constant_predict([0.25] * 4):
            result = run_ic(self.sampler(), stub_model(4, m=4), threshold=0.85, max_iterations=30)
        self.assertTrue(result.converged)
        self.assertEqual((result.predicted, result.physical_grasps), (0, 2))

    def test_zero_threshold(self):
        """Тест: порог 0 - сходимость после первого обновления"""
        with constant_likelihoods([-3.0, -2.0, -4.0]):
            result = run_bc(self.sampler(), stub_model(4), threshold=0.0)
        self.assertTrue(result.converged)
        self.assertEqual((result.updates, result.predicted), (1, 1))

    def test_uniform_likelihood_never_converges(self):
        """Тест: неинформативные правдоподобия исчерпывают бюджет"""
        with constant_likelihoods([-1.0, -1.0, -1.0]):
            result = run_bc(self.sampler(), stub_model(4), threshold=0.5, max_iterations=12)
        self.assertFalse(result.converged)
        self.assertEqual(result.physical_grasps, 12)
        np.testing.assert_allclose(result.state, [1 / 3] * 3)

    def test_informed_prior(self):
        """Тест IP: первый захват задаёт априорное распределение и не обновляет его"""
        with constant_predict([0.0, 1.0, 0.0]), constant_likelihoods([-1.0, -1.0, -1.0]):
            result = run_bc(self.sampler(), stub_model(4), threshold=0.85, prior=PriorSource.IP,
                            auxiliary=stub_model(4))
        self.assertEqual(result.method, Method.BC_IP)
        self.assertEqual(result.trace[0].flag, FLAG_PRIOR)
        self.assertEqual(result.trace[0].grasp, 0)
        self.assertEqual(result.trace[1].grasp, 1)
        self.assertEqual((result.physical_grasps, result.updates, result.predicted), (2, 1, 1))
        self.assertEqual(result.prior, (0.0, 1.0, 0.0))

    def test_informed_prior_requires_auxiliary(self):
        """Тест: IP без вспомогательного классификатора"""
        with self.assertRaises(ValueError):
            run_bc(self.sampler(), stub_model(4), prior=PriorSource.IP)

    def test_z_combinations_per_grasp(self):
        """Тест: n = 4, z = 3 -> 4 обновления на физический захват"""
        with constant_predict([0.25] * 4):
            result = run_ic_z(self.sampler(), stub_model(3, m=4), z=3, k=4, threshold=0.85, max_iterations=3,
                              mode=IcMode.FULL_ACCUMULATE)
        self.assertEqual((result.physical_grasps, result.updates), (3, 12))
        self.assertEqual([r.grasp for r in result.trace], [0] * 4 + [1] * 4 + [2] * 4)
        self.assertTrue(all(r.z == 3 for r in result.trace))

    def test_z_early_exit(self):
        """Тест: сходимость на второй комбинации - остальные пропускаются"""
        with sequence_predict([[0.6, 0.4], [0.6, 0.4]]):
            result = run_ic_z(self.sampler(), stub_model(3, m=2), z=3, k=4, threshold=0.85)
        self.assertTrue(result.converged)
        self.assertEqual((result.physical_grasps, result.updates), (1, 2))

    def test_z_bayesian_variant(self):
        """Тест BC по подзахватам"""
        with constant_likelihoods([-1.0, -2.0, -3.0]):
            result = run_bc_z(self.sampler(), stub_model(3), z=3, k=2, threshold=0.99)
        self.assertTrue(result.converged)
        self.assertEqual(result.predicted, 0)
        self.assertGreaterEqual(result.updates, result.physical_grasps)

    def test_heterogeneous_routing(self):
        """Тест: при p4 все захваты направляются в модель своего z"""
        models = {3: stub_model(3), 4: stub_model(4)}
        with constant_predict([1 / 3] * 3):
            result = run_heterogeneous(self.sampler(policy=P4), models, Method.IC_FULL, threshold=0.9,
                                       max_iterations=40)
        zs = [r.z for r in result.trace]
        self.assertEqual(len(zs), 40)
        self.assertEqual(set(zs), {3, 4})

    def test_heterogeneous_missing_model(self):
        """Тест: z = 3 из p5 без модели -> MissingModelForZ"""
        models = {4: stub_model(4), 5: stub_model(5)}
        with constant_predict([1 / 3] * 3), self.assertRaises(MissingModelForZ):
            run_heterogeneous(self.sampler(n=5, policy=P5), models, Method.IC, max_iterations=100)

    def test_point_mass_policy_matches_homogeneous(self):
        """Тест: политика «всегда n» совпадает с обычным распознаванием"""
        sphere = mesh_to_contacts(generate_primitive(PrimitiveKind.SPHERE, (0.6,), resolution=2))
        model = fit_kde(generate_dataset([self.contacts, sphere], n=4, N=40, seed=1, class_names=('box', 'sphere')))
        plain = run_bc(self.sampler(seed=7), model, threshold=0.99, max_iterations=5)
        policy = IncompleteGraspPolicy.full(4)
        mixed = run_heterogeneous(self.sampler(seed=7, policy=policy), {4: model}, Method.BC_NP,
                                  threshold=0.99, max_iterations=5)
        self.assertEqual([r.observation for r in plain.trace], [r.observation for r in mixed.trace])
        self.assertEqual(plain.predicted, mixed.predicted)

    def test_recognize_dispatch(self):
        """Тест выбора цикла по методу и z"""
        with constant_predict([0.0, 1.0, 0.0]):
            self.assertEqual(recognize('ic', self.sampler(), model=stub_model(4)).method, Method.IC)
            self.assertEqual(
                recognize('ic_full', self.sampler(), model=stub_model(3), z=3).trace[0].z, 3
            )

    def test_finished_signal(self):
        """Тест: сигнал recognition_finished с итогом"""
        received = []

        def handler(sender, result, **kwargs):
            received.append((sender, result))

        recognition_finished.connect(handler)
        try:
            with constant_predict([0.0, 0.0, 1.0]), self.assertLogs('recognition', level='INFO'):
                result = run_ic(self.sampler(), stub_model(4))
        finally:
            recognition_finished.disconnect(handler)
        self.assertEqual(received, [('ic', result)])

    def test_prediction_after(self):
        """Тест чтения лидера после k захватов"""
        with sequence_predict([[0.1, 0.9, 0.0], [0.0, 0.2, 0.8], [0.0, 0.0, 1.0]]):
            result = run_ic(self.sampler(), stub_model(4), threshold=1.0, max_iterations=3)
        self.assertEqual([result.prediction_after(k) for k in (1, 2, 3)], [1, 1, 2])


class SamplerTests(SimpleTestCase):
    def test_contact_sampler_deterministic(self):
        """Тест: захват i не зависит от порядка чтения"""
        contacts = box_contacts()
        a = ContactSampler(contacts, n=4, seed=5, stream=9)
        b = ContactSampler(contacts, n=4, seed=5, stream=9)
        first = [a.next_grasp().points for _ in range(3)]
        second = [b.next_grasp().points for _ in range(3)]
        for x, y in zip(first, second):
            np.testing.assert_array_equal(x, y)

    def test_contact_sampler_scale(self):
        """Тест масштабирования объекта"""
        contacts = box_contacts()
        grasp = ContactSampler(contacts, n=4, seed=5, scale=3.0).next_grasp()
        self.assertGreater(np.abs(grasp.points).max(), 1.0)

    def test_stream(self):
        """Тест чтения потока захватов"""
        lines = [
            json.dumps({'points': [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]}),
            "",
            json.dumps({'points': [[0, 0, 0], [2, 0, 0], [0, 2, 0], [0, 0, 2]], 'normals': None}),
        ]
        sampler = StreamSampler(lines)
        self.assertEqual(sampler.next_grasp().n, 4)
        self.assertEqual(sampler.next_grasp().points[1, 0], 2.0)
        with self.assertRaises(SamplerExhausted):
            sampler.next_grasp()

    def test_stream_invalid_line(self):
        """Тест: строка потока проверяется сериализатором"""
        sampler = StreamSampler([json.dumps({'points': [[0, 0, 0]]})])
        with self.assertRaises(serializers.ValidationError):
            sampler.next_grasp()

    def test_stream_shorter_than_budget(self):
        """Тест: поток кончился - итог без сходимости с пометкой"""
        grasps = ContactSampler(box_contacts(), n=4, seed=1, with_normals=False)
        lines = [json.dumps({'points': grasps.next_grasp().points.tolist()}) for _ in range(3)]
        with constant_predict([0.5, 0.5]):
            result = run_ic(StreamSampler(lines), stub_model(4, m=2, with_normals=False), threshold=0.85,
                            mode=IcMode.FULL_ACCUMULATE)
        self.assertTrue(result.sampler_exhausted)
        self.assertEqual(result.physical_grasps, 3)

    def test_empty_stream(self):
        """Тест: пустой поток"""
        with self.assertRaises(SamplerExhausted):
            run_ic(StreamSampler([]), stub_model(4))


class TraceTests(SimpleTestCase):
    def test_export(self):
        """Тест выгрузки трассы в JSON-строки"""
        session = BcSession(2, 0.85)
        bc_update(session, [0.5, 0.0], grasp=0, z=4)
        with tempfile.TemporaryDirectory() as tmp:
            path = export_trace(session.trace, Path(tmp) / 'trace.jsonl', extra={'trial': 3})
            rows = read_trace(path)
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0]['trial'], 3)
        self.assertIsNone(rows[0]['observation'][1])
        self.assertEqual(rows[0]['state'], [1.0, 0.0])


@tag('slow')
class SeparableRecognitionTests(SimpleTestCase):
    def test_bc_separable_classes(self):
        """Тест: хорошо различимые объекты распознаются в >= 99% опытов"""
        box = box_contacts()
        rod = mesh_to_contacts(generate_primitive(PrimitiveKind.CYLINDER, (0.1, 3.0), resolution=16))
        model = fit_kde(generate_dataset([box, rod], n=4, N=300, seed=2, class_names=('box', 'rod')))
        correct = 0
        for label, contacts in enumerate((box, rod)):
            for trial in range(100):
                sampler = ContactSampler(contacts, n=4, seed=11, stream=stream_id(STREAM_QUERY, label, trial))
                correct += run_bc(sampler, model, threshold=0.85).predicted == label
        self.assertGreaterEqual(correct, 198)


class RecognizeCommandTests(SimpleTestCase):
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
            'paths': {'dataset': 'train', 'model': 'kde.model', 'reports': 'reports'},
        }))
        call_command('gen_data', config=str(self.config), stdout=StringIO())
        call_command('train', config=str(self.config), stdout=StringIO())
        sampler = ContactSampler(box_contacts(), n=4, seed=9)
        grasps = [sampler.next_grasp() for _ in range(5)]
        self.stream = self.root / 'box.jsonl'
        self.stream.write_text("".join(
            json.dumps({'points': g.points.tolist(), 'normals': g.normals.tolist()}) + "\n" for g in grasps
        ))

    def tearDown(self):
        self.tmp.cleanup()

    def test_stream_converges(self):
        """Тест: поток из пяти захватов, порог 0 -> итог с трассой"""
        call_command('recognize', config=str(self.config), stream=str(self.stream), threshold=0.0,
                     trace=str(self.root / 'trace.jsonl'), stdout=StringIO())
        result = json.loads((self.root / 'reports' / 'recognition.json').read_text())
        self.assertTrue(result['converged'])
        self.assertEqual(result['class_names'], ['box', 'sphere', 'cylinder'])
        self.assertEqual(len(result['trace']), 1)
        self.assertEqual(len(read_trace(self.root / 'trace.jsonl')), 1)

    def test_not_converged_exit_code(self):
        """Тест: порог 1 недостижим -> код 4, итог всё равно записан"""
        with self.assertRaises(CommandError) as ctx:
            call_command('recognize', config=str(self.config), stream=str(self.stream), threshold=1.0,
                         output=str(self.root / 'out.json'), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 4)
        result = json.loads((self.root / 'out.json').read_text())
        self.assertTrue(result['sampler_exhausted'])
        self.assertEqual(result['physical_grasps'], 5)
        self.assertEqual(len(result['trace']), 5)

    def test_self_play_object(self):
        """Тест самостоятельной выборки по объекту конфига"""
        call_command('recognize', config=str(self.config), object='box', threshold=0.0, stdout=StringIO())
        result = json.loads((self.root / 'reports' / 'recognition.json').read_text())
        self.assertEqual(result['physical_grasps'], 1)

    def test_missing_source(self):
        """Тест: без источника захватов - код 2"""
        with self.assertRaises(CommandError) as ctx:
            call_command('recognize', config=str(self.config), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)
