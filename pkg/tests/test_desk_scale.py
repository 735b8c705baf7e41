# tests/test_desk_scale.py
"""
Сквозные проверки на настольном наборе: куб, эллипсоид и цилиндр из
генераторов семейств примитивов, 2000 захватов на класс.
"""
import time

import numpy as np
from django.test import SimpleTestCase, tag
from scipy.stats import binomtest

from classifiers.kde import fit_kde
from evaluation.geometry import PRIMITIVE_FAMILIES, primitive_variations
from evaluation.models import TrialConfig
from evaluation.quality import quality_correlation, quality_trials
from evaluation.trials import run_trials, scaled_object_trials, success_vs_samples
from mesh_io.contacts import mesh_to_contacts
from recognition.models import Method
from sampling.models import P4
from sampling.sampler import generate_dataset

SEED = 2024


@tag('slow')
class DeskScaleTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.meshes = [primitive_variations(family, 1, seed=SEED)[0] for family in PRIMITIVE_FAMILIES]
        cls.names = tuple(PRIMITIVE_FAMILIES)
        cls.contacts = [mesh_to_contacts(mesh) for mesh in cls.meshes]
        cls.models = {}

    @classmethod
    def model(cls, n):
        if n not in cls.models:
            dataset = generate_dataset(cls.contacts, n=n, N=2000, seed=SEED, class_names=cls.names)
            cls.models[n] = fit_kde(dataset)
        return cls.models[n]

    def config(self, **kwargs):
        options = {'n': 4, 'method': Method.BC_NP, 'threshold': 0.85, 'trials': 300, 'seed': SEED, 'workers': 2}
        options.update(kwargs)
        return TrialConfig(objects=self.contacts, class_names=self.names, **options)

    def test_bayesian_recognition(self):
        """Тест: BC-NP, 4 пальца с нормалями -> успех >= 90%, в среднем <= 10 захватов"""
        started = time.perf_counter()
        report = run_trials(self.config(), self.model(4))
        overall = report.overall()
        self.assertGreaterEqual(overall['success'], 90.0)
        self.assertLessEqual(np.mean([r.physical_grasps for r in report.records]), 10.0)
        self.assertLess(time.perf_counter() - started, 300.0)

    def test_more_samples_do_not_hurt(self):
        """Тест: у достаточного классификатора успех после 10 захватов не ниже, чем после одного"""
        curve = success_vs_samples(self.config(trials=500), self.model(4), max_k=10)
        self.assertGreaterEqual(curve[9]['success'], curve[0]['success'])

    def test_scaled_objects(self):
        """Тест: масштаб объектов в [0.1, 5] меняет успех не больше чем на 5 пунктов"""
        config = self.config(trials=100)
        plain = run_trials(config, self.model(4)).success_rate
        scaled = scaled_object_trials(config, self.model(4), (0.1, 5.0)).success_rate
        self.assertLessEqual(abs(plain - scaled), 5.0)

    def test_subgrasps_need_fewer_grasps(self):
        """Тест: подзахваты z = 3 из n = 5 требуют меньше физических захватов"""
        plain = run_trials(self.config(n=5, trials=100, threshold=0.99), self.model(5))
        reduced = run_trials(self.config(n=5, z=3, k=4, trials=100, threshold=0.99), self.model(3))
        a = np.array([r.physical_grasps for r in plain.records])
        b = np.array([r.physical_grasps for r in reduced.records])
        self.assertLessEqual(np.median(b), np.median(a))
        wins, losses = int(np.sum(b < a)), int(np.sum(b > a))
        self.assertLess(binomtest(wins, wins + losses, 0.5, alternative='greater').pvalue, 0.05)

    def test_incomplete_grasps(self):
        """Тест: неполные захваты по p4 сохраняют успех >= 85%"""
        config = self.config(trials=100, policy=P4)
        report = run_trials(config, models={3: self.model(3), 4: self.model(4)})
        self.assertGreaterEqual(report.success_rate, 85.0)

    def test_quality_trend(self):
        """Тест: объём многогранника захвата положительно связан с уверенностью"""
        rows = [r for r in quality_trials(self.meshes, self.model(4), samples=200, seed=SEED) if r.measured]
        result = quality_correlation([r.volume_ratio for r in rows], [r.certainty for r in rows])
        self.assertGreater(result['rho'], 0.0)
        self.assertTrue(result['significant'])
