# recognition/samplers.py
"""
Источники захватов для распознавания.

ContactSampler выбирает захваты из набора контактов объекта (самостоятельная
игра); StreamSampler читает записанные извне захваты из JSON-строк.
"""
import json
import logging
from pathlib import Path

from rest_framework import serializers

from graspid.rng import derive_rng, stream_id
from grasp_param.serializers import GraspSerializer
from sampling.sampler import sample_grasp
from .exceptions import SamplerExhausted

logger = logging.getLogger('recognition')

# Подпотоки генератора одного захвата: выбор контактов и выбор z
_SUB_CONTACTS = 0
_SUB_POLICY = 1


class ContactSampler:
    """
    Бесконечный поток захватов из набора контактов.

    Захват номер i строится генератором (seed, stream, i), поэтому
    последовательность не зависит от того, где и когда её читают.
    scale масштабирует объект, sigma добавляет шум к положениям контактов,
    policy задаёт случайное число пальцев z.
    """

    def __init__(self, contacts, n, seed, stream=0, with_normals=True, sigma=0.0, scale=1.0, policy=None,
                 max_retries=None):
        if policy is not None:
            policy.check_for(n)
        self.contacts = contacts if scale == 1.0 else contacts.scaled(scale)
        self.n = int(n)
        self.seed = seed
        self.stream = stream
        self.with_normals = with_normals
        self.sigma = float(sigma)
        self.scale = float(scale)
        self.policy = policy
        self.max_retries = max_retries
        self.drawn = 0

    def next_grasp(self):
        index = self.drawn
        self.drawn += 1
        z = self.n
        if self.policy is not None:
            z = self.policy.draw(derive_rng(self.seed, stream_id(self.stream, _SUB_POLICY), index))
        rng = derive_rng(self.seed, stream_id(self.stream, _SUB_CONTACTS), index)
        return sample_grasp(
            self.contacts, z, self.with_normals, rng, max_retries=self.max_retries, sigma=self.sigma
        )

    def __str__(self):
        return f"ContactSampler({self.contacts.source_mesh}, n={self.n}, scale={self.scale:g})"


class StreamSampler:
    """
    Захваты, измеренные извне: по одному JSON-объекту на строку,
    {"points": [[x, y, z], ...], "normals": [[x, y, z], ...] | null}.

    Каждая строка проверяется GraspSerializer при чтении.
    """

    def __init__(self, lines, source="stream"):
        self._lines = iter(lines)
        self.source = source
        self.line_no = 0
        self.drawn = 0

    @classmethod
    def from_path(cls, path):
        path = Path(path)
        text = path.read_text(encoding='utf-8')
        return cls(text.splitlines(), source=str(path))

    def next_grasp(self):
        for line in self._lines:
            self.line_no += 1
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as e:
                raise serializers.ValidationError(f"{self.source}:{self.line_no}: не JSON: {e}")
            serializer = GraspSerializer(data=payload)
            if not serializer.is_valid():
                raise serializers.ValidationError(f"{self.source}:{self.line_no}: {serializer.errors}")
            self.drawn += 1
            return serializer.to_grasp()
        raise SamplerExhausted(f"{self.source}: захваты закончились после {self.drawn}")

    def __str__(self):
        return f"StreamSampler({self.source})"
