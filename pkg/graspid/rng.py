# graspid/rng.py
"""
Счётчиковое (counter-based) разбиение генераторов случайных чисел.

Каждый образец получает собственный генератор Philox, ключ которого -
мастер-сид, а счётчик - (поток, индекс). Поток образцов не зависит от того,
сколько воркеров его обрабатывают и в каком порядке.
"""
import numpy as np

# Старшие слова счётчика заняты (stream, index); младшие инкрементирует Philox
_COUNTER_WORDS = 4


def derive_rng(seed, stream=0, index=0):
    """Генератор для образца `index` в потоке `stream` при мастер-сиде `seed`."""
    if seed is None:
        raise ValueError("Сид обязателен: запуск без сида невоспроизводим")
    counter = np.zeros(_COUNTER_WORDS, dtype=np.uint64)
    counter[2] = np.uint64(stream)
    counter[3] = np.uint64(index)
    return np.random.Generator(np.random.Philox(key=int(seed), counter=counter))


def stream_id(*parts):
    """Стабильный номер потока из набора целых (объект, опыт, назначение)."""
    value = 0
    for part in parts:
        value = (value * 1_000_003 + int(part)) % (2 ** 63)
    return value
