# classifiers/mlp.py
"""
Многослойный перцептрон на numpy: ReLU в скрытых слоях, softmax на выходе,
перекрёстная энтропия, минибатчевый SGD с моментом.
"""
import logging
import time

import numpy as np
from scipy.special import log_softmax, softmax

from graspid.conf import get_setting
from graspid.rng import derive_rng
from .exceptions import DivergenceDetected
from .models import ClassDistribution, MlpModel
from .utils import as_query_matrix

logger = logging.getLogger('classifiers')

STREAM_MLP_INIT = 3
STREAM_MLP_SHUFFLE = 4


def default_architecture(width_in, m, hidden_layers=None, width=None):
    """Размеры слоёв: w -> hidden x width -> m; ширина по умолчанию max(64, 8w)."""
    hidden_layers = get_setting('MLP_HIDDEN_LAYERS') if hidden_layers is None else int(hidden_layers)
    if width is None:
        width = max(get_setting('MLP_MIN_WIDTH'), get_setting('MLP_WIDTH_FACTOR') * width_in)
    return (width_in,) + (int(width),) * hidden_layers + (m,)


def init_parameters(sizes, rng):
    """Инициализация He для ReLU, нулевые смещения."""
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def forward(weights, biases, X):
    """Активации всех слоёв и логиты выхода."""
    activations = [X]
    hidden = X
    for W, b in zip(weights[:-1], biases[:-1]):
        hidden = np.maximum(hidden @ W + b, 0.0)
        activations.append(hidden)
    logits = hidden @ weights[-1] + biases[-1]
    return activations, logits


def loss_and_gradients(weights, biases, X, y):
    """
    Средняя перекрёстная энтропия и её градиенты по всем параметрам.

    Returns:
        (loss, [dW...], [db...])
    """
    activations, logits = forward(weights, biases, X)
    batch = len(X)
    log_probs = log_softmax(logits, axis=1)
    loss = -float(np.mean(log_probs[np.arange(batch), y]))

    delta = np.exp(log_probs)
    delta[np.arange(batch), y] -= 1.0
    delta /= batch

    grads_w, grads_b = [None] * len(weights), [None] * len(weights)
    for layer in range(len(weights) - 1, -1, -1):
        grads_w[layer] = activations[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ weights[layer].T) * (activations[layer] > 0)
    return loss, grads_w, grads_b


def _standardize(vectors):
    mean = vectors.mean(axis=0)
    scale = vectors.std(axis=0)
    scale[scale < 1e-12] = 1.0
    return mean, scale


def mlp_train(dataset, hidden_layers=None, width=None, step_size=None, momentum=None,
              batch_size=None, epochs=None, seed=0):
    """
    Обучение обратным распространением; результат детерминирован при фиксированном seed.

    Raises:
        DivergenceDetected: потери стали inf / nan
    """
    step_size = get_setting('MLP_STEP_SIZE') if step_size is None else float(step_size)
    momentum = get_setting('MLP_MOMENTUM') if momentum is None else float(momentum)
    batch_size = get_setting('MLP_BATCH_SIZE') if batch_size is None else int(batch_size)
    epochs = get_setting('MLP_EPOCHS') if epochs is None else int(epochs)
    if dataset.M == 0:
        raise ValueError("Пустой датасет")

    sizes = default_architecture(dataset.shape.width, dataset.m, hidden_layers, width)
    mean, scale = _standardize(dataset.vectors)
    X = (dataset.vectors - mean) / scale
    y = np.asarray(dataset.labels)

    weights, biases = init_parameters(sizes, derive_rng(seed, stream=STREAM_MLP_INIT))
    velocity_w = [np.zeros_like(W) for W in weights]
    velocity_b = [np.zeros_like(b) for b in biases]

    started = time.perf_counter()
    history = []
    for epoch in range(epochs):
        order = derive_rng(seed, stream=STREAM_MLP_SHUFFLE, index=epoch).permutation(len(X))
        total = 0.0
        for start in range(0, len(X), batch_size):
            rows = order[start:start + batch_size]
            loss, grads_w, grads_b = loss_and_gradients(weights, biases, X[rows], y[rows])
            if not np.isfinite(loss):
                raise DivergenceDetected(f"Эпоха {epoch + 1}: потери {loss}, уменьшите шаг {step_size}")
            total += loss * len(rows)
            for i in range(len(weights)):
                velocity_w[i] = momentum * velocity_w[i] - step_size * grads_w[i]
                velocity_b[i] = momentum * velocity_b[i] - step_size * grads_b[i]
                weights[i] += velocity_w[i]
                biases[i] += velocity_b[i]
        history.append(total / len(X))
        logger.debug(f"MLP эпоха {epoch + 1}/{epochs}: потери {history[-1]:.5f}")

    if not all(np.all(np.isfinite(a)) for a in weights + biases):
        raise DivergenceDetected("Параметры сети стали нечисловыми")

    model = MlpModel(
        weights=weights,
        biases=biases,
        input_mean=mean,
        input_scale=scale,
        shape=dataset.shape,
        class_names=dataset.class_names,
        loss_history=history,
    )
    logger.info(
        f"Обучена модель {model} за {time.perf_counter() - started:.1f} с, "
        f"потери {history[0]:.4f} -> {history[-1]:.4f}"
    )
    return model


def mlp_predict_batch(model, queries):
    X = (as_query_matrix(model.shape, queries) - model.input_mean) / model.input_scale
    _, logits = forward(model.weights, model.biases, X)
    return softmax(logits, axis=1)


def mlp_predict(model, vector):
    return ClassDistribution(mlp_predict_batch(model, vector)[0])
