# grasp_param/utils.py - движения и масштабирование захватов
import numpy as np
from scipy.spatial.transform import Rotation

from .models import Grasp


def random_rotation(rng):
    """Равномерно распределённый поворот SO(3) как матрица 3x3."""
    return Rotation.random(random_state=rng).as_matrix()


def random_rotation_2d(rng):
    angle = rng.uniform(-np.pi, np.pi)
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def transform_grasp(grasp, rotation, translation):
    """Жёсткое движение: p -> R p + t, n -> R n."""
    rotation = np.asarray(rotation, dtype=np.float64)
    translation = np.asarray(translation, dtype=np.float64)
    dim = grasp.points.shape[1]
    if rotation.shape != (dim, dim) or translation.shape != (dim,):
        raise ValueError(f"Поворот {rotation.shape} и сдвиг {translation.shape} не подходят к захвату {dim}D")
    if not np.allclose(rotation @ rotation.T, np.eye(dim), atol=1e-9) or np.linalg.det(rotation) < 0:
        raise ValueError("Матрица не является собственным поворотом")
    normals = None if grasp.normals is None else grasp.normals @ rotation.T
    if normals is not None:
        normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
    return Grasp(points=grasp.points @ rotation.T + translation, normals=normals)


def scale_grasp(grasp, factor):
    """Равномерное масштабирование точек; нормали не меняются."""
    factor = float(factor)
    if not factor > 0:
        raise ValueError(f"Множитель масштаба должен быть положительным: {factor}")
    return Grasp(points=grasp.points * factor, normals=grasp.normals)


def random_motion(grasp, rng, max_translation=1.0):
    """Случайное жёсткое движение захвата (для проверок инвариантности)."""
    dim = grasp.points.shape[1]
    rotation = random_rotation(rng) if dim == 3 else random_rotation_2d(rng)
    translation = rng.uniform(-max_translation, max_translation, size=dim)
    return transform_grasp(grasp, rotation, translation)
