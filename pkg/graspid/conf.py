# graspid/conf.py
from django.conf import settings

# Единственный источник значений по умолчанию; settings.GRASPID хранит
# только переопределения (в том числе из переменных окружения).
DEFAULTS = {
    # mesh_io
    'MIN_FACE_AREA': 1e-12,
    'SPHERE_SUBDIVISIONS': 3,
    'CYLINDER_SECTIONS': 64,
    'MIN_SEGMENTS': 8,
    # grasp_param
    'COPLANARITY_RATIO': 1e-6,
    'TIE_TOLERANCE': 1e-9,
    # sampling
    'DEGENERACY_RETRIES': 100,
    'VALIDATION_FRACTION': 0.15,
    'Z_COMBINATIONS': 4,
    # classifiers
    'KDE_BANDWIDTH_FLOOR': 1e-3,
    'KNN_K': 5,
    'KNN_EPSILON': 1e-12,
    'MLP_HIDDEN_LAYERS': 3,
    'MLP_MIN_WIDTH': 64,
    'MLP_WIDTH_FACTOR': 8,
    'MLP_STEP_SIZE': 0.05,
    'MLP_MOMENTUM': 0.9,
    'MLP_BATCH_SIZE': 64,
    'MLP_EPOCHS': 60,
    # recognition
    'THRESHOLD': 0.85,
    'MAX_ITERATIONS': 100,
    # evaluation (desk scale)
    'SAMPLES_PER_OBJECT': 2000,
    'TRIALS_PER_OBJECT': 300,
    'WORKERS': 1,
}


def get_setting(name):
    """
    Возвращает параметр из settings.GRASPID или значение по умолчанию.

    Example:
        get_setting('KNN_K') -> 5
    """
    if name not in DEFAULTS:
        raise KeyError(f"Неизвестный параметр: {name}")
    overrides = getattr(settings, 'GRASPID', {}) if settings.configured else {}
    return overrides.get(name, DEFAULTS[name])
