# classifiers/utils.py
import numpy as np

from grasp_param.exceptions import ShapeMismatch
from grasp_param.models import ParamVector


def as_query_matrix(shape, queries):
    """
    Матрица запросов (B, w) из ParamVector, одной строки или матрицы.

    Raises:
        ShapeMismatch: метаданные вектора или ширина не совпадают с моделью
    """
    if isinstance(queries, ParamVector):
        if queries.shape != shape:
            raise ShapeMismatch(f"Вектор {queries.shape} не подходит к модели {shape}")
        queries = queries.values
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if queries.ndim != 2 or queries.shape[1] != shape.width:
        raise ShapeMismatch(f"Ширина запроса {queries.shape[-1]} != w = {shape.width}")
    return queries
