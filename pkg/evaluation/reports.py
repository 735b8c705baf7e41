# evaluation/reports.py
"""
Файлы отчётов: JSON-сводка, CSV по опытам и CSV матрицы ошибок.

Строки и ключи пишутся в фиксированном порядке, числа форматируются явно:
при одном сиде повторный запуск даёт байт-в-байт одинаковые файлы.
"""
import csv
import json
import logging
from pathlib import Path

logger = logging.getLogger('evaluation')

TRIAL_COLUMNS = ['object', 'trial', 'method', 'converged', 'samples', 'updates', 'predicted', 'correct',
                 'certainty', 'scale']
QUALITY_COLUMNS = ['object', 'sample', 'volume_ratio', 'mean_normal_angle', 'certainty']


def _json(data, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding='utf-8')
    return path


def _csv(rows, columns, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator='\n')
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_report(report, directory, prefix=None):
    """
    Три файла отчёта серии опытов в каталоге:
    <prefix>.json, <prefix>_trials.csv, <prefix>_confusion.csv.
    По умолчанию prefix - имя метода.

    Returns:
        (путь сводки, путь опытов, путь матрицы)
    """
    directory = Path(directory)
    prefix = prefix or report.config.method.value
    summary = _json(report.as_dict(), directory / f"{prefix}.json")
    trials = _csv([r.as_row() for r in report.records], TRIAL_COLUMNS, directory / f"{prefix}_trials.csv")

    confusion = report.confusion()
    rows = [
        {'object': name, **{other: f"{confusion[i, j]:.6f}" for j, other in enumerate(report.class_names)}}
        for i, name in enumerate(report.class_names)
    ]
    matrix = _csv(rows, ['object', *report.class_names], directory / f"{prefix}_confusion.csv")
    logger.info(f"Отчёт {prefix} записан в {directory}")
    return summary, trials, matrix


def write_curve(curve, path):
    """Кривая успеха по числу захватов: столбцы k, success и по одному на объект."""
    names = list(curve[0]['per_object']) if curve else []
    rows = [
        {'k': point['k'], 'success': f"{point['success']:.4f}",
         **{name: f"{point['per_object'][name]:.4f}" for name in names}}
        for point in curve
    ]
    return _csv(rows, ['k', 'success', *names], path)


def write_table(rows, path, columns=None):
    """Плоская таблица (абляция, сравнение классификаторов); вещественные числа с 6 знаками."""
    columns = columns or (list(rows[0]) if rows else [])
    formatted = [
        {key: f"{value:.6f}" if isinstance(value, float) else value for key, value in row.items() if key in columns}
        for row in rows
    ]
    return _csv(formatted, columns, path)


def write_geometry(rows, families, path):
    """Таблица долей ответов по семействам: строка на запрос."""
    table = [
        {'query': row['query'], 'trials': row['trials'], 'failed': row['failed'],
         **{family: f"{row['rates'][family]:.2f}" for family in families},
         'predicted': row['predicted'] or ""}
        for row in rows
    ]
    return _csv(table, ['query', 'trials', 'failed', *families, 'predicted'], path)


def write_quality(samples, correlation, directory):
    """Пары (качество, уверенность) в CSV и корреляции в JSON."""
    directory = Path(directory)
    table = _csv([s.as_row() for s in samples], QUALITY_COLUMNS, directory / 'quality.csv')
    summary = _json(correlation, directory / 'quality.json')
    return summary, table


def write_json(data, path):
    return _json(data, path)
