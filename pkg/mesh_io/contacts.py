# mesh_io/contacts.py
import logging
from pathlib import Path

import numpy as np

from .exceptions import EmptyMesh, OrientationUnknown
from .models import ContactCandidateSet

logger = logging.getLogger('mesh_io')

CSV_HEADER = "px,py,pz,nx,ny,nz"


def _face_geometry(mesh):
    tri = mesh.vertices[mesh.faces]
    centers = tri.mean(axis=1)
    cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    double_area = np.linalg.norm(cross, axis=1)
    return centers, cross / double_area[:, None], 0.5 * double_area


def mesh_to_contacts(mesh):
    """
    Одна пара (центр грани, внутренняя нормаль) на каждую грань сетки.

    Для ориентированной сетки нормаль - развёрнутая внешняя нормаль грани.
    Иначе нормаль разворачивается так, чтобы смотреть против вектора от
    центра сетки к центру грани; результат помечается orientation_inferred.
    Грани, плоскость которых проходит через центр (например, одиночный
    треугольник), сохраняют порядок обхода, если он согласован по всей сетке.

    Raises:
        EmptyMesh: в сетке нет граней
        OrientationUnknown: сторона грани не определяется ни центром, ни обходом
    """
    if mesh.face_count == 0:
        raise EmptyMesh(f"Сетка '{mesh.name}' пуста")

    centers, outward, areas = _face_geometry(mesh)

    if mesh.oriented:
        return ContactCandidateSet(points=centers, normals=-outward, source_mesh=mesh.name)

    centroid = (centers * areas[:, None]).sum(axis=0) / areas.sum()
    side = np.einsum('ij,ij->i', outward, centers - centroid)
    scale = np.linalg.norm(centers - centroid, axis=1).max()
    ambiguous = np.abs(side) <= 1e-9 * max(scale, 1e-300)
    sign = np.sign(side)
    if np.any(ambiguous):
        if not mesh.to_trimesh().is_winding_consistent:
            raise OrientationUnknown(
                f"Сетка '{mesh.name}': {int(ambiguous.sum())} граней без определимой внутренней стороны"
            )
        sign[ambiguous] = 1.0
    inward = -sign[:, None] * outward
    logger.warning(
        f"Сетка '{mesh.name}' не ориентирована: внутренние нормали восстановлены относительно центра"
    )
    return ContactCandidateSet(
        points=centers, normals=inward, source_mesh=mesh.name, orientation_inferred=True
    )


def perturb_contacts(contacts, sigma, rng):
    """
    Гауссов шум на положениях контактов: независимо по каждой координате, СКО sigma.

    Нормали не меняются. При sigma = 0 возвращается исходный набор.
    """
    if sigma < 0:
        raise ValueError(f"sigma должна быть неотрицательной: {sigma}")
    if sigma == 0:
        return contacts
    noise = rng.normal(0.0, sigma, size=contacts.points.shape)
    return ContactCandidateSet(
        points=contacts.points + noise,
        normals=contacts.normals,
        source_mesh=contacts.source_mesh,
        orientation_inferred=contacts.orientation_inferred,
    )


def export_contacts_csv(contacts, path):
    """CSV с заголовком px,py,pz,nx,ny,nz в порядке граней."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.hstack([contacts.points, contacts.normals])
    np.savetxt(path, table, delimiter=',', header=CSV_HEADER, comments='', fmt='%.17g')
    logger.info(f"{contacts} сохранены в {path}")
    return path


def load_contacts_csv(path, source_mesh=None):
    path = Path(path)
    with open(path, encoding='utf-8') as fh:
        header = fh.readline().strip()
    if header != CSV_HEADER:
        raise ValueError(f"{path}: ожидается заголовок '{CSV_HEADER}', получено '{header}'")
    table = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    return ContactCandidateSet(
        points=table[:, :3], normals=table[:, 3:6], source_mesh=source_mesh or path.stem
    )
