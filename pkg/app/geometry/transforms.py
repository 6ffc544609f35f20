# app/geometry/transforms.py
"""
Однородные 4x4 преобразования.

apply_transform считает каждую координату явной суммой произведений,
без BLAS: результат для точки не зависит от того, сколько точек
обрабатывается за раз.
"""

import numpy as np

RIGID_TOLERANCE = 1e-9


def apply_transform(matrix: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Применить 4x4 матрицу к точкам формы (..., 3)."""
    points = np.asarray(points, dtype=np.float64)
    x, y, z = points[..., 0], points[..., 1], points[..., 2]

    out = np.empty(points.shape, dtype=np.float64)
    for i in range(3):
        out[..., i] = matrix[i, 0] * x + matrix[i, 1] * y + matrix[i, 2] * z + matrix[i, 3]
    return out


def rigid_inverse(matrix: np.ndarray) -> np.ndarray:
    """Обратная к жесткому преобразованию: [R^T | -R^T t]."""
    rotation_t = matrix[:3, :3].T
    inverse = np.eye(4)
    inverse[:3, :3] = rotation_t
    inverse[:3, 3] = -(rotation_t @ matrix[:3, 3])
    return inverse


def rigid_violation(matrix: np.ndarray) -> str | None:
    """
    Проверить, что матрица - жесткое преобразование.

    Возвращает описание нарушения или None.
    """
    if matrix.shape != (4, 4):
        return f"expected 4x4 matrix, got {matrix.shape}"
    if not np.all(np.isfinite(matrix)):
        return "matrix has non-finite entries"
    if not np.array_equal(matrix[3], [0.0, 0.0, 0.0, 1.0]):
        return "last row must be (0, 0, 0, 1)"

    rotation = matrix[:3, :3]
    error = np.max(np.abs(rotation.T @ rotation - np.eye(3)))
    if error > RIGID_TOLERANCE:
        return f"rotation block is not orthonormal (max |R^T R - I| = {error:.3e})"
    if np.linalg.det(rotation) <= 0:
        return "rotation block is a reflection"
    return None


def make_rigid(rotation: np.ndarray, translation) -> np.ndarray:
    """Собрать 4x4 из R (3x3) и t (3,)."""
    matrix = np.eye(4)
    matrix[:3, :3] = rotation
    matrix[:3, 3] = translation
    return matrix


def translation_matrix(x: float = 0.0, y: float = 0.0, z: float = 0.0) -> np.ndarray:
    return make_rigid(np.eye(3), (x, y, z))
