# app/geometry/camera.py
"""
Операции камеры: якоря глубины, обратная проекция, проекция, перенос между кадрами.

Векторные версии (*_pixels / *_points) работают с массивами (N, 2) / (N, 3),
скалярные (back_project / project / transfer_point) - обертки над ними.
"""

import numpy as np
import structlog
from scipy.spatial.transform import Rotation

from app.errors import InvalidArgumentError
from app.geometry.models import CameraModel, DepthAnchors, EgoPose, PixelCoord, Point3
from app.geometry.transforms import apply_transform, make_rigid, rigid_inverse

logger = structlog.get_logger()

# Точки ближе этой глубины считаются "за камерой"
DEPTH_EPS = 1e-6

# Диапазон якорей уже этого считается вырожденным
MIN_ANCHOR_SPAN = 1e-3


# ==========================================
# ЯКОРЯ ГЛУБИНЫ (LID)
# ==========================================

def make_lid_anchors(d_min: float, d_max: float, count: int) -> DepthAnchors:
    """
    Linear-increasing discretization.

        d_i = d_min + (d_max - d_min) * i (i + 1) / (D (D + 1)),  i = 1..D

    Ширина i-го бина растет линейно с i, последний якорь ровно d_max.

    Пример:
        make_lid_anchors(1, 60, 10).values[0]  → 2.0727...
        make_lid_anchors(1, 60, 2).values      → [20.667, 60.0]
    """
    if count < 2:
        raise InvalidArgumentError(f"need at least 2 depth anchors, got {count}")
    if d_min <= 0:
        raise InvalidArgumentError(f"d_min must be positive, got {d_min}")
    if d_max - d_min < MIN_ANCHOR_SPAN:
        raise InvalidArgumentError(f"degenerate depth range [{d_min}, {d_max}]")

    i = np.arange(1, count + 1, dtype=np.float64)
    values = d_min + (d_max - d_min) * i * (i + 1) / (count * (count + 1))
    values[-1] = d_max

    return DepthAnchors(values=values, d_min=d_min, d_max=d_max)


# ==========================================
# ОБРАТНАЯ ПРОЕКЦИЯ
# ==========================================

def back_project_pixels(uv: np.ndarray, cam: CameraModel, depth) -> np.ndarray:
    """
    Пиксели (N, 2) на глубине depth (скаляр или (N,)) -> ego точки (N, 3).

    Сначала K^-1 [u, v, 1] * d в системе камеры, потом обратный extrinsic.
    """
    uv = np.asarray(uv, dtype=np.float64)
    depth = np.broadcast_to(np.asarray(depth, dtype=np.float64), uv.shape[:-1])

    if np.any(~(depth > 0)):
        raise InvalidArgumentError("back-projection depth must be positive")

    y_norm = (uv[..., 1] - cam.cy) / cam.fy
    x_norm = (uv[..., 0] - cam.cx - cam.skew * y_norm) / cam.fx

    points_cam = np.stack([x_norm * depth, y_norm * depth, depth], axis=-1)
    return apply_transform(cam.camera_to_ego, points_cam)


def back_project(p: PixelCoord, cam: CameraModel, d: float) -> Point3:
    """
    Пиксель -> ego точка на глубине d (глубина по оси z камеры).

    Пример:
        fx=fy=100, cx=200, cy=100, единичный extrinsic
        back_project((300, 100), cam, 10) → (10, 0, 10)
    """
    if not d > 0:
        raise InvalidArgumentError(f"depth must be positive, got {d}")

    point = back_project_pixels(p.as_array()[None], cam, d)[0]
    return Point3.from_array(point, frame="ego")


# ==========================================
# ПРОЕКЦИЯ
# ==========================================

def project_points(
    points: np.ndarray,
    cam: CameraModel,
    depth_eps: float = DEPTH_EPS,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Ego точки (N, 3) -> (uv (N, 2), depth (N,), valid (N,)).

    valid = глубина > depth_eps и пиксель внутри [0, W) x [0, H).
    Пиксель возвращается и для невалидных точек (для диагностики);
    у точек на главной плоскости делим на ±depth_eps, чтобы не получить inf.
    """
    points_cam = apply_transform(cam.extrinsic, points)
    x, y, z = points_cam[..., 0], points_cam[..., 1], points_cam[..., 2]

    safe_z = np.where(np.abs(z) < depth_eps, np.copysign(depth_eps, z), z)
    u = (cam.fx * x + cam.skew * y) / safe_z + cam.cx
    v = (cam.fy * y) / safe_z + cam.cy

    valid = (z > depth_eps) & (u >= 0) & (u < cam.width) & (v >= 0) & (v < cam.height)
    return np.stack([u, v], axis=-1), z, valid


def project(P: Point3, cam: CameraModel) -> tuple[PixelCoord, float, bool]:
    """
    Ego точка -> (пиксель, глубина в системе камеры, валидность).

    Пример:
        project((0, 0, 10), cam) → ((200, 100), 10.0, True)
        project((0, 0, -5), cam) → (..., -5.0, False)
    """
    uv, depth, valid = project_points(P.as_array()[None], cam)
    return PixelCoord(u=float(uv[0, 0]), v=float(uv[0, 1])), float(depth[0]), bool(valid[0])


# ==========================================
# ПЕРЕНОС МЕЖДУ КАДРАМИ
# ==========================================

def relative_transform(pose_from: EgoPose, pose_to: EgoPose) -> np.ndarray | None:
    """
    E_to^-1 . E_from. None, если позы совпадают бит-в-бит
    (тогда перенос - точное тождество).
    """
    if pose_from.same_as(pose_to):
        return None
    return rigid_inverse(pose_to.matrix) @ pose_from.matrix


def transfer_points(points: np.ndarray, pose_from: EgoPose, pose_to: EgoPose) -> np.ndarray:
    """Ego точки кадра from -> ego точки кадра to."""
    transform = relative_transform(pose_from, pose_to)
    if transform is None:
        return np.array(points, dtype=np.float64)
    return apply_transform(transform, points)


def transfer_point(P: Point3, E_t: EgoPose, E_k: EgoPose) -> Point3:
    """
    P (ego@t) -> E_k^-1 . E_t . P (ego@k).

    Пример:
        E_t сдвигает ego на +5 м по global x, E_k = I
        transfer_point((0, 0, 0), E_t, E_k) → (5, 0, 0)
    """
    if E_t.same_as(E_k):
        return P
    point = transfer_points(P.as_array()[None], E_t, E_k)[0]
    return Point3.from_array(point, frame="ego")


# ==========================================
# ВОЗМУЩЕНИЕ КАМЕРЫ
# ==========================================

def perturb_camera(
    cam: CameraModel,
    yaw_deg: float = 0.0,
    pitch_deg: float = 0.0,
    roll_deg: float = 0.0,
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> CameraModel:
    """
    Повернуть камеру вокруг ее центра (оси ego) и сдвинуть центр в ego.

    yaw > 0 - поворот влево, pitch > 0 - наклон вниз, roll - вокруг ego x.
    Нужно для экспериментов с обобщением на другие параметры камеры,
    например "повернуть фронтальную камеру на 20° влево".
    """
    # внутренние углы Z-Y-X: Rz(yaw) . Ry(pitch) . Rx(roll)
    delta = Rotation.from_euler("ZYX", [yaw_deg, pitch_deg, roll_deg], degrees=True).as_matrix()

    camera_to_ego = cam.camera_to_ego
    rotation = delta @ camera_to_ego[:3, :3]
    center = camera_to_ego[:3, 3] + np.asarray(translation, dtype=np.float64)

    perturbed = cam.with_extrinsic(rigid_inverse(make_rigid(rotation, center)))
    logger.debug(
        "camera_perturbed",
        view_id=cam.view_id,
        yaw_deg=yaw_deg,
        pitch_deg=pitch_deg,
        roll_deg=roll_deg,
    )
    return perturbed
