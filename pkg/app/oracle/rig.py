# app/oracle/rig.py
"""
Риг из 6 камер в духе nuScenes.

Кольцевой порядок: front, front_right, back_right, back, back_left, front_left.
yaw > 0 - камера смотрит влево (ego y влево), pitch > 0 - вниз.
"""

import math
from typing import Sequence

import numpy as np

from app.correspondence import ViewKind, ViewRef
from app.geometry import CameraModel, EgoPose
from app.geometry.transforms import make_rigid

CAMERA_HEIGHT = 1.5

# (view_id, yaw в градусах, горизонтальный FOV в градусах)
RIG_LAYOUT = (
    ("CAM_FRONT", 0.0, 70.0),
    ("CAM_FRONT_RIGHT", -55.0, 70.0),
    ("CAM_BACK_RIGHT", -110.0, 70.0),
    ("CAM_BACK", 180.0, 110.0),
    ("CAM_BACK_LEFT", 110.0, 70.0),
    ("CAM_FRONT_LEFT", 55.0, 70.0),
)


def make_camera(
    view_id: str,
    yaw_deg: float,
    fov_deg: float = 70.0,
    width: int = 400,
    height: int = 224,
    mount_height: float = CAMERA_HEIGHT,
    pitch_deg: float = 0.0,
    position: tuple[float, float] = (0.0, 0.0),
) -> CameraModel:
    """
    Камера с квадратными пикселями и главной точкой в центре кадра.

    Оси камеры в ego:
        z_c = вперед по yaw/pitch, x_c = вправо, y_c = z_c × x_c (вниз)
    """
    yaw = math.radians(yaw_deg)
    pitch = math.radians(pitch_deg)
    focal = (width / 2.0) / math.tan(math.radians(fov_deg) / 2.0)

    intrinsic = np.array(
        [
            [focal, 0.0, width / 2.0],
            [0.0, focal, height / 2.0],
            [0.0, 0.0, 1.0],
        ]
    )

    z_axis = np.array([math.cos(yaw) * math.cos(pitch), math.sin(yaw) * math.cos(pitch), -math.sin(pitch)])
    x_axis = np.array([math.sin(yaw), -math.cos(yaw), 0.0])
    y_axis = np.cross(z_axis, x_axis)
    rotation = np.stack([x_axis, y_axis, z_axis])

    center = np.array([position[0], position[1], mount_height])
    extrinsic = make_rigid(rotation, -(rotation @ center))

    return CameraModel(intrinsic, extrinsic, (width, height), view_id)


def make_rig(width: int = 400, height: int = 224, mount_height: float = CAMERA_HEIGHT) -> tuple[CameraModel, ...]:
    """6 камер в кольцевом порядке RIG_LAYOUT."""
    return tuple(
        make_camera(view_id, yaw, fov, width, height, mount_height)
        for view_id, yaw, fov in RIG_LAYOUT
    )


def rig_view_refs(
    cameras: Sequence[CameraModel],
    pose: EgoPose,
    kind: ViewKind = ViewKind.CURRENT,
) -> list[ViewRef]:
    """ViewRef для каждой камеры рига; view_index = позиция в кольце."""
    return [
        ViewRef(frame_index=pose.frame_index, camera=cam, pose=pose, kind=kind, view_index=index)
        for index, cam in enumerate(cameras)
    ]
