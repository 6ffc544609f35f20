"""Геометрия камер: модели и операции."""

from .models import CameraModel, DepthAnchors, EgoPose, PixelCoord, Point3
from .camera import (
    DEPTH_EPS,
    back_project,
    back_project_pixels,
    make_lid_anchors,
    perturb_camera,
    project,
    project_points,
    relative_transform,
    transfer_point,
    transfer_points,
)

__all__ = [
    "CameraModel",
    "DepthAnchors",
    "EgoPose",
    "PixelCoord",
    "Point3",
    "DEPTH_EPS",
    "back_project",
    "back_project_pixels",
    "make_lid_anchors",
    "perturb_camera",
    "project",
    "project_points",
    "relative_transform",
    "transfer_point",
    "transfer_points",
]
