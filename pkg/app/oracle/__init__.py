"""Синтетическая сцена: рендер, риг, проверка соответствий по истинной глубине."""

from .rig import CAMERA_HEIGHT, RIG_LAYOUT, make_camera, make_rig, rig_view_refs
from .scene import RenderedView, SceneObject, SyntheticScene, cast_pixels, checker_cells, render
from .verify import VerificationReport, verify_correspondence
from .images import encode_ppm, write_ppm

__all__ = [
    "CAMERA_HEIGHT",
    "RIG_LAYOUT",
    "make_camera",
    "make_rig",
    "rig_view_refs",
    "RenderedView",
    "SceneObject",
    "SyntheticScene",
    "cast_pixels",
    "checker_cells",
    "render",
    "VerificationReport",
    "verify_correspondence",
    "encode_ppm",
    "write_ppm",
]
