"""Соответствия между видами и выбор целевых видов."""

from .models import CorrespondenceField, OverlapScore, ViewKind, ViewRef
from .field import build_field, overlap, pixel_centers
from .matching import match_target_views, neighbor_target_views, target_view_count

__all__ = [
    "CorrespondenceField",
    "OverlapScore",
    "ViewKind",
    "ViewRef",
    "build_field",
    "overlap",
    "pixel_centers",
    "match_target_views",
    "neighbor_target_views",
    "target_view_count",
]
