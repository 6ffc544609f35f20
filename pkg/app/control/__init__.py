"""Условия: кодирование боксов и карты, identity, scatter-инъекция."""

from .models import (
    BOX_CLASSES,
    MAP_CLASSES,
    Box3D,
    ConditionEmbedding,
    EmbeddingProvider,
    Keypoint,
    MapElement,
    wrap_angle,
)
from .encoding import BOX_INPUT_DIM, Mlp, encode_box, encode_boxes, encode_map, resample_polyline
from .keypoints import FIXED_LOCAL, KeypointHead, attach_keypoints, generate_keypoints
from .identity import aggregate_appearance, find_track, update_embedding_identity
from .injection import ChannelAdapter, build_prompt, scatter_inject, scatter_inject_many

__all__ = [
    "BOX_CLASSES",
    "MAP_CLASSES",
    "Box3D",
    "ConditionEmbedding",
    "EmbeddingProvider",
    "Keypoint",
    "MapElement",
    "wrap_angle",
    "BOX_INPUT_DIM",
    "Mlp",
    "encode_box",
    "encode_boxes",
    "encode_map",
    "resample_polyline",
    "FIXED_LOCAL",
    "KeypointHead",
    "attach_keypoints",
    "generate_keypoints",
    "aggregate_appearance",
    "find_track",
    "update_embedding_identity",
    "ChannelAdapter",
    "build_prompt",
    "scatter_inject",
    "scatter_inject_many",
]
