"""ECM: веса по глубине и агрегация признаков вдоль полей соответствий."""

from .features import FeatureMap, bilinear_taps, gather_bilinear, gather_bilinear_points
from .head import DepthWeightHead, depth_weights, depth_weights_batch
from .layers import Linear, silu, softmax
from .attention import aggregate

__all__ = [
    "FeatureMap",
    "bilinear_taps",
    "gather_bilinear",
    "gather_bilinear_points",
    "DepthWeightHead",
    "depth_weights",
    "depth_weights_batch",
    "Linear",
    "silu",
    "softmax",
    "aggregate",
]
