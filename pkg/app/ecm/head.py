# app/ecm/head.py
"""
Голова весов по глубине: W_q = Softmax(MLP(f_q)).

MLP: C -> hidden -> D, SiLU между слоями. Не обучается,
параметры берутся из сида (или задаются явно в тестах).
"""

from dataclasses import dataclass

import numpy as np

from app.ecm.layers import Linear, silu, softmax
from app.errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class DepthWeightHead:
    hidden: Linear
    output: Linear

    def __post_init__(self):
        if self.hidden.out_features != self.output.in_features:
            raise InvalidArgumentError(
                f"hidden width {self.hidden.out_features} != output input {self.output.in_features}"
            )

    @property
    def channels(self) -> int:
        return self.hidden.in_features

    @property
    def depth_count(self) -> int:
        return self.output.out_features

    @classmethod
    def seeded(cls, channels: int, depth_count: int, hidden: int | None = None, seed: int = 0) -> "DepthWeightHead":
        """Сидированная голова; hidden по умолчанию = C."""
        hidden = hidden or channels
        rng = np.random.default_rng(seed)
        return cls(Linear.seeded(channels, hidden, rng), Linear.seeded(hidden, depth_count, rng))

    @classmethod
    def zeros(cls, channels: int, depth_count: int, hidden: int | None = None) -> "DepthWeightHead":
        """Нулевые параметры: веса равномерные 1/D."""
        hidden = hidden or channels
        return cls(Linear.zeros(channels, hidden), Linear.zeros(hidden, depth_count))

    def logits(self, features: np.ndarray) -> np.ndarray:
        return self.output(silu(self.hidden(features)))


def depth_weights_batch(features: np.ndarray, head: DepthWeightHead) -> np.ndarray:
    """Веса по якорям для (..., C) -> (..., D)."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim < 1 or features.shape[-1] != head.channels:
        raise InvalidArgumentError(
            f"feature width {features.shape[-1:]} does not match head channels {head.channels}"
        )
    if not np.all(np.isfinite(features)):
        raise InvalidArgumentError("query features must be finite")
    return softmax(head.logits(features))


def depth_weights(f_q: np.ndarray, head: DepthWeightHead) -> np.ndarray:
    """Распределение по D якорям для одного вектора признаков."""
    f_q = np.asarray(f_q, dtype=np.float64)
    if f_q.ndim != 1:
        raise InvalidArgumentError(f"f_q must be a vector, got shape {f_q.shape}")
    return depth_weights_batch(f_q, head)
