# app/control/keypoints.py
"""
Ключевые точки вокруг бокса.

Фиксированные: центр, 6 центров граней, дальше углы (до 15).
Обучаемые: центр + tanh(offset(e)) * (l, w, h) / 2.
Веса: softmax(readout(e)).
"""

from dataclasses import dataclass

import numpy as np

from app.control.models import Box3D, ConditionEmbedding, Keypoint
from app.ecm.layers import Linear, softmax
from app.errors import InvalidArgumentError
from app.geometry import Point3

# В единицах полуразмера бокса, система бокса (x - длина, y - ширина, z - высота)
FIXED_LOCAL = np.array(
    [
        [0, 0, 0],
        [1, 0, 0], [-1, 0, 0],
        [0, 1, 0], [0, -1, 0],
        [0, 0, 1], [0, 0, -1],
        [1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1],
        [-1, 1, 1], [-1, 1, -1], [-1, -1, 1], [-1, -1, -1],
    ],
    dtype=np.float64,
)

MAX_FIXED = len(FIXED_LOCAL)


@dataclass(frozen=True, eq=False)
class KeypointHead:
    offset: Linear      # C_e -> 3 * n_learned
    readout: Linear     # C_e -> n_fixed + n_learned

    def __post_init__(self):
        if self.offset.in_features != self.readout.in_features:
            raise InvalidArgumentError("offset and readout must read the same embedding width")
        if self.offset.out_features % 3:
            raise InvalidArgumentError("offset head must predict xyz triples")

    @property
    def embedding_dim(self) -> int:
        return self.readout.in_features

    @property
    def n_learned(self) -> int:
        return self.offset.out_features // 3

    @property
    def n_total(self) -> int:
        return self.readout.out_features

    @classmethod
    def seeded(cls, embedding_dim: int, n_fixed: int, n_learned: int, seed: int = 0) -> "KeypointHead":
        rng = np.random.default_rng(seed)
        return cls(
            Linear.seeded(embedding_dim, 3 * n_learned, rng),
            Linear.seeded(embedding_dim, n_fixed + n_learned, rng),
        )

    @classmethod
    def zeros(cls, embedding_dim: int, n_fixed: int, n_learned: int) -> "KeypointHead":
        return cls(
            Linear.zeros(embedding_dim, 3 * n_learned),
            Linear.zeros(embedding_dim, n_fixed + n_learned),
        )


def generate_keypoints(
    b: Box3D,
    e: ConditionEmbedding,
    n_fixed: int,
    n_learned: int,
    head: KeypointHead,
) -> tuple[Keypoint, ...]:
    """Ключевые точки бокса в ego координатах и их веса (сумма = 1)."""
    if not 1 <= n_fixed <= MAX_FIXED:
        raise InvalidArgumentError(f"n_fixed must be in [1, {MAX_FIXED}], got {n_fixed}")
    if n_learned < 0:
        raise InvalidArgumentError(f"n_learned must be >= 0, got {n_learned}")
    if head.n_learned != n_learned or head.n_total != n_fixed + n_learned:
        raise InvalidArgumentError(
            f"head is built for {head.n_total - head.n_learned}+{head.n_learned} keypoints, "
            f"asked for {n_fixed}+{n_learned}"
        )
    if head.embedding_dim != e.dim:
        raise InvalidArgumentError(f"head reads {head.embedding_dim} channels, embedding has {e.dim}")

    half = np.asarray(b.size) / 2.0
    local = FIXED_LOCAL[:n_fixed] * half

    if n_learned:
        offsets = np.tanh(head.offset(e.vector).reshape(n_learned, 3)) * half
        local = np.vstack([local, offsets])

    points = b.to_ego(local)
    weights = softmax(head.readout(e.vector))

    return tuple(
        Keypoint(point=Point3.from_array(point, frame="ego"), weight=float(weight))
        for point, weight in zip(points, weights)
    )


def attach_keypoints(
    b: Box3D,
    e: ConditionEmbedding,
    n_fixed: int,
    n_learned: int,
    head: KeypointHead,
) -> ConditionEmbedding:
    return e.with_keypoints(generate_keypoints(b, e, n_fixed, n_learned, head))
