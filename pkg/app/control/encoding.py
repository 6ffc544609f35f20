# app/control/encoding.py
"""
📦 КОДИРОВАНИЕ УСЛОВИЙ

E_box = MLP(x, y, z, l, w, h, yaw) + emb(class)
E_vec = MLP(N_v вершин после ресемплинга) + emb(class)

3D информация (глубина, размер, ориентация) идет в MLP напрямую,
без проекции на изображение.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import structlog

from app.control.models import Box3D, ConditionEmbedding, EmbeddingProvider, Keypoint, MapElement
from app.ecm.layers import Linear, silu
from app.errors import InvalidArgumentError
from app.geometry import Point3

logger = structlog.get_logger()

BOX_INPUT_DIM = 7


@dataclass(frozen=True, eq=False)
class Mlp:
    """Последовательность Linear, SiLU между слоями (после последнего - нет)."""

    layers: tuple[Linear, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise InvalidArgumentError("mlp needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if prev.out_features != nxt.in_features:
                raise InvalidArgumentError(
                    f"layer widths do not chain: {prev.out_features} -> {nxt.in_features}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def in_features(self) -> int:
        return self.layers[0].in_features

    @property
    def out_features(self) -> int:
        return self.layers[-1].out_features

    @classmethod
    def seeded(cls, in_features: int, out_features: int, hidden: int, seed: int = 0) -> "Mlp":
        rng = np.random.default_rng(seed)
        return cls((Linear.seeded(in_features, hidden, rng), Linear.seeded(hidden, out_features, rng)))

    @classmethod
    def zeros(cls, in_features: int, out_features: int, hidden: int | None = None) -> "Mlp":
        hidden = hidden or out_features
        return cls((Linear.zeros(in_features, hidden), Linear.zeros(hidden, out_features)))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        out = np.asarray(x, dtype=np.float64)
        for index, layer in enumerate(self.layers):
            if index:
                out = silu(out)
            out = layer(out)
        return out


def _check_mlp(mlp: Mlp, in_features: int, provider: EmbeddingProvider) -> None:
    if mlp.in_features != in_features:
        raise InvalidArgumentError(f"mlp expects {mlp.in_features} inputs, got {in_features}")
    if mlp.out_features != provider.dim:
        raise InvalidArgumentError(
            f"mlp output {mlp.out_features} != provider dim {provider.dim}"
        )


# ==========================================
# BOX
# ==========================================

def encode_box(
    b: Box3D,
    provider: EmbeddingProvider,
    mlp: Mlp,
    frame_index: int | None = None,
) -> ConditionEmbedding:
    """Эмбеддинг бокса без ключевых точек (их дает generate_keypoints)."""
    _check_mlp(mlp, BOX_INPUT_DIM, provider)
    class_vector = provider(b.semantic_class)

    vector = mlp(b.as_vector()) + class_vector
    return ConditionEmbedding(
        vector=vector,
        source="box",
        track_id=b.track_id,
        frame_index=frame_index,
    )


# ==========================================
# MAP
# ==========================================

def resample_polyline(vertices: np.ndarray, n_points: int, closed: bool = False) -> np.ndarray:
    """
    Равномерный ресемплинг ломаной по длине дуги.

    Открытая: первая и последняя вершины сохраняются.
    Замкнутая: n_points точек по периметру начиная с первой вершины.
    """
    vertices = np.asarray(vertices, dtype=np.float64)
    if vertices.ndim != 2 or vertices.shape[0] < 2:
        raise InvalidArgumentError(f"polyline needs at least 2 vertices, got shape {vertices.shape}")
    if n_points < 2:
        raise InvalidArgumentError(f"n_points must be >= 2, got {n_points}")

    if closed:
        vertices = np.vstack([vertices, vertices[:1]])

    steps = np.linalg.norm(np.diff(vertices, axis=0), axis=1)
    keep = np.concatenate([[True], steps > 0])
    vertices = vertices[keep]
    arc = np.concatenate([[0.0], np.cumsum(steps[steps > 0])])

    if arc[-1] == 0:
        return np.repeat(vertices[:1], n_points, axis=0)

    targets = np.linspace(0.0, arc[-1], n_points, endpoint=not closed)
    return np.stack(
        [np.interp(targets, arc, vertices[:, k]) for k in range(vertices.shape[1])],
        axis=1,
    )


def encode_map(
    m: MapElement,
    provider: EmbeddingProvider,
    mlp: Mlp,
    n_points: int = 20,
    frame_index: int | None = None,
) -> ConditionEmbedding:
    """
    Эмбеддинг элемента карты.

    Ключевые точки - сами ресемплированные вершины на земле (z = 0)
    с равными весами.
    """
    _check_mlp(mlp, 2 * n_points, provider)
    class_vector = provider(m.semantic_class)

    points = resample_polyline(m.as_array(), n_points, closed=m.kind == "polygon")
    vector = mlp(points.reshape(-1)) + class_vector

    weight = 1.0 / n_points
    keypoints = [
        Keypoint(point=Point3(x=float(x), y=float(y), z=0.0, frame="ego"), weight=weight)
        for x, y in points
    ]

    return ConditionEmbedding(
        vector=vector,
        source="map",
        keypoints=tuple(keypoints),
        frame_index=frame_index,
    )


def encode_boxes(
    boxes: Sequence[Box3D],
    provider: EmbeddingProvider,
    mlp: Mlp,
    frame_index: int | None = None,
) -> list[ConditionEmbedding]:
    embeddings = [encode_box(b, provider, mlp, frame_index) for b in boxes]
    logger.debug("boxes_encoded", count=len(embeddings), frame=frame_index)
    return embeddings
