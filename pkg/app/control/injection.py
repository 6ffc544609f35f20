# app/control/injection.py
"""
💉 SCATTER-ИНЪЕКЦИЯ

Обратная операция к билинейному чтению:
    x(u_m, v_m) += w_m · E
с раздачей по четырем соседним центрам с билинейными весами.
Тапы вне латента отбрасываются (на границе масса не сохраняется).
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import structlog

from app.control.models import ConditionEmbedding
from app.ecm.features import FeatureMap, bilinear_taps
from app.ecm.layers import Linear
from app.errors import InvalidArgumentError
from app.geometry import CameraModel, project_points

logger = structlog.get_logger()

PROMPT_TEMPLATE = "A driving scene image. {weather}. {daytime}."


@dataclass(frozen=True, eq=False)
class ChannelAdapter:
    """Фиксированная линейная карта C_e -> C для латента другой ширины."""

    linear: Linear

    @classmethod
    def seeded(cls, embedding_dim: int, channels: int, seed: int = 0) -> "ChannelAdapter":
        return cls(Linear.seeded(embedding_dim, channels, np.random.default_rng(seed)))

    @property
    def channels(self) -> int:
        return self.linear.out_features

    def __call__(self, vector: np.ndarray) -> np.ndarray:
        return self.linear(vector)


def _latent_vector(e: ConditionEmbedding, channels: int, adapter: ChannelAdapter | None) -> np.ndarray:
    if e.dim == channels:
        return e.vector
    if adapter is None:
        raise InvalidArgumentError(
            f"embedding width {e.dim} != latent channels {channels} and no adapter given"
        )
    if adapter.linear.in_features != e.dim or adapter.channels != channels:
        raise InvalidArgumentError(
            f"adapter maps {adapter.linear.in_features} -> {adapter.channels}, "
            f"need {e.dim} -> {channels}"
        )
    return adapter(e.vector)


def _scatter_into(data: np.ndarray, e: ConditionEmbedding, grid_cam: CameraModel, adapter) -> int:
    """Добавляет e в data на месте; возвращает число видимых ключевых точек."""
    if not e.keypoints:
        return 0

    channels, height, width = data.shape
    vector = _latent_vector(e, channels, adapter)

    points = np.array([kp.point.as_array() for kp in e.keypoints])
    uv, _, valid = project_points(points, grid_cam)
    taps = bilinear_taps(uv, height, width)

    for m, keypoint in enumerate(e.keypoints):
        if not valid[m]:
            continue
        for rows, cols, tap_weights in taps:
            tap = tap_weights[m]
            if tap == 0.0:
                continue
            data[:, rows[m], cols[m]] += (tap * keypoint.weight) * vector

    return int(valid.sum())


def scatter_inject(
    latent: FeatureMap,
    e: ConditionEmbedding,
    cam: CameraModel,
    adapter: ChannelAdapter | None = None,
) -> FeatureMap:
    """Новый латент с добавленным эмбеддингом; вход не меняется."""
    data = np.array(latent.data)
    grid_cam = cam.scaled_to(latent.width, latent.height)
    visible = _scatter_into(data, e, grid_cam, adapter)

    logger.debug("embedding_injected", view_id=cam.view_id, visible=visible, total=len(e.keypoints))
    return latent.with_data(data)


def _injection_order(e: ConditionEmbedding) -> tuple:
    return (
        e.source,
        -1 if e.track_id is None else e.track_id,
        tuple(e.vector.tolist()),
        tuple((kp.point.x, kp.point.y, kp.point.z, kp.weight) for kp in e.keypoints),
    )


def scatter_inject_many(
    latent: FeatureMap,
    embeddings: Sequence[ConditionEmbedding],
    cam: CameraModel,
    adapter: ChannelAdapter | None = None,
) -> FeatureMap:
    """
    Инъекция нескольких эмбеддингов.

    Эмбеддинги добавляются в каноническом порядке, поэтому результат
    не зависит от порядка во входном списке.
    """
    data = np.array(latent.data)
    grid_cam = cam.scaled_to(latent.width, latent.height)

    visible = 0
    for e in sorted(embeddings, key=_injection_order):
        visible += _scatter_into(data, e, grid_cam, adapter)

    logger.debug("embeddings_injected", view_id=cam.view_id, embeddings=len(embeddings), visible=visible)
    return latent.with_data(data)


def build_prompt(weather: str = "sunny", daytime: str = "day") -> str:
    """Текстовый промпт сцены (хранится как метаданные)."""
    return PROMPT_TEMPLATE.format(weather=weather.strip().capitalize(), daytime=daytime.strip().capitalize())
