# app/ecm/features.py
"""
FeatureMap и билинейное чтение.

Пиксель (i, j) занимает [i, i+1) x [j, j+1), центр в (i + 0.5, j + 0.5).
Чтение идет по четырем соседним центрам, вне карты - нули.
"""

from dataclasses import dataclass

import numpy as np

from app.errors import InvalidArgumentError
from app.geometry import PixelCoord


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Плотная карта признаков (C, H, W) с тегом кадра/вида."""

    data: np.ndarray
    tag: str = ""

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 3 or min(data.shape) < 1:
            raise InvalidArgumentError(f"feature map must be (C, H, W) with dims >= 1, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InvalidArgumentError("feature map has non-finite values")

        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "tag", str(self.tag))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def grid(self) -> tuple[int, int]:
        return self.height, self.width

    @classmethod
    def zeros(cls, channels: int, height: int, width: int, tag: str = "") -> "FeatureMap":
        return cls(np.zeros((channels, height, width)), tag)

    def with_data(self, data: np.ndarray) -> "FeatureMap":
        """Новая карта с тем же тегом."""
        return FeatureMap(data, self.tag)


def bilinear_taps(points: np.ndarray, height: int, width: int):
    """
    Четыре соседних центра для точек (..., 2) = (u, v).

    Возвращает список (row, col, weight) в порядке 00, 10, 01, 11;
    вес 0 у тапов вне карты, индексы у них обрезаны до границ.
    """
    points = np.asarray(points, dtype=np.float64)
    finite = np.all(np.isfinite(points), axis=-1)

    # далеко за картой все равно нули, клип держит floor в int-диапазоне
    x = np.clip(np.nan_to_num(points[..., 0] - 0.5), -2.0, width + 1.0)
    y = np.clip(np.nan_to_num(points[..., 1] - 0.5), -2.0, height + 1.0)

    x0 = np.floor(x)
    y0 = np.floor(y)
    ax = x - x0
    ay = y - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)

    taps = []
    for dy, wy in ((0, 1.0 - ay), (1, ay)):
        for dx, wx in ((0, 1.0 - ax), (1, ax)):
            col = x0 + dx
            row = y0 + dy
            inside = finite & (col >= 0) & (col < width) & (row >= 0) & (row < height)
            weight = np.where(inside, wx * wy, 0.0)
            taps.append((np.clip(row, 0, height - 1), np.clip(col, 0, width - 1), weight))

    return taps


def gather_bilinear_points(feature_map: FeatureMap, points: np.ndarray) -> np.ndarray:
    """Билинейное чтение в точках (..., 2); результат (..., C)."""
    data = feature_map.data
    points = np.asarray(points, dtype=np.float64)
    out = np.zeros(points.shape[:-1] + (feature_map.channels,))

    for row, col, weight in bilinear_taps(points, feature_map.height, feature_map.width):
        values = np.moveaxis(data[:, row, col], 0, -1)
        out += weight[..., None] * values
    return out


def gather_bilinear(feature_map: FeatureMap, p: PixelCoord) -> np.ndarray:
    """Признак (C,) в субпиксельной точке p."""
    return gather_bilinear_points(feature_map, p.as_array())
