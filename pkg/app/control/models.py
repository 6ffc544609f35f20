# app/control/models.py
"""
Модели условий: боксы, элементы карты, эмбеддинги с ключевыми точками,
и таблица эмбеддингов классов (заглушка вместо текстового энкодера).
"""

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.errors import InvalidArgumentError, UnknownLabelError
from app.geometry import Point3

# Классы nuScenes
BOX_CLASSES = (
    "car",
    "truck",
    "construction_vehicle",
    "bus",
    "trailer",
    "barrier",
    "motorcycle",
    "bicycle",
    "pedestrian",
    "traffic_cone",
)

MAP_CLASSES = (
    "drivable_area",
    "ped_crossing",
    "walkway",
    "stop_line",
    "carpark_area",
    "divider",
    "boundary",
    "lane",
)

WEIGHT_TOLERANCE = 1e-6


def wrap_angle(angle: float) -> float:
    """Угол в (-pi, pi]."""
    wrapped = math.remainder(float(angle), 2 * math.pi)
    return math.pi if wrapped <= -math.pi else wrapped


# ==========================================
# BOX / MAP
# ==========================================

class Box3D(BaseModel):
    """3D бокс в ego координатах: центр, размеры (l, w, h), yaw вокруг z."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    center: tuple[float, float, float]
    size: tuple[float, float, float]
    yaw: float = 0.0
    semantic_class: str
    track_id: int | None = None

    @field_validator("size")
    @classmethod
    def check_size(cls, size):
        if min(size) <= 0:
            raise InvalidArgumentError(f"box size must be positive, got {size}")
        return size

    @field_validator("yaw")
    @classmethod
    def normalize_yaw(cls, yaw):
        return wrap_angle(yaw)

    def as_vector(self) -> np.ndarray:
        """(x, y, z, l, w, h, yaw) - вход MLP."""
        return np.array([*self.center, *self.size, self.yaw], dtype=np.float64)

    def rotation(self) -> np.ndarray:
        """3x3 поворот box -> ego."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    def to_ego(self, local: np.ndarray) -> np.ndarray:
        """Точки (N, 3) из системы бокса в ego."""
        local = np.asarray(local, dtype=np.float64)
        rotation = self.rotation()
        rotated = np.zeros_like(local)
        for k in range(3):
            rotated += local[..., k, None] * rotation[:, k]
        return rotated + np.asarray(self.center)


class MapElement(BaseModel):
    """Элемент карты: упорядоченные вершины (x, y) в ego."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    vertices: tuple[tuple[float, float], ...]
    kind: Literal["polygon", "linestring"] = "linestring"
    semantic_class: str

    @model_validator(mode="after")
    def check_vertices(self):
        minimum = 3 if self.kind == "polygon" else 2
        if len(self.vertices) < minimum:
            raise InvalidArgumentError(
                f"{self.kind} needs at least {minimum} vertices, got {len(self.vertices)}"
            )
        return self

    def as_array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=np.float64)


# ==========================================
# EMBEDDINGS
# ==========================================

class Keypoint(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    point: Point3
    weight: float

    @field_validator("weight")
    @classmethod
    def check_weight(cls, weight):
        if weight < 0:
            raise InvalidArgumentError(f"keypoint weight must be >= 0, got {weight}")
        return weight


@dataclass(frozen=True, eq=False)
class ConditionEmbedding:
    """
    Эмбеддинг объекта (E_box) или элемента карты (E_vec)
    с ключевыми точками для scatter-инъекции.
    """

    vector: np.ndarray
    source: Literal["box", "map"]
    keypoints: tuple[Keypoint, ...] = field(default_factory=tuple)
    track_id: int | None = None
    frame_index: int | None = None

    def __post_init__(self):
        vector = np.array(self.vector, dtype=np.float64)
        if vector.ndim != 1 or vector.size < 1:
            raise InvalidArgumentError(f"embedding vector must be 1-D, got shape {vector.shape}")
        if not np.all(np.isfinite(vector)):
            raise InvalidArgumentError("embedding vector has non-finite entries")
        if self.source not in ("box", "map"):
            raise InvalidArgumentError(f"unknown embedding source {self.source!r}")

        keypoints = tuple(self.keypoints)
        if keypoints:
            total = math.fsum(kp.weight for kp in keypoints)
            if abs(total - 1.0) > WEIGHT_TOLERANCE:
                raise InvalidArgumentError(f"keypoint weights must sum to 1, got {total}")

        vector.setflags(write=False)
        object.__setattr__(self, "vector", vector)
        object.__setattr__(self, "keypoints", keypoints)

    @property
    def dim(self) -> int:
        return self.vector.size

    def with_vector(self, vector: np.ndarray) -> "ConditionEmbedding":
        return replace(self, vector=vector)

    def with_keypoints(self, keypoints: Iterable[Keypoint]) -> "ConditionEmbedding":
        return replace(self, keypoints=tuple(keypoints))


class EmbeddingProvider:
    """
    Фиксированная таблица label -> вектор C_e.

    Вектор зависит только от (seed, label), поэтому порядок меток
    и их набор не влияют на значения.
    """

    def __init__(self, labels: Iterable[str], dim: int, seed: int = 0):
        if dim < 1:
            raise InvalidArgumentError(f"embedding dim must be >= 1, got {dim}")
        self.dim = int(dim)
        self.seed = int(seed)
        self._table = {label: self._vector_for(label) for label in labels}

    def _vector_for(self, label: str) -> np.ndarray:
        digest = int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "little")
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, digest]))
        vector = rng.uniform(-1.0, 1.0, size=self.dim)
        vector.setflags(write=False)
        return vector

    @classmethod
    def default(cls, dim: int, seed: int = 0) -> "EmbeddingProvider":
        """Все классы боксов и карты nuScenes."""
        return cls(BOX_CLASSES + MAP_CLASSES, dim, seed)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._table)

    def __contains__(self, label: str) -> bool:
        return label in self._table

    def __call__(self, label: str) -> np.ndarray:
        try:
            return self._table[label]
        except KeyError:
            raise UnknownLabelError(f"unknown semantic class {label!r}") from None
