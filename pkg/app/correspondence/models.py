# app/correspondence/models.py
"""
Модели соответствий между видами.

- ViewRef - вид (камера + поза + кадр + роль)
- CorrespondenceField - для каждого пикселя запроса D точек в целевом виде
- OverlapScore - доля попаданий (критерий выбора целевых видов)
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from app.errors import InvalidArgumentError
from app.geometry import CameraModel, DepthAnchors, EgoPose


class ViewKind(str, Enum):
    """Откуда взят вид."""

    CURRENT = "current"         # текущий генерируемый кадр (cross-view)
    HISTORICAL = "historical"   # ранее сгенерированный кадр (temporal)
    REFERENCE = "reference"     # записанный реальный кадр (reference)


@dataclass(frozen=True, eq=False)
class ViewRef:
    """
    Вид = камера на конкретном кадре.

    view_index - позиция камеры в риге, используется для tie-break.
    """

    frame_index: int
    camera: CameraModel
    pose: EgoPose
    kind: ViewKind = ViewKind.CURRENT
    view_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "frame_index", int(self.frame_index))
        object.__setattr__(self, "kind", ViewKind(self.kind))

    @property
    def view_id(self) -> str:
        return self.camera.view_id

    def same_view_as(self, other: "ViewRef") -> bool:
        """Тот же view_id на том же кадре."""
        return self.view_id == other.view_id and self.frame_index == other.frame_index

    def identical_to(self, other: "ViewRef") -> bool:
        """Бит-в-бит та же камера и поза: соответствие тождественное."""
        return self.camera.same_as(other.camera) and self.pose.same_as(other.pose)


@dataclass(frozen=True, eq=False)
class CorrespondenceField:
    """
    targets[h, w, i] - координата (u, v) в латентной сетке целевого вида
    для пикселя (w, h) запроса на якоре d_i; valid[h, w, i] - попадание.
    """

    query_view: ViewRef
    target_view: ViewRef
    grid_size: tuple[int, int]
    anchors: DepthAnchors
    targets: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        height, width = (int(d) for d in self.grid_size)
        depth_count = len(self.anchors)

        targets = np.asarray(self.targets, dtype=np.float64)
        valid = np.asarray(self.valid, dtype=bool)

        if targets.shape != (height, width, depth_count, 2):
            raise InvalidArgumentError(
                f"targets must have shape {(height, width, depth_count, 2)}, got {targets.shape}"
            )
        if valid.shape != (height, width, depth_count):
            raise InvalidArgumentError(
                f"valid must have shape {(height, width, depth_count)}, got {valid.shape}"
            )

        targets.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "grid_size", (height, width))
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "valid", valid)

    @property
    def depth_count(self) -> int:
        return len(self.anchors)

    def as_tensor(self) -> np.ndarray:
        """(H, W, D, 3): u, v, valid - для записи в ECMT."""
        return np.concatenate([self.targets, self.valid[..., None].astype(np.float64)], axis=-1)


class OverlapScore(BaseModel):
    """fraction = hits / total, total = H * W * D."""

    model_config = ConfigDict(frozen=True)

    fraction: float
    hits: int
    total: int

    @model_validator(mode="after")
    def check_counts(self):
        if self.total <= 0 or not 0 <= self.hits <= self.total:
            raise InvalidArgumentError(f"bad overlap counts {self.hits}/{self.total}")
        if abs(self.fraction - self.hits / self.total) > 1e-12:
            raise InvalidArgumentError("overlap fraction must equal hits / total")
        return self

    @classmethod
    def from_counts(cls, hits: int, total: int) -> "OverlapScore":
        return cls(fraction=hits / total if total else 0.0, hits=hits, total=total)
