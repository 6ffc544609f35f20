# app/geometry/models.py
"""
📐 МОДЕЛИ ГЕОМЕТРИИ

- CameraModel (pinhole + extrinsic ego -> camera)
- EgoPose (ego -> global)
- DepthAnchors (дискретные глубины для обратной проекции)
- PixelCoord / Point3 (скалярные точки)

Соглашения о системах координат:
    camera: x вправо, y вниз, z вперед
    ego:    x вперед, y влево, z вверх
Поворот между ними целиком живет в extrinsic.

Массивы внутри моделей заморожены (writeable=False): модели неизменяемы.
"""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict

from app.errors import InvalidArgumentError, InvalidCameraError, InvalidPoseError
from app.geometry.transforms import rigid_inverse, rigid_violation

# Гэп между соседними якорями должен не убывать (с допуском на округление)
GAP_TOLERANCE = 1e-9


def _frozen_array(value, shape: tuple[int, ...], error: type[Exception], name: str) -> np.ndarray:
    try:
        array = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise error(f"{name} is not numeric: {e}") from e

    if array.shape != shape:
        raise error(f"{name} must have shape {shape}, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise error(f"{name} has non-finite entries")

    array.setflags(write=False)
    return array


# ==========================================
# CAMERA
# ==========================================

@dataclass(frozen=True, eq=False)
class CameraModel:
    """
    Pinhole камера.

    intrinsic: 3x3 (fx, skew, cx / 0, fy, cy / 0, 0, 1), пиксели
    extrinsic: 4x4 жесткое преобразование ego -> camera
    image_size: (width, height)
    """

    intrinsic: np.ndarray
    extrinsic: np.ndarray
    image_size: tuple[int, int]
    view_id: str = ""

    def __post_init__(self):
        intrinsic = _frozen_array(self.intrinsic, (3, 3), InvalidCameraError, "intrinsic")
        extrinsic = _frozen_array(self.extrinsic, (4, 4), InvalidCameraError, "extrinsic")

        try:
            width, height = (int(d) for d in self.image_size)
        except (TypeError, ValueError) as e:
            raise InvalidCameraError(f"image_size must be (width, height): {e}") from e

        if width < 1 or height < 1:
            raise InvalidCameraError(f"image_size must be positive, got {(width, height)}")

        if intrinsic[1, 0] != 0 or intrinsic[2, 0] != 0 or intrinsic[2, 1] != 0 or intrinsic[2, 2] != 1:
            raise InvalidCameraError("intrinsic must be upper triangular with K[2, 2] = 1")

        fx, fy = intrinsic[0, 0], intrinsic[1, 1]
        cx, cy = intrinsic[0, 2], intrinsic[1, 2]
        if fx <= 0 or fy <= 0:
            raise InvalidCameraError(f"focal lengths must be positive, got fx={fx}, fy={fy}")
        if not (0 <= cx < width and 0 <= cy < height):
            raise InvalidCameraError(
                f"principal point ({cx}, {cy}) outside image {width}x{height}"
            )

        problem = rigid_violation(extrinsic)
        if problem:
            raise InvalidCameraError(f"extrinsic: {problem}")

        object.__setattr__(self, "intrinsic", intrinsic)
        object.__setattr__(self, "extrinsic", extrinsic)
        object.__setattr__(self, "image_size", (width, height))
        object.__setattr__(self, "view_id", str(self.view_id))

    # ------------------------------------------
    # Параметры
    # ------------------------------------------

    @property
    def fx(self) -> float:
        return float(self.intrinsic[0, 0])

    @property
    def fy(self) -> float:
        return float(self.intrinsic[1, 1])

    @property
    def cx(self) -> float:
        return float(self.intrinsic[0, 2])

    @property
    def cy(self) -> float:
        return float(self.intrinsic[1, 2])

    @property
    def skew(self) -> float:
        return float(self.intrinsic[0, 1])

    @property
    def width(self) -> int:
        return self.image_size[0]

    @property
    def height(self) -> int:
        return self.image_size[1]

    @property
    def camera_to_ego(self) -> np.ndarray:
        return rigid_inverse(self.extrinsic)

    @property
    def center(self) -> np.ndarray:
        """Центр камеры в ego координатах."""
        return self.camera_to_ego[:3, 3]

    @property
    def projection_matrix(self) -> np.ndarray:
        """Составная K = pad(intrinsic) . extrinsic (ego -> однородные пиксели)."""
        padded = np.eye(4)
        padded[:3, :3] = self.intrinsic
        return padded @ self.extrinsic

    # ------------------------------------------
    # Производные камеры
    # ------------------------------------------

    def scaled_to(self, width: int, height: int) -> "CameraModel":
        """
        Та же камера на другой сетке (например, латентной).

        Строка u умножается на width / image_width, строка v на height / image_height.
        """
        if (width, height) == self.image_size:
            return self

        sx = width / self.width
        sy = height / self.height
        intrinsic = np.array(self.intrinsic)
        intrinsic[0] *= sx
        intrinsic[1] *= sy

        return CameraModel(
            intrinsic=intrinsic,
            extrinsic=self.extrinsic,
            image_size=(width, height),
            view_id=self.view_id,
        )

    def with_extrinsic(self, extrinsic: np.ndarray) -> "CameraModel":
        return CameraModel(
            intrinsic=self.intrinsic,
            extrinsic=extrinsic,
            image_size=self.image_size,
            view_id=self.view_id,
        )

    def same_as(self, other: "CameraModel") -> bool:
        """Бит-в-бит одинаковые параметры (view_id не сравнивается)."""
        return (
            self.image_size == other.image_size
            and np.array_equal(self.intrinsic, other.intrinsic)
            and np.array_equal(self.extrinsic, other.extrinsic)
        )


# ==========================================
# EGO POSE
# ==========================================

@dataclass(frozen=True, eq=False)
class EgoPose:
    """Поза ego: 4x4 ego -> global на кадре frame_index."""

    matrix: np.ndarray = field(default_factory=lambda: np.eye(4))
    frame_index: int = 0

    def __post_init__(self):
        matrix = _frozen_array(self.matrix, (4, 4), InvalidPoseError, "ego pose")
        problem = rigid_violation(matrix)
        if problem:
            raise InvalidPoseError(f"ego pose: {problem}")

        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "frame_index", int(self.frame_index))

    @property
    def inverse(self) -> np.ndarray:
        return rigid_inverse(self.matrix)

    def same_as(self, other: "EgoPose") -> bool:
        return np.array_equal(self.matrix, other.matrix)


# ==========================================
# DEPTH ANCHORS
# ==========================================

@dataclass(frozen=True, eq=False)
class DepthAnchors:
    """
    D фиксированных глубин (метры).

    Инварианты: строго возрастают, values[0] >= d_min > 0,
    values[-1] == d_max, гэпы не убывают.
    """

    values: np.ndarray
    d_min: float
    d_max: float

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        d_min, d_max = float(self.d_min), float(self.d_max)

        if values.size < 1 or not np.all(np.isfinite(values)):
            raise InvalidArgumentError("depth anchors must be a non-empty finite sequence")
        if d_min <= 0:
            raise InvalidArgumentError(f"d_min must be positive, got {d_min}")
        if values[0] < d_min:
            raise InvalidArgumentError(f"first anchor {values[0]} below d_min {d_min}")
        if values[-1] != d_max:
            raise InvalidArgumentError(f"last anchor {values[-1]} must equal d_max {d_max}")

        gaps = np.diff(values)
        if np.any(gaps <= 0):
            raise InvalidArgumentError("depth anchors must be strictly increasing")
        if np.any(np.diff(gaps) < -GAP_TOLERANCE):
            raise InvalidArgumentError("depth anchor gaps must be non-decreasing")

        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "d_min", d_min)
        object.__setattr__(self, "d_max", d_max)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.values)

    def nearest(self, depth: np.ndarray) -> np.ndarray:
        """Индекс ближайшего якоря для каждой глубины."""
        depth = np.asarray(depth, dtype=np.float64)
        return np.argmin(np.abs(depth[..., None] - self.values), axis=-1)

    def same_as(self, other: "DepthAnchors") -> bool:
        return np.array_equal(self.values, other.values)


# ==========================================
# СКАЛЯРНЫЕ ТОЧКИ
# ==========================================

class PixelCoord(BaseModel):
    """Пиксель (u вдоль ширины, v вдоль высоты), субпиксельный."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    u: float
    v: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v])


class Point3(BaseModel):
    """3D точка в метрах в указанной системе координат."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    x: float
    y: float
    z: float
    frame: Literal["ego", "global", "camera"] = "ego"

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, xyz, frame: str = "ego") -> "Point3":
        x, y, z = (float(c) for c in xyz)
        return cls(x=x, y=y, z=z, frame=frame)
