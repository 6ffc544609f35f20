# app/oracle/scene.py
"""
🖼️ СИНТЕТИЧЕСКАЯ СЦЕНА И РЕЙКАСТ

Плоскость z = 0 (глобальная система) с шахматкой + боксы с плоским цветом.
Для каждого пикселя пускаем луч и берем ближайшее пересечение.
Направление луча имеет z = 1 в системе камеры, поэтому параметр луча
в точке попадания равен глубине пикселя.
"""

from dataclasses import dataclass

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, field_validator

from app.control.models import Box3D
from app.ecm.features import FeatureMap
from app.errors import InvalidArgumentError
from app.geometry import CameraModel, EgoPose, back_project_pixels
from app.geometry.transforms import apply_transform
from infrastructure.workers import run_partitioned

logger = structlog.get_logger()

HIT_EPS = 1e-9

# Лучи с |dz| меньше этого считаются горизонтальными (не пересекают землю)
HORIZONTAL_EPS = 1e-12

RGB = tuple[float, float, float]


def _check_color(color: RGB) -> RGB:
    if any(not 0.0 <= c <= 1.0 for c in color):
        raise InvalidArgumentError(f"colour components must be in [0, 1], got {color}")
    return color


class SceneObject(BaseModel):
    """Бокс в глобальных координатах с плоским цветом."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    box: Box3D
    albedo: RGB = (0.9, 0.1, 0.1)

    @field_validator("albedo")
    @classmethod
    def check_albedo(cls, albedo):
        return _check_color(albedo)


class SyntheticScene(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    checker_cell: float = 2.0
    colors: tuple[RGB, RGB] = ((0.2, 0.2, 0.2), (0.8, 0.8, 0.8))
    objects: tuple[SceneObject, ...] = ()
    sky_color: RGB = (0.5, 0.7, 1.0)

    @field_validator("checker_cell")
    @classmethod
    def check_cell(cls, cell):
        if cell <= 0:
            raise InvalidArgumentError(f"checker cell must be positive, got {cell}")
        return cell

    @field_validator("colors")
    @classmethod
    def check_colors(cls, colors):
        return tuple(_check_color(c) for c in colors)

    @field_validator("sky_color")
    @classmethod
    def check_sky(cls, color):
        return _check_color(color)


@dataclass(frozen=True, eq=False)
class RenderedView:
    """rgb (3, H, W), depth (H, W) с +inf для неба; камера уже под сетку."""

    rgb: np.ndarray
    depth: np.ndarray
    camera: CameraModel
    pose: EgoPose

    def __post_init__(self):
        rgb = np.array(self.rgb, dtype=np.float64)
        depth = np.array(self.depth, dtype=np.float64)
        if rgb.ndim != 3 or rgb.shape[0] != 3 or depth.shape != rgb.shape[1:]:
            raise InvalidArgumentError(f"bad render shapes rgb={rgb.shape} depth={depth.shape}")
        rgb.setflags(write=False)
        depth.setflags(write=False)
        object.__setattr__(self, "rgb", rgb)
        object.__setattr__(self, "depth", depth)

    @property
    def view_id(self) -> str:
        return self.camera.view_id

    @property
    def grid(self) -> tuple[int, int]:
        return self.depth.shape

    def feature_map(self) -> FeatureMap:
        return FeatureMap(self.rgb, tag=f"{self.view_id}@{self.pose.frame_index}")


# ==========================================
# ПЕРЕСЕЧЕНИЯ
# ==========================================

def _hit_ground(origin: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Параметр луча до z = 0 или +inf."""
    dz = direction[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -origin[..., 2] / dz
    return np.where((np.abs(dz) > HORIZONTAL_EPS) & (t > HIT_EPS), t, np.inf)


def _hit_box(origin: np.ndarray, direction: np.ndarray, box: Box3D) -> np.ndarray:
    """Slab-тест в системе бокса; +inf если мимо или камера внутри."""
    rotation = box.rotation()
    # глобальная -> система бокса: R^T (p - c)
    local_origin = np.zeros_like(origin)
    local_direction = np.zeros_like(direction)
    shifted = origin - np.asarray(box.center)
    for k in range(3):
        for j in range(3):
            local_origin[..., k] += rotation[j, k] * shifted[..., j]
            local_direction[..., k] += rotation[j, k] * direction[..., j]

    half = np.asarray(box.size) / 2.0
    t_near = np.full(origin.shape[:-1], -np.inf)
    t_far = np.full(origin.shape[:-1], np.inf)

    for k in range(3):
        o, d = local_origin[..., k], local_direction[..., k]
        parallel = d == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-half[k] - o) / d
            t2 = (half[k] - o) / d
        lo = np.where(parallel, np.where(np.abs(o) <= half[k], -np.inf, np.inf), np.minimum(t1, t2))
        hi = np.where(parallel, np.where(np.abs(o) <= half[k], np.inf, -np.inf), np.maximum(t1, t2))
        t_near = np.maximum(t_near, lo)
        t_far = np.minimum(t_far, hi)

    hit = (t_near <= t_far) & (t_near > HIT_EPS)
    return np.where(hit, t_near, np.inf)


def _rays(cam: CameraModel, pose: EgoPose, uv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Глобальные (origin, direction) лучей через uv; direction имеет z = 1 в системе камеры."""
    uv = np.asarray(uv, dtype=np.float64)
    ego_at_unit_depth = back_project_pixels(uv, cam, 1.0)
    ego_center = np.broadcast_to(cam.center, ego_at_unit_depth.shape)

    origin = apply_transform(pose.matrix, ego_center)
    direction = apply_transform(pose.matrix, ego_at_unit_depth) - origin
    return origin, direction


def _pixel_grid(start: int, stop: int, width: int) -> np.ndarray:
    us = np.arange(width, dtype=np.float64) + 0.5
    vs = np.arange(start, stop, dtype=np.float64) + 0.5
    uu, vv = np.meshgrid(us, vs)
    return np.stack([uu, vv], axis=-1)


def cast_pixels(
    scene: SyntheticScene,
    cam: CameraModel,
    pose: EgoPose,
    uv: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Лучи через пиксели uv (..., 2) камеры cam.

    Возвращает (rgb (..., 3), depth (...)), depth = +inf для неба.
    """
    uv = np.asarray(uv, dtype=np.float64)
    origin, direction = _rays(cam, pose, uv)
    depth = _hit_ground(origin, direction)
    rgb = np.empty(uv.shape[:-1] + (3,))

    # шахматка
    with np.errstate(invalid="ignore"):
        ground = origin + np.where(np.isfinite(depth), depth, 0.0)[..., None] * direction
    cells = np.floor(ground[..., :2] / scene.checker_cell).astype(np.int64)
    parity = (cells[..., 0] + cells[..., 1]) % 2
    colors = np.asarray(scene.colors)
    rgb[...] = colors[parity]

    for obj in scene.objects:
        t = _hit_box(origin, direction, obj.box)
        closer = t < depth
        depth = np.where(closer, t, depth)
        rgb[closer] = obj.albedo

    rgb[~np.isfinite(depth)] = scene.sky_color
    return rgb, depth


def render(
    scene: SyntheticScene,
    cam: CameraModel,
    pose: EgoPose,
    grid: tuple[int, int],
    threads: int | None = None,
) -> RenderedView:
    """Рендер сцены камерой cam (масштабированной под grid = (H, W))."""
    height, width = (int(d) for d in grid)
    if height < 1 or width < 1:
        raise InvalidArgumentError(f"grid dims must be >= 1, got {grid}")

    grid_cam = cam.scaled_to(width, height)

    def render_rows(start: int, stop: int):
        return cast_pixels(scene, grid_cam, pose, _pixel_grid(start, stop, width))

    parts = run_partitioned(render_rows, height, threads)
    rgb = np.concatenate([part[0] for part in parts], axis=0)
    depth = np.concatenate([part[1] for part in parts], axis=0)

    logger.debug(
        "view_rendered",
        view_id=cam.view_id,
        frame=pose.frame_index,
        grid=(height, width),
        sky=int(np.count_nonzero(~np.isfinite(depth))),
    )
    return RenderedView(np.moveaxis(rgb, -1, 0), depth, grid_cam, pose)


def checker_cells(scene: SyntheticScene, view: RenderedView) -> tuple[np.ndarray, np.ndarray]:
    """
    Клетка шахматки под каждым пикселем вида.

    Возвращает (cells (H, W, 2) int, on_ground (H, W)); on_ground - пиксель
    видит землю (не небо и не бокс). Лучи те же, что у render.
    """
    height, width = view.grid
    origin, direction = _rays(view.camera, view.pose, _pixel_grid(0, height, width))
    ground_depth = _hit_ground(origin, direction)

    on_ground = np.isfinite(ground_depth) & (view.depth == ground_depth)
    ground = origin + np.where(on_ground, ground_depth, 0.0)[..., None] * direction
    cells = np.floor(ground[..., :2] / scene.checker_cell).astype(np.int64)
    return cells, on_ground
