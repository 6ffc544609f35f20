# app/cli/scene_file.py
"""
📄 JSON СЦЕНА

Формат:
{
  "cameras": [{"view_id", "intrinsic": 9 чисел, "extrinsic": 16 чисел, "width", "height"}],
  "frames": [{"index", "ego_pose": 16 чисел, "boxes": [...], "map_elements": [...],
              "cameras": [...] (опционально, переопределяет риг кадра),
              "features": {"CAM_FRONT": "path/to/latent.ecmt"}}],
  "metadata": {"weather": "...", "daytime": "..."}
}

Все матрицы row-major. Пути features - относительно файла сцены.
Любая проблема с файлом -> MalformedInputError (exit 3),
неизвестный кадр/вид в флагах -> UsageError (exit 2).
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.control import Box3D, MapElement, build_prompt
from app.correspondence import ViewKind, ViewRef
from app.errors import EcmError, MalformedInputError, UsageError
from app.geometry import CameraModel, EgoPose
from app.oracle import SceneObject, SyntheticScene, make_rig
from app.geometry.transforms import apply_transform, translation_matrix

logger = structlog.get_logger()


# ==========================================
# МОДЕЛИ ФАЙЛА
# ==========================================

class CameraSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    view_id: str
    intrinsic: list[float] = Field(min_length=9, max_length=9)
    extrinsic: list[float] = Field(min_length=16, max_length=16)
    width: int
    height: int

    def to_camera(self) -> CameraModel:
        return CameraModel(
            np.reshape(self.intrinsic, (3, 3)),
            np.reshape(self.extrinsic, (4, 4)),
            (self.width, self.height),
            self.view_id,
        )


class BoxSpec(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    center: tuple[float, float, float]
    size: tuple[float, float, float]
    yaw: float = 0.0
    semantic_class: str = Field(alias="class")
    track_id: int | None = None

    def to_box(self) -> Box3D:
        return Box3D(
            center=self.center,
            size=self.size,
            yaw=self.yaw,
            semantic_class=self.semantic_class,
            track_id=self.track_id,
        )


class MapElementSpec(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    kind: Literal["polygon", "linestring"] = "linestring"
    semantic_class: str = Field(alias="class")
    vertices: list[tuple[float, float]]

    def to_element(self) -> MapElement:
        return MapElement(vertices=tuple(self.vertices), kind=self.kind, semantic_class=self.semantic_class)


class FrameSpec(BaseModel):
    index: int
    ego_pose: list[float] = Field(min_length=16, max_length=16)
    boxes: list[BoxSpec] = []
    map_elements: list[MapElementSpec] = []
    cameras: list[CameraSpec] | None = None
    features: dict[str, str] = {}


class SceneMetadata(BaseModel):
    model_config = ConfigDict(extra="allow")

    weather: str = "sunny"
    daytime: str = "day"


class SceneFile(BaseModel):
    cameras: list[CameraSpec] = Field(min_length=1)
    frames: list[FrameSpec] = Field(min_length=1)
    metadata: SceneMetadata = SceneMetadata()

    @model_validator(mode="after")
    def check_references(self):
        indices = sorted(frame.index for frame in self.frames)
        if indices != list(range(indices[0], indices[0] + len(indices))):
            raise MalformedInputError(f"frame indices must be contiguous, got {indices}")

        rig_ids = [cam.view_id for cam in self.cameras]
        if len(set(rig_ids)) != len(rig_ids):
            raise MalformedInputError(f"duplicate camera view ids {rig_ids}")

        for frame in self.frames:
            frame_ids = {cam.view_id for cam in (frame.cameras or self.cameras)}
            unknown = sorted(set(frame.features) - frame_ids)
            if unknown:
                raise MalformedInputError(f"frame {frame.index} references undefined views {unknown}")
        return self


# ==========================================
# СЦЕНА В ПАМЯТИ
# ==========================================

@dataclass(frozen=True, eq=False)
class SceneFrame:
    pose: EgoPose
    cameras: tuple[CameraModel, ...]
    boxes: tuple[Box3D, ...] = ()
    map_elements: tuple[MapElement, ...] = ()
    features: dict[str, Path] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class Scene:
    frames: dict[int, SceneFrame]
    metadata: SceneMetadata = field(default_factory=SceneMetadata)
    oracle: SyntheticScene | None = None

    @property
    def prompt(self) -> str:
        return build_prompt(self.metadata.weather, self.metadata.daytime)

    def frame(self, index: int) -> SceneFrame:
        try:
            return self.frames[index]
        except KeyError:
            raise UsageError(f"frame {index} not in scene (have {sorted(self.frames)})") from None

    def view_ids(self, frame: int) -> list[str]:
        return [cam.view_id for cam in self.frame(frame).cameras]

    def view_ref(self, frame: int, view_id: str, kind: ViewKind = ViewKind.CURRENT) -> ViewRef:
        scene_frame = self.frame(frame)
        for index, cam in enumerate(scene_frame.cameras):
            if cam.view_id == view_id:
                return ViewRef(frame_index=frame, camera=cam, pose=scene_frame.pose, kind=kind, view_index=index)
        raise UsageError(f"unknown view {view_id!r} at frame {frame} (have {self.view_ids(frame)})")

    def camera(self, frame: int, view_id: str) -> CameraModel:
        return self.view_ref(frame, view_id).camera

    def feature_path(self, frame: int, view_id: str) -> Path | None:
        return self.frame(frame).features.get(view_id)

    def oracle_scene(self, checker_cell: float) -> SyntheticScene:
        """Сцена для рейкаста: шахматка + боксы всех кадров в глобальной системе."""
        if self.oracle is not None:
            return self.oracle
        objects = [
            SceneObject(box=box_to_global(box, scene_frame.pose))
            for scene_frame in self.frames.values()
            for box in scene_frame.boxes
        ]
        return SyntheticScene(checker_cell=checker_cell, objects=tuple(objects))


def box_to_global(box: Box3D, pose: EgoPose) -> Box3D:
    """Бокс из ego кадра в глобальную систему (поворот позы считается вокруг z)."""
    center = apply_transform(pose.matrix, np.asarray(box.center))
    heading = math.atan2(pose.matrix[1, 0], pose.matrix[0, 0])
    return Box3D(
        center=tuple(float(c) for c in center),
        size=box.size,
        yaw=box.yaw + heading,
        semantic_class=box.semantic_class,
        track_id=box.track_id,
    )


# ==========================================
# ЗАГРУЗКА
# ==========================================

def load_scene(path: str | Path) -> Scene:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise MalformedInputError(f"cannot read scene {path}: {e}") from e

    try:
        parsed = SceneFile.model_validate_json(text)
    except ValidationError as e:
        raise MalformedInputError(f"invalid scene {path}: {e.error_count()} errors\n{e}") from e

    try:
        rig = tuple(cam.to_camera() for cam in parsed.cameras)
        frames = {}
        for frame in parsed.frames:
            cameras = tuple(cam.to_camera() for cam in frame.cameras) if frame.cameras else rig
            frames[frame.index] = SceneFrame(
                pose=EgoPose(np.reshape(frame.ego_pose, (4, 4)), frame.index),
                cameras=cameras,
                boxes=tuple(b.to_box() for b in frame.boxes),
                map_elements=tuple(m.to_element() for m in frame.map_elements),
                features={view: path.parent / rel for view, rel in frame.features.items()},
            )
    except MalformedInputError:
        raise
    except EcmError as e:
        raise MalformedInputError(f"invalid scene {path}: {e}") from e

    logger.info("scene_loaded", path=str(path), frames=len(frames), cameras=len(rig))
    return Scene(frames=frames, metadata=parsed.metadata)


def synthetic_scene(
    width: int = 400,
    height: int = 224,
    checker_cell: float = 2.0,
    shift: float = 0.5,
) -> Scene:
    """
    Встроенная сцена: риг из 6 камер, кадр 0 в начале координат,
    кадр 1 сдвинут на shift метров назад по ego x.
    """
    rig = make_rig(width, height)
    frames = {
        0: SceneFrame(pose=EgoPose(np.eye(4), 0), cameras=rig),
        1: SceneFrame(pose=EgoPose(translation_matrix(x=-shift), 1), cameras=rig),
    }
    return Scene(frames=frames, oracle=SyntheticScene(checker_cell=checker_cell))

