# tests/conftest.py
"""Общие фикстуры и помощники тестов."""

import numpy as np
import pytest

from app.correspondence import ViewKind, ViewRef
from app.geometry import CameraModel, EgoPose, make_lid_anchors
from app.geometry.transforms import make_rigid
from app.oracle import make_rig
from config.settings import Settings
from infrastructure.logger import setup_logging

GRID = (28, 50)


def intrinsic(fx: float, fy: float, cx: float, cy: float) -> np.ndarray:
    return np.array([[fx, 0.0, cx], [0.0, fy, cy], [0.0, 0.0, 1.0]])


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_rigid(rng: np.random.Generator, scale: float = 5.0) -> np.ndarray:
    return make_rigid(random_rotation(rng), rng.uniform(-scale, scale, size=3))


def random_camera(rng: np.random.Generator, view_id: str = "CAM") -> CameraModel:
    width = int(rng.integers(32, 800))
    height = int(rng.integers(32, 600))
    fx = rng.uniform(50.0, 800.0)
    fy = fx * rng.uniform(0.8, 1.2)
    return CameraModel(
        intrinsic(fx, fy, rng.uniform(0.2, 0.8) * width, rng.uniform(0.2, 0.8) * height),
        random_rigid(rng),
        (width, height),
        view_id,
    )


def view_ref(cam: CameraModel, pose: EgoPose | None = None, kind=ViewKind.CURRENT, view_index: int = 0) -> ViewRef:
    pose = pose or EgoPose()
    return ViewRef(frame_index=pose.frame_index, camera=cam, pose=pose, kind=kind, view_index=view_index)


@pytest.fixture(autouse=True, scope="session")
def quiet_logging():
    setup_logging("WARNING")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def pinhole():
    """fx = fy = 100, cx = 200, cy = 100, ego = система камеры."""
    return CameraModel(intrinsic(100.0, 100.0, 200.0, 100.0), np.eye(4), (400, 200), "PINHOLE")


@pytest.fixture(scope="session")
def rig():
    return make_rig()


@pytest.fixture(scope="session")
def rig_views(rig):
    pose = EgoPose()
    return [view_ref(cam, pose, view_index=i) for i, cam in enumerate(rig)]


@pytest.fixture(scope="session")
def anchors():
    return make_lid_anchors(1.0, 60.0, 10)


@pytest.fixture
def settings():
    return Settings(threads=2, log_level="WARNING")
