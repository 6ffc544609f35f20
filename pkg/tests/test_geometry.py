# tests/test_geometry.py
import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from app.errors import InvalidArgumentError, InvalidCameraError, InvalidPoseError
from app.geometry import (
    CameraModel,
    EgoPose,
    PixelCoord,
    Point3,
    back_project,
    back_project_pixels,
    make_lid_anchors,
    perturb_camera,
    project,
    project_points,
    transfer_point,
)
from app.geometry.transforms import apply_transform, translation_matrix
from tests.conftest import intrinsic, random_camera, random_rigid

# ==========================================
# LID ANCHORS
# ==========================================


def test_lid_anchors_default_range():
    anchors = make_lid_anchors(1, 60, 10)

    assert len(anchors) == 10
    assert anchors.values[0] == pytest.approx(1 + 59 * 2 / 110, abs=1e-9)
    assert anchors.values[0] == pytest.approx(2.0727, abs=1e-4)
    assert anchors.values[-1] == 60.0
    assert np.all(np.diff(anchors.gaps) >= -1e-12)


def test_lid_anchors_two_bins():
    anchors = make_lid_anchors(1, 60, 2)

    assert anchors.values[0] == pytest.approx(20.6667, abs=1e-4)
    assert anchors.values[1] == 60.0


@pytest.mark.parametrize(
    "d_min, d_max, count",
    [(5, 5.0001, 2), (0, 10, 4), (-1, 10, 4), (1, 60, 1), (10, 5, 3), (3, 3, 3)],
)
def test_lid_anchors_reject_bad_ranges(d_min, d_max, count):
    with pytest.raises(InvalidArgumentError):
        make_lid_anchors(d_min, d_max, count)


@given(
    d_min=st.floats(0.1, 20.0),
    span=st.floats(0.01, 200.0),
    count=st.integers(2, 64),
)
def test_lid_gaps_non_decreasing(d_min, span, count):
    anchors = make_lid_anchors(d_min, d_min + span, count)

    assert anchors.values[-1] == d_min + span
    assert anchors.values[0] >= d_min
    assert np.all(anchors.gaps > 0)
    assert np.all(np.diff(anchors.gaps) >= -1e-9)


# ==========================================
# BACK-PROJECT / PROJECT
# ==========================================


def test_back_project_principal_ray(pinhole):
    point = back_project(PixelCoord(u=200, v=100), pinhole, 10.0)
    assert point.as_array() == pytest.approx([0.0, 0.0, 10.0])


def test_back_project_off_axis(pinhole):
    point = back_project(PixelCoord(u=300, v=100), pinhole, 10.0)
    assert point.as_array() == pytest.approx([10.0, 0.0, 10.0])


@pytest.mark.parametrize("depth", [0.0, -1.0, float("nan")])
def test_back_project_rejects_non_positive_depth(pinhole, depth):
    with pytest.raises(InvalidArgumentError):
        back_project(PixelCoord(u=200, v=100), pinhole, depth)


def test_project_round_trip_example(pinhole):
    pixel, depth, valid = project(Point3(x=0, y=0, z=10), pinhole)

    assert (pixel.u, pixel.v) == pytest.approx((200.0, 100.0))
    assert depth == pytest.approx(10.0)
    assert valid


def test_project_translated_camera(pinhole):
    # камера сдвинута на +1 м по своей оси x: ego точка смещается на -1
    shifted = pinhole.with_extrinsic(translation_matrix(x=-1.0))
    pixel, depth, valid = project(Point3(x=0, y=0, z=10), shifted)

    assert pixel.u == pytest.approx(190.0)
    assert pixel.v == pytest.approx(100.0)
    assert valid


def test_project_behind_camera(pinhole):
    _, depth, valid = project(Point3(x=0, y=0, z=-5), pinhole)

    assert depth == pytest.approx(-5.0)
    assert not valid


def test_project_outside_image_is_invalid_but_reported(pinhole):
    pixel, depth, valid = project(Point3(x=50, y=0, z=10), pinhole)

    assert pixel.u == pytest.approx(700.0)
    assert depth == pytest.approx(10.0)
    assert not valid


def test_projection_matrix_matches_project(rng):
    cam = random_camera(rng)
    points = rng.uniform(-20, 20, size=(50, 3))
    uv, depth, _ = project_points(points, cam)

    homogeneous = np.hstack([points, np.ones((50, 1))]) @ cam.projection_matrix.T
    assert homogeneous[:, 2] == pytest.approx(depth, rel=1e-9)
    front = np.abs(depth) > 1e-3
    assert homogeneous[front, :2] / homogeneous[front, 2:3] == pytest.approx(uv[front], rel=1e-9, abs=1e-6)


@hyp_settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), depth=st.floats(1.0, 60.0))
def test_round_trip_property(seed, depth):
    rng = np.random.default_rng(seed)
    cam = random_camera(rng)
    p = PixelCoord(u=rng.uniform(0, cam.width), v=rng.uniform(0, cam.height))

    pixel, z, valid = project(back_project(p, cam, depth), cam)

    assert valid
    assert abs(pixel.u - p.u) < 1e-6 and abs(pixel.v - p.v) < 1e-6
    assert abs(z - depth) <= 1e-9 * depth


def test_round_trip_ten_thousand_samples():
    rng = np.random.default_rng(7)
    worst_px = 0.0
    worst_depth = 0.0

    for _ in range(100):
        cam = random_camera(rng)
        uv = np.stack([rng.uniform(0, cam.width, 100), rng.uniform(0, cam.height, 100)], axis=1)
        depth = rng.uniform(1.0, 60.0, 100)

        back, z, valid = project_points(back_project_pixels(uv, cam, depth), cam)

        assert valid.all()
        worst_px = max(worst_px, float(np.abs(back - uv).max()))
        worst_depth = max(worst_depth, float((np.abs(z - depth) / depth).max()))

    assert worst_px < 1e-6
    assert worst_depth < 1e-9


# ==========================================
# POSES
# ==========================================


def test_transfer_identity_poses():
    point = transfer_point(Point3(x=1, y=2, z=3), EgoPose(), EgoPose())
    assert point.as_array().tolist() == [1.0, 2.0, 3.0]


def test_transfer_translated_pose():
    e_t = EgoPose(translation_matrix(x=5.0), 1)
    point = transfer_point(Point3(x=0, y=0, z=0), e_t, EgoPose())
    assert point.as_array() == pytest.approx([5.0, 0.0, 0.0])


@given(seed=st.integers(0, 2**32 - 1))
def test_transfer_equal_poses_cancel(seed):
    rng = np.random.default_rng(seed)
    pose = EgoPose(random_rigid(rng, scale=100.0), 3)
    p = Point3.from_array(rng.uniform(-50, 50, 3))

    moved = transfer_point(p, pose, EgoPose(np.array(pose.matrix), 7))
    assert np.abs(moved.as_array() - p.as_array()).max() <= 1e-9


def test_transfer_matches_matrix_product(rng):
    e_t = EgoPose(random_rigid(rng))
    e_k = EgoPose(random_rigid(rng))
    p = rng.uniform(-10, 10, 3)

    expected = (np.linalg.inv(e_k.matrix) @ e_t.matrix @ np.append(p, 1.0))[:3]
    assert transfer_point(Point3.from_array(p), e_t, e_k).as_array() == pytest.approx(expected, abs=1e-9)


# ==========================================
# ВАЛИДАЦИЯ
# ==========================================


def test_camera_rejects_non_orthonormal_extrinsic():
    extrinsic = np.eye(4)
    extrinsic[0, 0] = 1.01
    with pytest.raises(InvalidCameraError):
        CameraModel(intrinsic(100, 100, 200, 100), extrinsic, (400, 200))


def test_camera_rejects_reflection():
    extrinsic = np.diag([1.0, 1.0, -1.0, 1.0])
    with pytest.raises(InvalidCameraError):
        CameraModel(intrinsic(100, 100, 200, 100), extrinsic, (400, 200))


@pytest.mark.parametrize(
    "k",
    [intrinsic(0, 100, 200, 100), intrinsic(100, -1, 200, 100), intrinsic(100, 100, 400, 100)],
)
def test_camera_rejects_bad_intrinsic(k):
    with pytest.raises(InvalidCameraError):
        CameraModel(k, np.eye(4), (400, 200))


def test_pose_rejects_bad_last_row():
    matrix = np.eye(4)
    matrix[3, 0] = 0.5
    with pytest.raises(InvalidPoseError):
        EgoPose(matrix)


def test_camera_arrays_are_read_only(pinhole):
    with pytest.raises(ValueError):
        pinhole.intrinsic[0, 0] = 1.0


def test_scaled_camera_projects_consistently(pinhole):
    latent = pinhole.scaled_to(50, 25)
    points = np.array([[3.0, -1.0, 12.0], [-4.0, 2.0, 30.0]])

    full, _, _ = project_points(points, pinhole)
    small, _, _ = project_points(points, latent)

    assert small == pytest.approx(full * [50 / 400, 25 / 200])
    assert pinhole.scaled_to(400, 200) is pinhole


def test_perturb_camera_yaw_left(rig):
    front = rig[0]
    turned = perturb_camera(front, yaw_deg=20.0)

    axis = apply_transform(turned.camera_to_ego, np.array([0.0, 0.0, 1.0])) - turned.center
    assert axis == pytest.approx([math.cos(math.radians(20)), math.sin(math.radians(20)), 0.0], abs=1e-12)
    assert turned.center == pytest.approx(front.center)


def test_perturb_camera_pitch_after_yaw(rig):
    turned = perturb_camera(rig[0], yaw_deg=90.0, pitch_deg=10.0)

    axis = apply_transform(turned.camera_to_ego, np.array([0.0, 0.0, 1.0])) - turned.center
    expected = [0.0, math.cos(math.radians(10)), -math.sin(math.radians(10))]
    assert axis == pytest.approx(expected, abs=1e-12)
    assert turned.extrinsic[:3, :3] @ turned.extrinsic[:3, :3].T == pytest.approx(np.eye(3), abs=1e-12)
