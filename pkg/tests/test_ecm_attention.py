# tests/test_ecm_attention.py
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from app.correspondence import CorrespondenceField, build_field
from app.ecm import (
    DepthWeightHead,
    FeatureMap,
    Linear,
    aggregate,
    depth_weights,
    gather_bilinear,
    gather_bilinear_points,
)
from app.errors import InvalidArgumentError
from app.geometry import CameraModel, PixelCoord, make_lid_anchors
from tests.conftest import intrinsic, view_ref


def grid_camera(height: int, width: int, view_id: str = "GRID") -> CameraModel:
    return CameraModel(intrinsic(10.0, 10.0, width / 2, height / 2), np.eye(4), (width, height), view_id)


def random_field(rng, height, width, depth_count, invalid_share=0.3) -> CorrespondenceField:
    cam = grid_camera(height, width)
    targets = np.stack(
        [rng.uniform(-1.0, width + 1.0, (height, width, depth_count)),
         rng.uniform(-1.0, height + 1.0, (height, width, depth_count))],
        axis=-1,
    )
    valid = rng.uniform(size=(height, width, depth_count)) > invalid_share
    return CorrespondenceField(
        view_ref(cam), view_ref(grid_camera(height, width, "OTHER")), (height, width),
        make_lid_anchors(1.0, 60.0, depth_count), targets, valid,
    )


# ==========================================
# NAIVE ORACLE
# ==========================================


def naive_bilinear(data, u, v):
    channels, height, width = data.shape
    x, y = u - 0.5, v - 0.5
    x0, y0 = math.floor(x), math.floor(y)
    out = np.zeros(channels)
    for xi, wx in ((x0, 1 - (x - x0)), (x0 + 1, x - x0)):
        for yi, wy in ((y0, 1 - (y - y0)), (y0 + 1, y - y0)):
            if 0 <= xi < width and 0 <= yi < height:
                out += wx * wy * data[:, yi, xi]
    return out


def naive_weights(head, f):
    hidden = head.hidden.weight @ f + head.hidden.bias
    hidden = hidden / (1.0 + np.exp(-hidden))
    logits = head.output.weight @ hidden + head.output.bias
    exps = [math.exp(l - max(logits)) for l in logits]
    return np.array(exps) / sum(exps)


def naive_aggregate(query, targets, head, combine="mean"):
    out = np.array(query.data)
    _, height, width = query.data.shape
    for h in range(height):
        for w in range(width):
            f_q = query.data[:, h, w]
            weights = naive_weights(head, f_q)
            total = np.zeros_like(f_q)
            touched = False
            for target_map, field in targets:
                for i in range(field.depth_count):
                    if field.valid[h, w, i]:
                        touched = True
                        u, v = field.targets[h, w, i]
                        total += weights[i] * naive_bilinear(target_map.data, u, v)
            if touched:
                if combine == "mean":
                    total = total / len(targets)
                out[:, h, w] = f_q + total
    return out


# ==========================================
# DEPTH WEIGHTS
# ==========================================


def test_zero_head_gives_uniform_weights():
    head = DepthWeightHead.zeros(4, 10)
    weights = depth_weights(np.array([1.0, -2.0, 3.0, 0.5]), head)
    assert weights == pytest.approx(np.full(10, 0.1))


def test_crafted_logits():
    channels = 3
    head = DepthWeightHead(
        Linear.zeros(channels, channels),
        Linear(np.zeros((2, channels)), np.array([math.log(3.0), 0.0])),
    )
    assert depth_weights(np.ones(channels), head) == pytest.approx([0.75, 0.25])


@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.0, 1e3))
def test_weights_are_a_distribution(seed, scale):
    rng = np.random.default_rng(seed)
    head = DepthWeightHead.seeded(8, 10, seed=seed)
    weights = depth_weights(rng.normal(size=8) * scale, head)

    assert np.all(weights >= 0)
    assert abs(weights.sum() - 1.0) < 1e-6


def test_depth_weights_dimension_mismatch():
    with pytest.raises(InvalidArgumentError):
        depth_weights(np.ones(5), DepthWeightHead.zeros(4, 3))


def test_seeded_head_is_deterministic():
    a = DepthWeightHead.seeded(6, 10, seed=3)
    b = DepthWeightHead.seeded(6, 10, seed=3)
    assert np.array_equal(a.hidden.weight, b.hidden.weight)
    assert np.array_equal(a.output.bias, b.output.bias)


# ==========================================
# GATHER
# ==========================================


def test_gather_at_pixel_center_is_exact(rng):
    feature_map = FeatureMap(rng.normal(size=(3, 4, 5)))
    value = gather_bilinear(feature_map, PixelCoord(u=2.5, v=1.5))
    assert np.array_equal(value, feature_map.data[:, 1, 2])


def test_gather_midpoint_of_two_pixels():
    feature_map = FeatureMap(np.array([[[1.0, 3.0]], [[-2.0, 6.0]]]))
    value = gather_bilinear(feature_map, PixelCoord(u=1.0, v=0.5))
    assert value == pytest.approx([2.0, 2.0])


@pytest.mark.parametrize("u, v", [(-5.0, 1.0), (100.0, 1.0), (1.0, -3.0), (1.0, 1e9)])
def test_gather_outside_is_zero(u, v):
    feature_map = FeatureMap(np.ones((2, 3, 3)))
    assert np.array_equal(gather_bilinear(feature_map, PixelCoord(u=u, v=v)), np.zeros(2))


def test_gather_points_match_naive(rng):
    data = rng.normal(size=(3, 6, 7))
    points = rng.uniform(-1.5, 8.5, size=(200, 2))

    fast = gather_bilinear_points(FeatureMap(data), points)
    slow = np.array([naive_bilinear(data, u, v) for u, v in points])
    assert fast == pytest.approx(slow, abs=1e-12)


def test_feature_map_rejects_non_finite():
    with pytest.raises(InvalidArgumentError):
        FeatureMap(np.full((1, 2, 2), np.nan))


# ==========================================
# AGGREGATE
# ==========================================


def test_zero_targets_leave_query_unchanged(rng):
    query = FeatureMap(rng.normal(size=(3, 6, 6)))
    field = random_field(rng, 6, 6, 4, invalid_share=0.0)
    head = DepthWeightHead.seeded(3, 4, seed=1)

    out = aggregate(query, [(FeatureMap.zeros(3, 6, 6), field)], head)
    assert np.array_equal(out.data, query.data)


def test_identity_field_doubles_query(rig, anchors, rng):
    height, width = 7, 9
    query_view = view_ref(rig[0])
    field = build_field(query_view, view_ref(rig[0]), anchors, (height, width))
    query = FeatureMap(rng.normal(size=(4, height, width)))

    out = aggregate(query, [(query, field)], DepthWeightHead.seeded(4, len(anchors), seed=5))
    assert out.data == pytest.approx(2 * query.data, abs=1e-12)


def test_all_invalid_masks_are_bit_exact(rng):
    query = FeatureMap(rng.normal(size=(2, 5, 5)))
    field = random_field(rng, 5, 5, 3, invalid_share=1.1)
    target = FeatureMap(rng.normal(size=(2, 5, 5)))

    out = aggregate(query, [(target, field), (target, field)], DepthWeightHead.seeded(2, 3, seed=0))
    assert np.array_equal(out.data, query.data)


def test_small_instance_matches_naive_loop(rng):
    query = FeatureMap(rng.normal(size=(1, 4, 4)))
    target = FeatureMap(rng.normal(size=(1, 4, 4)))
    field = random_field(rng, 4, 4, 3)
    head = DepthWeightHead.seeded(1, 3, seed=2)

    out = aggregate(query, [(target, field)], head)
    assert out.data == pytest.approx(naive_aggregate(query, [(target, field)], head), abs=1e-6)


def test_random_instances_match_naive_loop():
    rng = np.random.default_rng(99)
    for _ in range(100):
        height, width = (int(d) for d in rng.integers(4, 17, size=2))
        channels = int(rng.integers(1, 9))
        head = DepthWeightHead.seeded(channels, 10, seed=int(rng.integers(1 << 30)))
        query = FeatureMap(rng.normal(size=(channels, height, width)))
        targets = [
            (FeatureMap(rng.normal(size=(channels, height, width))), random_field(rng, height, width, 10))
            for _ in range(3)
        ]

        out = aggregate(query, targets, head, threads=3)
        assert np.abs(out.data - naive_aggregate(query, targets, head)).max() < 1e-6


def test_sum_combine_is_mean_times_views(rng):
    query = FeatureMap(rng.normal(size=(2, 5, 6)))
    head = DepthWeightHead.seeded(2, 4, seed=8)
    targets = [(FeatureMap(rng.normal(size=(2, 5, 6))), random_field(rng, 5, 6, 4, 0.0)) for _ in range(2)]

    mean = aggregate(query, targets, head, combine="mean").data - query.data
    total = aggregate(query, targets, head, combine="sum").data - query.data
    assert total == pytest.approx(2 * mean, abs=1e-12)

    with pytest.raises(InvalidArgumentError):
        aggregate(query, targets, head, combine="max")


def test_linearity_in_targets(rng):
    query = FeatureMap(rng.normal(size=(3, 6, 5)))
    head = DepthWeightHead.seeded(3, 5, seed=4)
    field = random_field(rng, 6, 5, 5)
    a, b = rng.normal(size=(2, 3, 6, 5))
    alpha, beta = 0.7, -1.3

    def delta(data):
        return aggregate(query, [(FeatureMap(data), field)], head).data - query.data

    assert delta(alpha * a + beta * b) == pytest.approx(alpha * delta(a) + beta * delta(b), abs=1e-6)


def test_masked_weight_sum_is_bounded(rng):
    query = FeatureMap(rng.normal(size=(2, 6, 6)))
    field = random_field(rng, 6, 6, 10)
    ones = FeatureMap(np.ones((2, 6, 6)))
    # у каждой валидной точки внутри карты билинейная сумма = 1, снаружи меньше
    out = aggregate(query, [(ones, field)], DepthWeightHead.seeded(2, 10, seed=6))

    gained = out.data - query.data
    assert np.all(gained >= -1e-12)
    assert np.all(gained <= 1.0 + 1e-12)


def test_aggregate_independent_of_threads(rng):
    query = FeatureMap(rng.normal(size=(4, 16, 16)))
    head = DepthWeightHead.seeded(4, 10, seed=11)
    targets = [(FeatureMap(rng.normal(size=(4, 16, 16))), random_field(rng, 16, 16, 10)) for _ in range(3)]

    assert np.array_equal(
        aggregate(query, targets, head, threads=1).data,
        aggregate(query, targets, head, threads=5).data,
    )


def test_aggregate_checks_shapes(rng):
    query = FeatureMap(rng.normal(size=(2, 4, 4)))
    field = random_field(rng, 4, 4, 3)

    with pytest.raises(InvalidArgumentError):
        aggregate(query, [(FeatureMap(np.zeros((2, 5, 4))), field)], DepthWeightHead.zeros(2, 3))
    with pytest.raises(InvalidArgumentError):
        aggregate(query, [(FeatureMap(np.zeros((2, 4, 4))), field)], DepthWeightHead.zeros(2, 4))
    with pytest.raises(InvalidArgumentError):
        aggregate(FeatureMap(np.zeros((2, 3, 3))), [(query, field)], DepthWeightHead.zeros(2, 3))


def test_aggregate_does_not_modify_inputs(rng):
    data = rng.normal(size=(2, 4, 4))
    query = FeatureMap(data)
    field = random_field(rng, 4, 4, 3)
    aggregate(query, [(query, field)], DepthWeightHead.seeded(2, 3))

    assert np.array_equal(query.data, data)
