# tests/test_sampling.py
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from app.errors import InvalidArgumentError
from app.sampling import (
    InferenceSchedule,
    InferenceStep,
    SamplingPlan,
    ScheduleMode,
    build_inference_schedule,
    sample_chronological_frames,
    sample_training_frames,
    validate_schedule,
)


# ==========================================
# TRAINING
# ==========================================


def test_training_plan_is_reproducible():
    a = sample_training_frames(0, 12, 3, seed=42)
    b = sample_training_frames(0, 12, 3, seed=42)

    assert a == b
    assert len(a.context_frames) == 3
    assert a.generation_frame not in a.context_frames
    assert list(a.context_frames) == sorted(a.context_frames)


@given(start=st.integers(0, 1000), length=st.integers(4, 40), seed=st.integers(0, 2**32 - 1))
def test_training_plan_stays_in_window(start, length, seed):
    plan = sample_training_frames(start, length, 3, seed)

    assert all(start <= f < start + length for f in plan.frames)
    assert len(set(plan.frames)) == 4


def test_window_of_four_uses_every_frame():
    plan = sample_training_frames(10, 4, 3, seed=1)
    assert plan.frames == (10, 11, 12, 13)


@pytest.mark.parametrize("start, length, n_context", [(0, 3, 3), (-1, 12, 3), (0, 12, -1)])
def test_training_plan_rejects_bad_window(start, length, n_context):
    with pytest.raises(InvalidArgumentError):
        sample_training_frames(start, length, n_context, seed=0)


@pytest.mark.parametrize("sampler", [sample_training_frames, sample_chronological_frames])
def test_plans_reject_negative_seed(sampler):
    with pytest.raises(InvalidArgumentError):
        sampler(0, 12, 3, seed=-1)


def test_training_frames_are_uniform():
    window, n_seeds = 12, 100_000
    selected = np.zeros(window)
    generated = np.zeros(window)

    for seed in range(n_seeds):
        plan = sample_training_frames(0, window, 3, seed)
        selected[list(plan.frames)] += 1
        generated[plan.generation_frame] += 1

    assert np.all(np.abs(selected / n_seeds - 1 / 3) < 0.01)

    # позиция генерируемого кадра равномерна по окну
    assert chisquare(generated).pvalue > 0.001


def test_generation_frame_is_not_always_last():
    plans = [sample_training_frames(0, 12, 3, seed) for seed in range(50)]
    last = {plan.generation_frame > max(plan.context_frames) for plan in plans}
    assert last == {True, False}


def test_chronological_baseline():
    for seed in range(20):
        plan = sample_chronological_frames(5, 12, 3, seed)
        first = plan.context_frames[0]
        assert plan.context_frames == (first, first + 1, first + 2)
        assert plan.generation_frame == first + 3
        assert 5 <= first and plan.generation_frame < 17


def test_plan_validation():
    with pytest.raises(InvalidArgumentError):
        SamplingPlan(context_frames=(1, 2), generation_frame=2, window_start=0, window_len=5)
    with pytest.raises(InvalidArgumentError):
        SamplingPlan(context_frames=(1, 9), generation_frame=2, window_start=0, window_len=5)
    with pytest.raises(InvalidArgumentError):
        SamplingPlan(context_frames=(1, 1), generation_frame=2, window_start=0, window_len=5)


def test_plan_json_round_trip():
    plan = sample_training_frames(3, 12, 3, seed=7)
    assert SamplingPlan.model_validate_json(plan.model_dump_json()) == plan


# ==========================================
# INFERENCE
# ==========================================


def test_chronological_schedule_contexts():
    schedule = build_inference_schedule(12, "chronological", n_hist=3)

    assert schedule.order == tuple(range(12))
    assert schedule.steps[0].context_frames == ()
    assert schedule.step_for(1).context_frames == (0,)
    assert schedule.step_for(5).context_frames == (4, 3, 2)


def test_stride_schedule():
    schedule = build_inference_schedule(13, ScheduleMode.STRIDE, stride=6, n_hist=3)

    assert schedule.order == (0, 6, 12)
    assert schedule.step_for(12).context_frames == (6, 0)
    assert schedule.step_for(3) is None


def test_reverse_schedule():
    schedule = build_inference_schedule(11, "reverse", n_hist=3)

    assert schedule.order == tuple(range(10, -1, -1))
    assert schedule.step_for(7).context_frames == (8, 9, 10)


@given(total=st.integers(1, 60), stride=st.integers(1, 7), n_hist=st.integers(0, 5))
def test_reverse_mirrors_forward(total, stride, n_hist):
    forward = build_inference_schedule(total, "stride", stride=stride, n_hist=n_hist)
    reverse = build_inference_schedule(total, "reverse", stride=stride, n_hist=n_hist)

    for a, b in zip(forward.steps, reverse.steps):
        assert b.generation_frame == total - 1 - a.generation_frame
        assert b.context_frames == tuple(total - 1 - f for f in a.context_frames)


def test_bootstrap_step_has_no_context():
    for mode in ("chronological", "reverse"):
        assert build_inference_schedule(5, mode).steps[0].context_frames == ()


def test_zero_history():
    schedule = build_inference_schedule(4, n_hist=0)
    assert all(step.context_frames == () for step in schedule.steps)


def test_custom_order():
    schedule = build_inference_schedule(8, "custom", n_hist=2, order=[0, 7, 3, 5])

    assert schedule.order == (0, 7, 3, 5)
    assert schedule.step_for(3).context_frames == (7, 0)
    assert schedule.step_for(5).context_frames == (3, 7)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"mode": "custom"},
        {"mode": "custom", "order": [0, 9]},
        {"mode": "custom", "order": [1, 2, 1]},
        {"mode": "sideways"},
        {"stride": 0},
        {"n_hist": -1},
    ],
)
def test_schedule_rejects_bad_arguments(kwargs):
    with pytest.raises(InvalidArgumentError):
        build_inference_schedule(8, **kwargs)


def test_schedule_rejects_empty_clip():
    with pytest.raises(InvalidArgumentError):
        build_inference_schedule(0)


def test_reference_frames_on_every_step():
    schedule = build_inference_schedule(4, reference_frames=[0, 2])
    assert all(step.reference_frames == (0, 2) for step in schedule.steps)


def test_validate_schedule_rejects_future_context():
    schedule = InferenceSchedule(
        mode=ScheduleMode.CUSTOM,
        total_frames=3,
        steps=(
            InferenceStep(generation_frame=0),
            InferenceStep(generation_frame=1, context_frames=(2,)),
            InferenceStep(generation_frame=2, context_frames=(1,)),
        ),
    )
    with pytest.raises(InvalidArgumentError):
        validate_schedule(schedule)


def test_schedule_json_round_trip():
    schedule = build_inference_schedule(9, "stride", stride=2, n_hist=2, reference_frames=[1])
    restored = InferenceSchedule.model_validate_json(schedule.model_dump_json())

    assert restored == schedule
    assert restored.mode is ScheduleMode.STRIDE
