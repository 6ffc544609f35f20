# app/sampling/planner.py
"""
🎞️ ПЛАНИРОВЩИК КАДРОВ

Обучение: случайные N+1 кадров из окна без возвращения, генерируемый
кадр - любой из них (хронологический порядок не нужен благодаря ECM).

Генерация: расписание шагов с контекстом из уже сгенерированных кадров.
    chronological / stride: 0, s, 2s, ...; контекст t-s, t-2s, ...
    reverse: от последнего кадра к первому, зеркально
    custom: явный порядок, контекст - последние сгенерированные
"""

from typing import Sequence

import numpy as np
import structlog

from app.errors import InvalidArgumentError
from app.sampling.models import InferenceSchedule, InferenceStep, SamplingPlan, ScheduleMode

logger = structlog.get_logger()


# ==========================================
# TRAINING
# ==========================================

def _check_seed(seed: int) -> None:
    if seed < 0:
        raise InvalidArgumentError(f"seed must be >= 0, got {seed}")


def _check_window(window_start: int, window_len: int, n_context: int) -> None:
    if window_start < 0:
        raise InvalidArgumentError(f"window_start must be >= 0, got {window_start}")
    if n_context < 0:
        raise InvalidArgumentError(f"n_context must be >= 0, got {n_context}")
    if window_len < n_context + 1:
        raise InvalidArgumentError(
            f"window of {window_len} frames cannot hold {n_context} contexts + 1 generation frame"
        )


def sample_training_frames(window_start: int, window_len: int, n_context: int, seed: int) -> SamplingPlan:
    """Равномерно n_context + 1 разных кадров окна; генерируемый - случайный из них."""
    _check_window(window_start, window_len, n_context)
    _check_seed(seed)

    rng = np.random.default_rng(seed)
    chosen = rng.choice(window_len, size=n_context + 1, replace=False)
    position = int(rng.integers(n_context + 1))

    generation = window_start + int(chosen[position])
    contexts = sorted(window_start + int(f) for i, f in enumerate(chosen) if i != position)

    return SamplingPlan(
        context_frames=tuple(contexts),
        generation_frame=generation,
        window_start=window_start,
        window_len=window_len,
    )


def sample_chronological_frames(window_start: int, window_len: int, n_context: int, seed: int) -> SamplingPlan:
    """Базовая схема: n_context + 1 подряд идущих кадров, генерируется последний."""
    _check_window(window_start, window_len, n_context)
    _check_seed(seed)

    rng = np.random.default_rng(seed)
    offset = int(rng.integers(window_len - n_context))
    first = window_start + offset

    return SamplingPlan(
        context_frames=tuple(range(first, first + n_context)),
        generation_frame=first + n_context,
        window_start=window_start,
        window_len=window_len,
    )


# ==========================================
# INFERENCE
# ==========================================

def _generation_order(mode: ScheduleMode, total_frames: int, stride: int, order: Sequence[int] | None) -> list[int]:
    if mode == ScheduleMode.CUSTOM:
        if not order:
            raise InvalidArgumentError("custom mode needs an explicit frame order")
        frames = [int(f) for f in order]
        if any(not 0 <= f < total_frames for f in frames):
            raise InvalidArgumentError(f"custom order {frames} outside [0, {total_frames})")
        return frames

    forward = list(range(0, total_frames, stride))
    if mode == ScheduleMode.REVERSE:
        return [total_frames - 1 - f for f in forward]
    return forward


def build_inference_schedule(
    total_frames: int,
    mode: ScheduleMode | str = ScheduleMode.CHRONOLOGICAL,
    stride: int = 1,
    n_hist: int = 3,
    reference_frames: Sequence[int] = (),
    order: Sequence[int] | None = None,
) -> InferenceSchedule:
    """
    Расписание генерации.

    Контекст шага - до n_hist последних сгенерированных кадров, самый свежий первым;
    первый шаг генерируется без контекста. reference_frames добавляются к каждому шагу.
    """
    try:
        mode = ScheduleMode(mode)
    except ValueError:
        raise InvalidArgumentError(f"unknown schedule mode {mode!r}") from None
    if total_frames < 1:
        raise InvalidArgumentError(f"total_frames must be >= 1, got {total_frames}")
    if stride < 1:
        raise InvalidArgumentError(f"stride must be >= 1, got {stride}")
    if n_hist < 0:
        raise InvalidArgumentError(f"n_hist must be >= 0, got {n_hist}")

    references = tuple(int(f) for f in reference_frames)
    generated: list[int] = []
    steps = []

    for frame in _generation_order(mode, total_frames, stride, order):
        contexts = tuple(reversed(generated[-n_hist:])) if n_hist else ()
        steps.append(
            InferenceStep(
                generation_frame=frame,
                context_frames=contexts,
                reference_frames=references,
            )
        )
        generated.append(frame)

    schedule = InferenceSchedule(
        mode=mode,
        total_frames=total_frames,
        stride=stride,
        n_hist=n_hist,
        steps=tuple(steps),
    )
    validate_schedule(schedule)

    logger.debug("schedule_built", mode=mode.value, steps=len(steps), stride=stride, n_hist=n_hist)
    return schedule


def validate_schedule(schedule: InferenceSchedule) -> None:
    """Каждый кадр генерируется один раз, контекст - только уже готовые кадры."""
    generated: set[int] = set()

    for step in schedule.steps:
        frame = step.generation_frame
        if frame in generated:
            raise InvalidArgumentError(f"frame {frame} is generated twice")
        missing = [f for f in step.context_frames if f not in generated]
        if missing:
            raise InvalidArgumentError(f"frame {frame} uses frames {missing} before they exist")
        generated.add(frame)
