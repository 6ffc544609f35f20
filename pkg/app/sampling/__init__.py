"""Выбор кадров для обучения и расписания генерации."""

from .models import InferenceSchedule, InferenceStep, SamplingPlan, ScheduleMode
from .planner import (
    build_inference_schedule,
    sample_chronological_frames,
    sample_training_frames,
    validate_schedule,
)

__all__ = [
    "InferenceSchedule",
    "InferenceStep",
    "SamplingPlan",
    "ScheduleMode",
    "build_inference_schedule",
    "sample_chronological_frames",
    "sample_training_frames",
    "validate_schedule",
]
