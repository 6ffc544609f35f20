# app/sampling/models.py
"""
Планы выбора кадров: обучение (SamplingPlan) и генерация (InferenceSchedule).
Обе модели сериализуются в JSON через pydantic.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, model_validator

from app.errors import InvalidArgumentError


class ScheduleMode(str, Enum):
    CHRONOLOGICAL = "chronological"
    STRIDE = "stride"
    REVERSE = "reverse"
    CUSTOM = "custom"


class SamplingPlan(BaseModel):
    """N_r + N_h контекстных кадров и один генерируемый внутри окна."""

    model_config = ConfigDict(frozen=True)

    context_frames: tuple[int, ...]
    generation_frame: int
    window_start: int
    window_len: int

    @model_validator(mode="after")
    def check_plan(self):
        stop = self.window_start + self.window_len
        frames = (*self.context_frames, self.generation_frame)
        if any(not self.window_start <= f < stop for f in frames):
            raise InvalidArgumentError(f"plan frames {frames} outside window [{self.window_start}, {stop})")
        if self.generation_frame in self.context_frames:
            raise InvalidArgumentError("generation frame must not be a context frame")
        if len(set(self.context_frames)) != len(self.context_frames):
            raise InvalidArgumentError("context frames must be distinct")
        return self

    @property
    def frames(self) -> tuple[int, ...]:
        return tuple(sorted((*self.context_frames, self.generation_frame)))


class InferenceStep(BaseModel):
    """
    Один шаг генерации.

    context_frames - ранее сгенерированные кадры (самый свежий первым),
    reference_frames - кадры записи, заданные извне.
    """

    model_config = ConfigDict(frozen=True)

    generation_frame: int
    context_frames: tuple[int, ...] = ()
    reference_frames: tuple[int, ...] = ()


class InferenceSchedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: ScheduleMode
    total_frames: int
    stride: int = 1
    n_hist: int = 3
    steps: tuple[InferenceStep, ...]

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(step.generation_frame for step in self.steps)

    def step_for(self, frame: int) -> InferenceStep | None:
        for step in self.steps:
            if step.generation_frame == frame:
                return step
        return None
