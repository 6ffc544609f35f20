# config/settings.py
"""
Settings файл - здесь живут все настройки приложения.

Логика: при импорте читаем .env и переменные окружения с префиксом ECM_
и создаем объект 'config' со всеми значениями по умолчанию.

Дефолты совпадают с гиперпараметрами ECM: 10 якорей глубины в [1, 60],
латентная сетка 28x50 (224x400 / 8), окно из 12 кадров, 3 контекстных кадра.

Если какое-то значение из окружения неправильного типа,
Pydantic сразу выдаст ошибку и подскажет что не так.
"""

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Основной класс настроек.

    Пример:
        ECM_THREADS=8 python main.py overlap --query-view CAM_FRONT
    """

    # ==========================================
    # WORKERS
    # ==========================================
    threads: int = Field(default=4, ge=1)

    # ==========================================
    # DEPTH ANCHORS
    # ==========================================
    depth_min: float = Field(default=1.0, gt=0)
    depth_max: float = 60.0
    depth_count: int = Field(default=10, ge=2)

    # ==========================================
    # GRIDS
    # ==========================================
    grid_height: int = Field(default=28, ge=1)
    grid_width: int = Field(default=50, ge=1)
    image_width: int = Field(default=400, ge=1)
    image_height: int = Field(default=224, ge=1)

    # ==========================================
    # ECM ATTENTION
    # ==========================================
    cross_view_targets: int = Field(default=2, ge=1)
    combine: Literal["mean", "sum"] = "mean"

    # ==========================================
    # CONTROL
    # ==========================================
    embedding_dim: int = Field(default=16, ge=1)
    mlp_hidden: int = Field(default=32, ge=1)
    keypoints_fixed: int = Field(default=7, ge=1, le=15)
    keypoints_learned: int = Field(default=6, ge=0)
    map_points: int = Field(default=20, ge=2)
    seed: int = Field(default=0, ge=0)

    # ==========================================
    # SAMPLING
    # ==========================================
    window_len: int = Field(default=12, ge=1)
    n_context: int = Field(default=3, ge=0)
    n_hist: int = Field(default=3, ge=0)

    # ==========================================
    # SCENE ORACLE
    # ==========================================
    checker_cell: float = Field(default=2.0, gt=0)
    match_threshold: float = Field(default=0.05, gt=0)

    # ==========================================
    # LOGGING
    # ==========================================
    log_level: str = "INFO"
    log_json: bool = False

    # Конфигурация Pydantic
    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="ECM_",
        extra="ignore",
        case_sensitive=False,
    )

    @property
    def grid(self) -> tuple[int, int]:
        """Latent grid as (H, W)."""
        return self.grid_height, self.grid_width

    @property
    def anchor_range(self) -> tuple[float, float, int]:
        """(d_min, d_max, D) for make_lid_anchors."""
        return self.depth_min, self.depth_max, self.depth_count


config = Settings()
