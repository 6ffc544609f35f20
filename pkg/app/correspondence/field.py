# app/correspondence/field.py
"""
🔗 ПОСТРОЕНИЕ ПОЛЯ СООТВЕТСТВИЙ

Для каждого пикселя p_q латентной сетки запроса:
    1. поднимаем p_q на каждый якорь d_i  (обратная проекция)
    2. переносим в ego целевого кадра       (E_k^-1 . E_t)
    3. проецируем целевой камерой           (K_k)
Все в латентном разрешении: камеры масштабируются под сетку (H, W).
"""

import numpy as np
import structlog

from app.correspondence.models import CorrespondenceField, OverlapScore, ViewRef
from app.errors import InvalidArgumentError
from app.geometry import DepthAnchors, back_project_pixels, project_points, relative_transform
from app.geometry.transforms import apply_transform
from infrastructure.workers import run_partitioned

logger = structlog.get_logger()


def pixel_centers(rows: np.ndarray, width: int) -> np.ndarray:
    """Центры пикселей (w + 0.5, h + 0.5) для строк rows: (len(rows), W, 2)."""
    us = np.arange(width, dtype=np.float64) + 0.5
    vs = np.asarray(rows, dtype=np.float64) + 0.5
    uu, vv = np.meshgrid(us, vs)
    return np.stack([uu, vv], axis=-1)


def _check_grid(grid: tuple[int, int]) -> tuple[int, int]:
    try:
        height, width = (int(d) for d in grid)
    except (TypeError, ValueError) as e:
        raise InvalidArgumentError(f"grid must be (H, W): {e}") from e
    if height < 1 or width < 1:
        raise InvalidArgumentError(f"grid dims must be >= 1, got {(height, width)}")
    return height, width


# ==========================================
# BUILD FIELD
# ==========================================

def build_field(
    query: ViewRef,
    target: ViewRef,
    anchors: DepthAnchors,
    grid: tuple[int, int],
    threads: int | None = None,
) -> CorrespondenceField:
    """
    Построить поле соответствий query -> target на сетке grid = (H, W).

    Строки сетки считаются независимо (можно делить по потокам),
    результат не зависит от числа потоков.
    """
    height, width = _check_grid(grid)
    depths = anchors.values
    depth_count = len(anchors)

    if query.identical_to(target):
        # Тот же вид: соответствие - сами центры пикселей, точно
        centers = pixel_centers(np.arange(height), width)
        targets = np.broadcast_to(centers[:, :, None, :], (height, width, depth_count, 2)).copy()
        valid = np.ones((height, width, depth_count), dtype=bool)

        logger.debug("field_identity", view_id=query.view_id, frame=query.frame_index)
        return CorrespondenceField(query, target, (height, width), anchors, targets, valid)

    query_cam = query.camera.scaled_to(width, height)
    target_cam = target.camera.scaled_to(width, height)
    transform = relative_transform(query.pose, target.pose)

    def build_rows(start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        centers = pixel_centers(np.arange(start, stop), width)
        uv = np.broadcast_to(centers[:, :, None, :], (stop - start, width, depth_count, 2))
        depth = np.broadcast_to(depths, (stop - start, width, depth_count))

        points = back_project_pixels(uv, query_cam, depth)
        if transform is not None:
            points = apply_transform(transform, points)

        target_uv, _, hit = project_points(points, target_cam)
        return target_uv, hit

    parts = run_partitioned(build_rows, height, threads)
    targets = np.concatenate([part[0] for part in parts], axis=0)
    valid = np.concatenate([part[1] for part in parts], axis=0)

    logger.debug(
        "field_built",
        query=query.view_id,
        target=target.view_id,
        query_frame=query.frame_index,
        target_frame=target.frame_index,
        grid=(height, width),
        hits=int(valid.sum()),
    )
    return CorrespondenceField(query, target, (height, width), anchors, targets, valid)


# ==========================================
# OVERLAP
# ==========================================

def overlap(field: CorrespondenceField) -> OverlapScore:
    """Доля точек {p_ki}, попавших в целевой вид перед камерой."""
    return OverlapScore.from_counts(int(np.count_nonzero(field.valid)), int(field.valid.size))
