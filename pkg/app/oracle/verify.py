# app/oracle/verify.py
"""
✅ ПРОВЕРКА ПОЛЯ СООТВЕТСТВИЙ ПО ИСТИННОЙ ГЛУБИНЕ

Для каждого пикселя запроса с конечной глубиной берем ближайший якорь,
и если его проекция валидна, сравниваем цвета запроса и цели
(билинейно). Ошибку репроекции считаем относительно точки,
перенесенной по истинной глубине.

Если передана сцена, отдельно считаем "внутренние" пиксели: все четыре
билинейных тапа в цели лежат внутри карты, видят землю и попадают
в одну клетку шахматки. Там цвет цели не смешивается на границах клеток,
и несовпадение означает, что поле указало не в ту клетку.
"""

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict

from app.correspondence import CorrespondenceField, pixel_centers
from app.ecm.features import gather_bilinear_points
from app.errors import InvalidArgumentError
from app.geometry import back_project_pixels, project_points, transfer_points
from app.oracle.scene import RenderedView, SyntheticScene, checker_cells

logger = structlog.get_logger()

# Смещения тапов (row, col) в порядке 00, 10, 01, 11
TAP_OFFSETS = ((0, 0), (0, 1), (1, 0), (1, 1))


class VerificationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    query_view: str
    target_view: str
    query_frame: int
    target_frame: int
    finite_pixels: int
    compared: int
    matched: int
    coverage: float
    match_rate: float | None
    mean_reprojection_error: float | None
    interior_compared: int = 0
    interior_matched: int = 0
    interior_match_rate: float | None = None


def single_cell_taps(points: np.ndarray, cells: np.ndarray, on_ground: np.ndarray) -> np.ndarray:
    """
    Маска точек (N, 2), у которых четыре соседних центра пикселей
    внутри карты, на земле и в одной клетке.
    """
    height, width = on_ground.shape
    if height < 2 or width < 2:
        return np.zeros(points.shape[0], dtype=bool)

    col0 = np.floor(points[:, 0] - 0.5).astype(np.int64)
    row0 = np.floor(points[:, 1] - 0.5).astype(np.int64)
    inside = (col0 >= 0) & (col0 + 1 < width) & (row0 >= 0) & (row0 + 1 < height)
    col0 = np.clip(col0, 0, width - 2)
    row0 = np.clip(row0, 0, height - 2)

    mask = inside.copy()
    first = cells[row0, col0]
    for d_row, d_col in TAP_OFFSETS:
        rows, cols = row0 + d_row, col0 + d_col
        mask &= on_ground[rows, cols]
        mask &= np.all(cells[rows, cols] == first, axis=-1)
    return mask


def verify_correspondence(
    query: RenderedView,
    target: RenderedView,
    field: CorrespondenceField,
    threshold: float = 0.05,
    scene: SyntheticScene | None = None,
) -> VerificationReport:
    if query.grid != field.grid_size or target.grid != field.grid_size:
        raise InvalidArgumentError(
            f"render grids {query.grid}/{target.grid} do not match field grid {field.grid_size}"
        )

    height, width = field.grid_size
    finite = np.isfinite(query.depth)
    nearest = field.anchors.nearest(np.where(finite, query.depth, field.anchors.d_max))

    rows, cols = np.indices((height, width))
    best_valid = field.valid[rows, cols, nearest] & finite
    best_targets = field.targets[rows, cols, nearest]

    finite_count = int(finite.sum())
    compared = int(best_valid.sum())
    coverage = compared / finite_count if finite_count else 0.0

    match_rate = None
    mean_error = None
    matched = 0
    interior_compared = 0
    interior_matched = 0
    interior_rate = None

    if compared:
        points = best_targets[best_valid]
        query_rgb = np.moveaxis(query.rgb, 0, -1)[best_valid]
        target_rgb = gather_bilinear_points(target.feature_map(), points)
        matches = np.all(np.abs(query_rgb - target_rgb) < threshold, axis=-1)
        matched = int(matches.sum())
        match_rate = matched / compared

        if scene is not None:
            interior = single_cell_taps(points, *checker_cells(scene, target))
            interior_compared = int(interior.sum())
            interior_matched = int((matches & interior).sum())
            if interior_compared:
                interior_rate = interior_matched / interior_compared

        centers = pixel_centers(np.arange(height), width)[best_valid]
        if field.query_view.identical_to(field.target_view):
            truth = centers
        else:
            lifted = back_project_pixels(centers, query.camera, query.depth[best_valid])
            lifted = transfer_points(lifted, query.pose, target.pose)
            truth, _, _ = project_points(lifted, target.camera)

        errors = np.linalg.norm(points - truth, axis=-1)
        mean_error = float(errors.mean())

    report = VerificationReport(
        query_view=query.view_id,
        target_view=target.view_id,
        query_frame=query.pose.frame_index,
        target_frame=target.pose.frame_index,
        finite_pixels=finite_count,
        compared=compared,
        matched=matched,
        coverage=coverage,
        match_rate=match_rate,
        mean_reprojection_error=mean_error,
        interior_compared=interior_compared,
        interior_matched=interior_matched,
        interior_match_rate=interior_rate,
    )
    logger.info(
        "correspondence_verified",
        query=report.query_view,
        target=report.target_view,
        coverage=round(coverage, 6),
        match_rate=match_rate,
        interior_match_rate=interior_rate,
        reprojection_error=mean_error,
    )
    return report
