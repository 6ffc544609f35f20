# app/correspondence/matching.py
"""
Выбор целевых видов.

match_target_views - по максимальному перекрытию (основная стратегия).
neighbor_target_views - наивная стратегия {n-1, n+1} по кольцу рига.
"""

from typing import Sequence

import structlog

from app.correspondence.field import build_field, overlap
from app.correspondence.models import OverlapScore, ViewKind, ViewRef
from app.errors import InvalidArgumentError
from app.geometry import DepthAnchors

logger = structlog.get_logger()


def target_view_count(n_frames: int = 1) -> int:
    """
    Сколько целевых видов брать: в два раза больше числа кадров.

    cross-view: 2; reference / temporal: 2 * (N_r + N_h).
    """
    if n_frames < 1:
        raise InvalidArgumentError(f"n_frames must be >= 1, got {n_frames}")
    return 2 * n_frames


def match_target_views(
    query: ViewRef,
    candidates: Sequence[ViewRef],
    k: int,
    anchors: DepthAnchors,
    grid: tuple[int, int],
    threads: int | None = None,
) -> list[tuple[ViewRef, OverlapScore]]:
    """
    Отранжировать кандидатов по перекрытию с query и взять top-k.

    Порядок: fraction по убыванию, затем меньший |разрыв кадров|,
    затем меньший view_index. Сам query (тот же view_id и кадр) исключается.
    """
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if not candidates:
        raise InvalidArgumentError("candidate list is empty")

    pool = [view for view in candidates if not view.same_view_as(query)]
    if not pool:
        raise InvalidArgumentError("no candidates left after excluding the query view")

    for view in pool:
        if view.kind == ViewKind.CURRENT and view.frame_index != query.frame_index:
            raise InvalidArgumentError(
                f"current view {view.view_id} is on frame {view.frame_index}, "
                f"query is on frame {query.frame_index}"
            )

    scored = [(view, overlap(build_field(query, view, anchors, grid, threads))) for view in pool]
    scored.sort(
        key=lambda item: (
            -item[1].fraction,
            abs(item[0].frame_index - query.frame_index),
            item[0].view_index,
        )
    )
    ranked = scored[:k]

    logger.info(
        "views_matched",
        query=query.view_id,
        frame=query.frame_index,
        ranking=[(view.view_id, view.frame_index, round(score.fraction, 6)) for view, score in ranked],
    )
    return ranked


def neighbor_target_views(query_index: int, rig_views: Sequence[ViewRef]) -> list[ViewRef]:
    """Наивный выбор: соседи по кольцу рига {n-1, n+1}."""
    count = len(rig_views)
    if count < 2:
        raise InvalidArgumentError("need at least 2 views for neighbour matching")
    if not 0 <= query_index < count:
        raise InvalidArgumentError(f"query index {query_index} outside rig of {count}")
    if count == 2:
        return [rig_views[1 - query_index]]

    return [rig_views[(query_index - 1) % count], rig_views[(query_index + 1) % count]]
