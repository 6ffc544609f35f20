# app/ecm/attention.py
"""
🎯 ECM АГРЕГАЦИЯ ПРИЗНАКОВ

Вместо неявного внимания по всем пикселям целевого вида берем
только D точек соответствия {p_ki} и взвешиваем их распределением глубины:

    f_q = f_q + Σ_i W_qki · f_ki

Веса невалидных точек обнуляются без перенормировки.
По нескольким целевым видам суммы усредняются (или складываются, combine="sum").
"""

from typing import Literal, Sequence

import numpy as np
import structlog

from app.correspondence import CorrespondenceField
from app.ecm.features import FeatureMap, gather_bilinear_points
from app.ecm.head import DepthWeightHead, depth_weights_batch
from app.errors import InvalidArgumentError
from infrastructure.workers import run_partitioned

logger = structlog.get_logger()

Combine = Literal["mean", "sum"]


def _check_inputs(
    query: FeatureMap,
    targets: Sequence[tuple[FeatureMap, CorrespondenceField]],
    head: DepthWeightHead,
) -> None:
    if head.channels != query.channels:
        raise InvalidArgumentError(
            f"head expects {head.channels} channels, query has {query.channels}"
        )

    anchors = None
    for target_map, field in targets:
        if field.grid_size != query.grid:
            raise InvalidArgumentError(f"field grid {field.grid_size} != query grid {query.grid}")
        if anchors is None:
            anchors = field.anchors
        elif not field.anchors.same_as(anchors):
            raise InvalidArgumentError("all fields must share the same depth anchors")
        if field.depth_count != head.depth_count:
            raise InvalidArgumentError(
                f"head predicts {head.depth_count} weights, field has {field.depth_count} anchors"
            )
        if target_map.channels != query.channels:
            raise InvalidArgumentError(
                f"target map has {target_map.channels} channels, query has {query.channels}"
            )
        if target_map.grid != field.grid_size:
            raise InvalidArgumentError(
                f"target map grid {target_map.grid} != field grid {field.grid_size}"
            )


def aggregate(
    query: FeatureMap,
    targets: Sequence[tuple[FeatureMap, CorrespondenceField]],
    head: DepthWeightHead,
    combine: Combine = "mean",
    threads: int | None = None,
) -> FeatureMap:
    """
    Обновить признаки запроса по целевым видам.

    Пиксели, у которых нет ни одной валидной точки, возвращаются как есть.
    """
    if combine not in ("mean", "sum"):
        raise InvalidArgumentError(f"unknown combine mode {combine!r}")
    _check_inputs(query, targets, head)

    if not targets:
        return query.with_data(query.data)

    height, width = query.grid
    n_views = len(targets)

    def aggregate_rows(start: int, stop: int) -> np.ndarray:
        f_q = np.moveaxis(query.data[:, start:stop, :], 0, -1)          # (rows, W, C)
        weights = depth_weights_batch(f_q, head)                        # (rows, W, D)

        combined = np.zeros_like(f_q)
        touched = np.zeros(f_q.shape[:-1], dtype=bool)

        for target_map, field in targets:
            valid = field.valid[start:stop]
            masked = np.where(valid, weights, 0.0)
            gathered = gather_bilinear_points(target_map, field.targets[start:stop])  # (rows, W, D, C)

            view_sum = np.zeros_like(f_q)
            for i in range(field.depth_count):
                view_sum += masked[..., i, None] * gathered[..., i, :]

            combined += view_sum
            touched |= valid.any(axis=-1)

        if combine == "mean":
            combined = combined / n_views

        updated = np.where(touched[..., None], f_q + combined, f_q)
        return np.moveaxis(updated, -1, 0)

    parts = run_partitioned(aggregate_rows, height, threads)
    data = np.concatenate(parts, axis=1)

    logger.debug("features_aggregated", tag=query.tag, views=n_views, grid=(height, width), combine=combine)
    return query.with_data(data)
