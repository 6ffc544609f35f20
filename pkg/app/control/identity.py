# app/control/identity.py
"""
🪪 IDENTITY: подмешиваем внешний вид объекта из прошлых/референсных кадров

A_box_h = Σ_j w_j · f(p_j),  p_j = K_h · E_h^-1 · E_t · P_j
E_box  += Σ A_box_h + Σ A_box_r

Трек сопоставляется только по track_id.
"""

from typing import Sequence

import numpy as np
import structlog

from app.control.keypoints import KeypointHead, generate_keypoints
from app.control.models import Box3D, ConditionEmbedding, Keypoint
from app.ecm.features import FeatureMap, gather_bilinear_points
from app.errors import InvalidArgumentError
from app.geometry import CameraModel, EgoPose, project_points, transfer_points

logger = structlog.get_logger()


def find_track(boxes: Sequence[Box3D], track_id: int | None) -> Box3D | None:
    """Бокс с тем же track_id или None."""
    if track_id is None:
        return None
    for box in boxes:
        if box.track_id == track_id:
            return box
    return None


def aggregate_appearance(
    b_h: Box3D | None,
    feat: FeatureMap,
    cam: CameraModel,
    keypoints: Sequence[Keypoint],
    pose_from: EgoPose | None = None,
    pose_to: EgoPose | None = None,
) -> np.ndarray:
    """
    Взвешенное чтение признаков кадра h в проекциях ключевых точек.

    Точки даны в ego кадра pose_from; если заданы обе позы, сначала
    переносим их в ego кадра pose_to (кадр h). Камера масштабируется
    под сетку feat. Невалидные проекции выпадают без перенормировки.
    """
    out = np.zeros(feat.channels)
    if not keypoints:
        return out

    points = np.array([kp.point.as_array() for kp in keypoints])
    weights = np.array([kp.weight for kp in keypoints])

    if pose_from is not None and pose_to is not None:
        points = transfer_points(points, pose_from, pose_to)

    grid_cam = cam.scaled_to(feat.width, feat.height)
    uv, _, valid = project_points(points, grid_cam)
    gathered = gather_bilinear_points(feat, uv)

    for j in range(len(keypoints)):
        if valid[j]:
            out += weights[j] * gathered[j]

    logger.debug(
        "appearance_aggregated",
        track_id=b_h.track_id if b_h is not None else None,
        view_id=cam.view_id,
        visible=int(valid.sum()),
        total=len(keypoints),
    )
    return out


def update_embedding_identity(
    e: ConditionEmbedding,
    appearances: Sequence[np.ndarray],
    box: Box3D,
    head: KeypointHead,
    n_fixed: int | None = None,
) -> ConditionEmbedding:
    """
    E += Σ appearances; ключевые точки пересчитываются по новому вектору
    вокруг бокса текущего кадра.
    """
    if not appearances:
        return e

    vector = np.array(e.vector, dtype=np.float64)
    for appearance in appearances:
        appearance = np.asarray(appearance, dtype=np.float64)
        if appearance.shape != vector.shape:
            raise InvalidArgumentError(
                f"appearance width {appearance.shape} != embedding width {vector.shape}"
            )
        vector = vector + appearance

    n_learned = head.n_learned
    n_fixed = n_fixed if n_fixed is not None else head.n_total - n_learned
    updated = e.with_vector(vector)
    updated = updated.with_keypoints(generate_keypoints(box, updated, n_fixed, n_learned, head))

    logger.debug("identity_updated", track_id=e.track_id, appearances=len(appearances))
    return updated
