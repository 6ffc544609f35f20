# app/cli/commands.py
"""
⚙️ КОМАНДЫ CLI

Каждая команда - обычная функция: принимает сцену и параметры,
возвращает текст отчета (CSV / JSON) или массив. Разбор флагов,
запись файлов и коды выхода живут в app/cli/main.py.
"""

import csv
import io
import json
from pathlib import Path
from typing import Sequence

import numpy as np
import structlog

from app.cli.scene_file import Scene, load_scene, synthetic_scene
from app.control import (
    BOX_INPUT_DIM,
    ChannelAdapter,
    ConditionEmbedding,
    EmbeddingProvider,
    KeypointHead,
    Mlp,
    aggregate_appearance,
    attach_keypoints,
    encode_box,
    encode_map,
    find_track,
    generate_keypoints,
    scatter_inject_many,
    update_embedding_identity,
)
from app.control.models import Box3D
from app.correspondence import ViewKind, build_field, match_target_views
from app.ecm import FeatureMap
from app.errors import InvalidArgumentError, MalformedInputError, UsageError
from app.geometry import DepthAnchors, make_lid_anchors
from app.oracle import render, verify_correspondence, write_ppm
from app.sampling import (
    build_inference_schedule,
    sample_chronological_frames,
    sample_training_frames,
)
from config.settings import Settings
from infrastructure.tensor_io import read_tensor, write_tensor

logger = structlog.get_logger()

ViewToken = tuple[str, int]

DEFAULT_VERIFY_PAIRS = "CAM_FRONT:CAM_FRONT,CAM_FRONT:CAM_FRONT@1,CAM_FRONT:CAM_BACK"

MODE_ALIASES = {
    "chrono": "chronological",
    "chronological": "chronological",
    "stride": "stride",
    "reverse": "reverse",
    "custom": "custom",
}


# ==========================================
# РАЗБОР ЗНАЧЕНИЙ ФЛАГОВ
# ==========================================

def parse_grid(text: str) -> tuple[int, int]:
    """'28x50' -> (28, 50)."""
    try:
        height, width = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"--grid must look like HxW, got {text!r}") from None
    if height < 1 or width < 1:
        raise UsageError(f"--grid dims must be >= 1, got {text!r}")
    return height, width


def parse_anchors(text: str) -> DepthAnchors:
    """'1:60:10' -> LID якоря."""
    try:
        d_min, d_max, count = text.split(":")
        return make_lid_anchors(float(d_min), float(d_max), int(count))
    except ValueError:
        raise UsageError(f"--anchors must look like DMIN:DMAX:D, got {text!r}") from None
    except InvalidArgumentError as e:
        raise UsageError(f"--anchors {text!r}: {e}") from e


def parse_view_token(token: str, default_frame: int) -> ViewToken:
    """'CAM_FRONT@1' -> ('CAM_FRONT', 1); без @ - кадр по умолчанию."""
    view, _, frame = token.strip().partition("@")
    if not view:
        raise UsageError(f"empty view id in {token!r}")
    try:
        return view, int(frame) if frame else default_frame
    except ValueError:
        raise UsageError(f"bad frame in view token {token!r}") from None


def parse_pairs(text: str, default_frame: int) -> list[tuple[ViewToken, ViewToken]]:
    """'A:B,A:B@1' -> [((A, f), (B, f)), ((A, f), (B, 1))]."""
    pairs = []
    for chunk in filter(None, (c.strip() for c in text.split(","))):
        query, sep, target = chunk.partition(":")
        if not sep:
            raise UsageError(f"--pairs entries look like QUERY:TARGET, got {chunk!r}")
        pairs.append((parse_view_token(query, default_frame), parse_view_token(target, default_frame)))
    if not pairs:
        raise UsageError("--pairs is empty")
    return pairs


def _frame_kind(frame: int, query_frame: int) -> ViewKind:
    return ViewKind.CURRENT if frame == query_frame else ViewKind.HISTORICAL


def open_scene(scene_arg: str | None, settings: Settings, checker_cell: float | None = None) -> Scene:
    """'synthetic' (или пусто) -> встроенная сцена, иначе путь к JSON."""
    if scene_arg in (None, "", "synthetic"):
        return synthetic_scene(
            settings.image_width,
            settings.image_height,
            checker_cell or settings.checker_cell,
        )
    return load_scene(scene_arg)


def _to_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# ==========================================
# OVERLAP
# ==========================================

def cmd_overlap(
    scene: Scene,
    frame: int,
    query_view: str,
    candidates: Sequence[str] | None,
    k: int,
    grid: tuple[int, int],
    anchors: DepthAnchors,
    threads: int | None = None,
    fields_dir: str | Path | None = None,
) -> str:
    """
    CSV: target_view, frame, fraction, hits, total - в порядке ранжирования.

    С fields_dir поле каждого выбранного вида пишется в ECMT (H, W, D, 3):
    QUERY@F__TARGET@F.ecmt.
    """
    if k < 1:
        raise UsageError(f"--k must be >= 1, got {k}")

    query = scene.view_ref(frame, query_view)
    tokens = [parse_view_token(c, frame) for c in candidates] if candidates else [
        (view, frame) for view in scene.view_ids(frame) if view != query_view
    ]
    refs = [scene.view_ref(f, view, _frame_kind(f, frame)) for view, f in tokens]

    ranked = match_target_views(query, refs, k, anchors, grid, threads)

    if fields_dir is not None:
        for view, _ in ranked:
            field = build_field(query, view, anchors, grid, threads)
            name = f"{query_view}@{frame}__{view.view_id}@{view.frame_index}.ecmt"
            write_tensor(Path(fields_dir) / name, field.as_tensor())

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["target_view", "frame", "fraction", "hits", "total"])
    for view, score in ranked:
        writer.writerow([view.view_id, view.frame_index, repr(score.fraction), score.hits, score.total])

    logger.info("overlap_done", query=query_view, frame=frame, rows=len(ranked))
    return buffer.getvalue()


# ==========================================
# VERIFY
# ==========================================

def cmd_verify(
    scene: Scene,
    pairs: Sequence[tuple[ViewToken, ViewToken]],
    grid: tuple[int, int],
    anchors: DepthAnchors,
    threshold: float,
    checker_cell: float,
    threads: int | None = None,
) -> str:
    """JSON отчет по каждой паре: match rate, ошибка репроекции, покрытие."""
    oracle = scene.oracle_scene(checker_cell)
    renders = {}

    def rendered(view: str, frame: int):
        key = (view, frame)
        if key not in renders:
            renders[key] = render(oracle, scene.camera(frame, view), scene.frame(frame).pose, grid, threads)
        return renders[key]

    reports = []
    for (query_view, query_frame), (target_view, target_frame) in pairs:
        query = scene.view_ref(query_frame, query_view)
        target = scene.view_ref(target_frame, target_view, _frame_kind(target_frame, query_frame))
        field = build_field(query, target, anchors, grid, threads)
        report = verify_correspondence(
            rendered(query_view, query_frame),
            rendered(target_view, target_frame),
            field,
            threshold,
            scene=oracle,
        )
        reports.append(report.model_dump(mode="json"))

    return _to_json(
        {
            "grid": list(grid),
            "anchors": anchors.values.tolist(),
            "threshold": threshold,
            "checker_cell": oracle.checker_cell,
            "pairs": reports,
        }
    )


# ==========================================
# SAMPLE
# ==========================================

def cmd_sample(
    settings: Settings,
    seed: int,
    mode: str | None = None,
    stride: int = 1,
    n_hist: int | None = None,
    total_frames: int | None = None,
    window_start: int = 0,
    window_len: int | None = None,
    n_context: int | None = None,
    reference_frames: Sequence[int] = (),
    order: Sequence[int] | None = None,
    baseline: bool = False,
) -> str:
    """
    Без --mode: обучающий план (случайный, либо хронологический при baseline).
    С --mode: расписание генерации.
    """
    if mode is None:
        window_len = settings.window_len if window_len is None else window_len
        n_context = settings.n_context if n_context is None else n_context
        sampler = sample_chronological_frames if baseline else sample_training_frames
        plan = sampler(window_start, window_len, n_context, seed)
        return _to_json({"kind": "training", "seed": seed, "plan": plan.model_dump(mode="json")})

    if mode not in MODE_ALIASES:
        raise UsageError(f"unknown --mode {mode!r}, expected one of {sorted(MODE_ALIASES)}")

    schedule = build_inference_schedule(
        settings.window_len if total_frames is None else total_frames,
        MODE_ALIASES[mode],
        stride,
        settings.n_hist if n_hist is None else n_hist,
        reference_frames,
        order,
    )
    return _to_json({"kind": "inference", "schedule": schedule.model_dump(mode="json")})


# ==========================================
# INJECT
# ==========================================

def _read_feature_map(path: Path, tag: str) -> FeatureMap:
    array = read_tensor(path)
    if array.ndim != 3:
        raise MalformedInputError(f"{path}: expected a (C, H, W) tensor, got shape {array.shape}")
    try:
        return FeatureMap(array, tag)
    except InvalidArgumentError as e:
        raise MalformedInputError(f"{path}: {e}") from e


def _track_appearances(
    scene: Scene,
    box: Box3D,
    e: ConditionEmbedding,
    frame: int,
    context_frames: Sequence[int],
    settings: Settings,
    head: KeypointHead,
) -> list[np.ndarray]:
    """
    Внешний вид трека на контекстных кадрах по всем видам с признаками.

    Если трек размечен на кадре h - точки строим вокруг его бокса,
    иначе переносим текущие точки позами (объект считаем неподвижным).
    """
    if box.track_id is None:
        return []

    appearances = []
    for h in context_frames:
        if h == frame:
            continue
        context = scene.frame(h)
        box_h = find_track(context.boxes, box.track_id)

        for cam in context.cameras:
            path = context.features.get(cam.view_id)
            if path is None:
                continue
            feat = _read_feature_map(path, f"{cam.view_id}@{h}")
            if feat.channels != e.dim:
                raise MalformedInputError(
                    f"{path}: appearance features need {e.dim} channels, got {feat.channels}"
                )

            if box_h is not None:
                keypoints = generate_keypoints(
                    box_h, e, settings.keypoints_fixed, settings.keypoints_learned, head
                )
                appearances.append(aggregate_appearance(box_h, feat, cam, keypoints))
            else:
                appearances.append(
                    aggregate_appearance(
                        None, feat, cam, e.keypoints, scene.frame(frame).pose, context.pose
                    )
                )
    return appearances


def cmd_inject(
    scene: Scene,
    frame: int,
    view: str,
    latent_path: str | Path,
    settings: Settings,
    context_frames: Sequence[int] = (),
) -> np.ndarray:
    """Латент кадра с внедренными эмбеддингами боксов и элементов карты."""
    latent = _read_feature_map(Path(latent_path), f"{view}@{frame}")
    scene_frame = scene.frame(frame)
    cam = scene.camera(frame, view)

    seed = settings.seed
    dim = settings.embedding_dim
    provider = EmbeddingProvider.default(dim, seed)
    box_mlp = Mlp.seeded(BOX_INPUT_DIM, dim, settings.mlp_hidden, seed)
    map_mlp = Mlp.seeded(2 * settings.map_points, dim, settings.mlp_hidden, seed + 1)
    head = KeypointHead.seeded(dim, settings.keypoints_fixed, settings.keypoints_learned, seed + 2)
    adapter = ChannelAdapter.seeded(dim, latent.channels, seed + 3) if latent.channels != dim else None

    embeddings = []
    for box in scene_frame.boxes:
        e = encode_box(box, provider, box_mlp, frame)
        e = attach_keypoints(box, e, settings.keypoints_fixed, settings.keypoints_learned, head)
        appearances = _track_appearances(scene, box, e, frame, context_frames, settings, head)
        embeddings.append(update_embedding_identity(e, appearances, box, head, settings.keypoints_fixed))

    for element in scene_frame.map_elements:
        embeddings.append(encode_map(element, provider, map_mlp, settings.map_points, frame))

    injected = scatter_inject_many(latent, embeddings, cam, adapter)
    logger.info(
        "latent_injected",
        frame=frame,
        view=view,
        boxes=len(scene_frame.boxes),
        map_elements=len(scene_frame.map_elements),
        prompt=scene.prompt,
    )
    return injected.data


# ==========================================
# RENDER
# ==========================================

def cmd_render(
    scene: Scene,
    frame: int,
    view: str,
    grid: tuple[int, int],
    out_dir: str | Path,
    checker_cell: float,
    threads: int | None = None,
) -> list[Path]:
    """PPM картинка + ECMT rgb и глубина для одного вида."""
    view_ref = scene.view_ref(frame, view)
    rendered = render(scene.oracle_scene(checker_cell), view_ref.camera, view_ref.pose, grid, threads)

    out_dir = Path(out_dir)
    stem = f"{view}_{frame}"
    paths = [
        write_ppm(out_dir / f"{stem}.ppm", rendered.rgb),
        write_tensor(out_dir / f"{stem}_rgb.ecmt", rendered.rgb),
        write_tensor(out_dir / f"{stem}_depth.ecmt", rendered.depth),
    ]
    logger.info("view_rendered_to_disk", view=view, frame=frame, files=[str(p) for p in paths])
    return paths


__all__ = [
    "DEFAULT_VERIFY_PAIRS",
    "cmd_inject",
    "cmd_overlap",
    "cmd_render",
    "cmd_sample",
    "cmd_verify",
    "open_scene",
    "parse_anchors",
    "parse_grid",
    "parse_pairs",
    "parse_view_token",
]
