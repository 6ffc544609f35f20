# app/cli/main.py
"""
🖥️ ПАРСЕР И ЗАПУСК КОМАНД

    python main.py overlap --query-view CAM_FRONT --k 2
    python main.py verify --pairs CAM_FRONT:CAM_FRONT@1 --out report.json
    python main.py sample --seed 42
    python main.py sample --mode reverse --total-frames 11
    python main.py inject --scene scene.json --frame 0 --view CAM_FRONT --latent in.ecmt --out out.ecmt
    python main.py render --view CAM_FRONT --out renders/

Коды выхода: 0 - успех, 2 - ошибка использования, 3 - битый входной файл.
"""

import argparse
import sys
from typing import Sequence

import structlog

from app.cli.commands import (
    DEFAULT_VERIFY_PAIRS,
    MODE_ALIASES,
    cmd_inject,
    cmd_overlap,
    cmd_render,
    cmd_sample,
    cmd_verify,
    open_scene,
    parse_anchors,
    parse_grid,
    parse_pairs,
)
from app.errors import EcmError, UsageError
from app.geometry import make_lid_anchors
from config.settings import Settings, config
from infrastructure.files import write_text_atomic
from infrastructure.logger import setup_logging
from infrastructure.tensor_io import write_tensor

logger = structlog.get_logger()


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


# ==========================================
# ПАРСЕР
# ==========================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scene", default="synthetic", help="JSON сцены или 'synthetic'")
    common.add_argument("--frame", type=int, default=0)
    common.add_argument("--grid", default=None, help="латентная сетка HxW (по умолчанию 28x50)")
    common.add_argument("--anchors", default=None, help="DMIN:DMAX:D (по умолчанию 1:60:10)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="файл отчета / тензора (или каталог для render)")

    parser = argparse.ArgumentParser(prog="ecm", description="ECM camera-geometry kernels")
    sub = parser.add_subparsers(dest="command", required=True)

    overlap = sub.add_parser("overlap", parents=[common], help="ранжировать целевые виды по перекрытию")
    overlap.add_argument("--query-view", default="CAM_FRONT")
    overlap.add_argument("--candidates", type=_str_list, default=None, help="VIEW[@FRAME],...")
    overlap.add_argument("--k", type=int, default=None)
    overlap.add_argument("--fields-dir", default=None, help="каталог для полей выбранных видов (ECMT)")

    verify = sub.add_parser("verify", parents=[common], help="проверить поля по синтетической сцене")
    verify.add_argument("--pairs", default=DEFAULT_VERIFY_PAIRS, help="QUERY[@F]:TARGET[@F],...")
    verify.add_argument("--threshold", type=float, default=None)
    verify.add_argument("--checker-cell", type=float, default=None)

    sample = sub.add_parser("sample", parents=[common], help="план кадров для обучения / генерации")
    sample.add_argument("--mode", choices=sorted(MODE_ALIASES), default=None)
    sample.add_argument("--stride", type=int, default=1)
    sample.add_argument("--n-hist", type=int, default=None)
    sample.add_argument("--total-frames", type=int, default=None)
    sample.add_argument("--window-start", type=int, default=0)
    sample.add_argument("--window-len", type=int, default=None)
    sample.add_argument("--n-context", type=int, default=None)
    sample.add_argument("--references", type=_int_list, default=())
    sample.add_argument("--order", type=_int_list, default=None)
    sample.add_argument("--baseline", action="store_true", help="хронологическая выборка вместо случайной")

    inject = sub.add_parser("inject", parents=[common], help="scatter-инъекция условий в латент")
    inject.add_argument("--view", required=True)
    inject.add_argument("--latent", required=True, help="входной латент ECMT (C, H, W)")
    inject.add_argument("--context", type=_int_list, default=(), help="кадры для identity, через запятую")

    render_cmd = sub.add_parser("render", parents=[common], help="рендер вида синтетической сцены")
    render_cmd.add_argument("--view", default="CAM_FRONT")
    render_cmd.add_argument("--checker-cell", type=float, default=None)

    return parser


# ==========================================
# ЗАПУСК
# ==========================================

def _emit(text: str, out: str | None) -> None:
    if out:
        write_text_atomic(out, text)
    else:
        sys.stdout.write(text)


def _dispatch(args: argparse.Namespace, settings: Settings) -> None:
    grid = parse_grid(args.grid) if args.grid else settings.grid
    anchors = parse_anchors(args.anchors) if args.anchors else make_lid_anchors(*settings.anchor_range)
    seed = settings.seed if args.seed is None else args.seed
    if seed < 0:
        raise UsageError(f"--seed must be >= 0, got {seed}")
    threads = settings.threads
    checker_cell = getattr(args, "checker_cell", None) or settings.checker_cell

    if args.command == "sample":
        _emit(
            cmd_sample(
                settings,
                seed,
                mode=args.mode,
                stride=args.stride,
                n_hist=args.n_hist,
                total_frames=args.total_frames,
                window_start=args.window_start,
                window_len=args.window_len,
                n_context=args.n_context,
                reference_frames=args.references,
                order=args.order,
                baseline=args.baseline,
            ),
            args.out,
        )
        return

    scene = open_scene(args.scene, settings, checker_cell)

    if args.command == "overlap":
        k = settings.cross_view_targets if args.k is None else args.k
        report = cmd_overlap(
            scene, args.frame, args.query_view, args.candidates, k, grid, anchors, threads, args.fields_dir
        )
        _emit(report, args.out)

    elif args.command == "verify":
        threshold = settings.match_threshold if args.threshold is None else args.threshold
        pairs = parse_pairs(args.pairs, args.frame)
        _emit(cmd_verify(scene, pairs, grid, anchors, threshold, checker_cell, threads), args.out)

    elif args.command == "inject":
        if not args.out:
            raise UsageError("inject needs --out for the injected latent")
        injected = cmd_inject(
            scene,
            args.frame,
            args.view,
            args.latent,
            settings.model_copy(update={"seed": seed}),
            args.context,
        )
        write_tensor(args.out, injected)

    elif args.command == "render":
        if not args.out:
            raise UsageError("render needs --out directory")
        cmd_render(scene, args.frame, args.view, grid, args.out, checker_cell, threads)


def run(argv: Sequence[str] | None = None, settings: Settings | None = None) -> int:
    """Запустить CLI и вернуть код выхода."""
    settings = settings or config
    parser = build_parser()

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    setup_logging(settings.log_level, settings.log_json)
    logger.info("command_start", command=args.command, threads=settings.threads)

    try:
        _dispatch(args, settings)
    except EcmError as e:
        logger.error("command_failed", command=args.command, error=str(e), error_type=type(e).__name__)
        sys.stderr.write(f"error: {e}\n")
        return e.exit_code

    logger.info("command_done", command=args.command)
    return 0
