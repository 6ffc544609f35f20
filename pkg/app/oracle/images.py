# app/oracle/images.py
"""PPM (P6) для просмотра рендеров глазами."""

from pathlib import Path

import numpy as np

from app.errors import InvalidArgumentError
from infrastructure.files import write_bytes_atomic


def encode_ppm(rgb: np.ndarray) -> bytes:
    """rgb (3, H, W) в [0, 1] -> байты P6."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[0] != 3:
        raise InvalidArgumentError(f"expected (3, H, W) image, got {rgb.shape}")

    _, height, width = rgb.shape
    pixels = np.round(np.clip(np.nan_to_num(rgb), 0.0, 1.0) * 255).astype(np.uint8)
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    return header + np.moveaxis(pixels, 0, -1).tobytes()


def write_ppm(path: str | Path, rgb: np.ndarray) -> Path:
    return write_bytes_atomic(path, encode_ppm(rgb))
