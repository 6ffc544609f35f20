# infrastructure/tensor_io.py
"""
📦 ECMT - бинарный формат тензоров.

Раскладка (все числа little-endian):
    4 байта   magic "ECMT"
    u8        версия формата = 1
    u8        ndim
    u32 x ndim  размеры
    f32 x prod(dims)  данные, row-major, последняя ось самая быстрая

Используется для латентов, feature map и карт глубины в CLI.
"""

from pathlib import Path

import numpy as np

from app.errors import MalformedInputError
from infrastructure.files import write_bytes_atomic

MAGIC = b"ECMT"
VERSION = 1

_DIM_DTYPE = np.dtype("<u4")
_DATA_DTYPE = np.dtype("<f4")


def encode_tensor(array: np.ndarray) -> bytes:
    """Сериализовать массив в ECMT байты (данные приводятся к float32)."""
    array = np.asarray(array)
    if array.ndim > 255:
        raise MalformedInputError(f"too many dimensions: {array.ndim}")

    header = MAGIC + bytes([VERSION, array.ndim])
    dims = np.asarray(array.shape, dtype=_DIM_DTYPE).tobytes()
    payload = np.ascontiguousarray(array, dtype=_DATA_DTYPE).tobytes()
    return header + dims + payload


def decode_tensor(data: bytes) -> np.ndarray:
    """Разобрать ECMT байты. Любое нарушение формата -> MalformedInputError."""
    if len(data) < 6 or data[:4] != MAGIC:
        raise MalformedInputError("not an ECMT tensor (bad magic)")

    version, ndim = data[4], data[5]
    if version != VERSION:
        raise MalformedInputError(f"unsupported ECMT version {version}")

    dims_end = 6 + 4 * ndim
    if len(data) < dims_end:
        raise MalformedInputError("truncated ECMT header")

    dims = tuple(int(d) for d in np.frombuffer(data[6:dims_end], dtype=_DIM_DTYPE))
    count = int(np.prod(dims, dtype=np.int64)) if dims else 1

    payload = data[dims_end:]
    if len(payload) != count * 4:
        raise MalformedInputError(
            f"ECMT payload is {len(payload)} bytes, expected {count * 4}"
        )

    return np.frombuffer(payload, dtype=_DATA_DTYPE).reshape(dims).copy()


def write_tensor(path: str | Path, array: np.ndarray) -> Path:
    """Атомарно записать тензор в файл."""
    return write_bytes_atomic(path, encode_tensor(array))


def read_tensor(path: str | Path) -> np.ndarray:
    """Прочитать тензор из файла."""
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise MalformedInputError(f"cannot read tensor {path}: {e}") from e
    return decode_tensor(data)
