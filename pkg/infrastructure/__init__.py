"""Инфраструктура приложения."""

from .logger import logger, setup_logging
from .files import write_bytes_atomic, write_text_atomic
from .tensor_io import read_tensor, write_tensor, encode_tensor, decode_tensor
from .workers import resolve_threads, run_partitioned

__all__ = [
    "logger",
    "setup_logging",
    "write_bytes_atomic",
    "write_text_atomic",
    "read_tensor",
    "write_tensor",
    "encode_tensor",
    "decode_tensor",
    "resolve_threads",
    "run_partitioned",
]
