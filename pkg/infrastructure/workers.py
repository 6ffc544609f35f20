# infrastructure/workers.py
"""
Пул потоков для ядер, параллельных по строкам сетки.

Строки режутся на непрерывные куски, куски считаются в ThreadPoolExecutor,
результаты склеиваются в порядке кусков. Ядра считают каждую строку
независимо, поэтому результат не зависит от числа потоков.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np
import structlog

from config.settings import config

logger = structlog.get_logger()

T = TypeVar("T")


def resolve_threads(threads: int | None = None) -> int:
    """Число потоков: явный аргумент или ECM_THREADS."""
    if threads is None:
        threads = config.threads
    return max(1, int(threads))


def row_chunks(n_rows: int, threads: int) -> list[tuple[int, int]]:
    """Делит [0, n_rows) на не более threads непрерывных кусков."""
    n_chunks = max(1, min(threads, n_rows))
    bounds = np.linspace(0, n_rows, n_chunks + 1).round().astype(int)
    return [
        (int(start), int(stop))
        for start, stop in zip(bounds[:-1], bounds[1:])
        if stop > start
    ]


def run_partitioned(
    fn: Callable[[int, int], T],
    n_rows: int,
    threads: int | None = None,
) -> list[T]:
    """
    Запускает fn(start, stop) по кускам строк.

    Возвращает список результатов в порядке строк.
    """
    threads = resolve_threads(threads)
    chunks = row_chunks(n_rows, threads)

    if len(chunks) <= 1:
        return [fn(start, stop) for start, stop in chunks]

    logger.debug("partitioned_run", rows=n_rows, chunks=len(chunks))

    with ThreadPoolExecutor(max_workers=len(chunks)) as executor:
        futures = [executor.submit(fn, start, stop) for start, stop in chunks]
        return [future.result() for future in futures]
