# infrastructure/files.py
"""
Атомарная запись файлов: пишем во временный файл рядом, потом os.replace.

Так читатель никогда не увидит наполовину записанный отчет или тензор.
"""

import os
import tempfile
from pathlib import Path


def write_bytes_atomic(path: str | Path, data: bytes) -> Path:
    """Записать байты атомарно."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise

    return path


def write_text_atomic(path: str | Path, text: str) -> Path:
    """Записать текст (UTF-8) атомарно."""
    return write_bytes_atomic(path, text.encode("utf-8"))
