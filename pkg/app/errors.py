# app/errors.py
"""
Ошибки приложения.

Все ошибки наследуются от EcmError. Это НЕ ValueError: так pydantic
валидаторы пробрасывают их наружу как есть, без оборачивания в ValidationError.

exit_code используется CLI:
    0 - успех
    2 - ошибка использования (неправильные флаги, неизвестный view)
    3 - битый входной файл (JSON сцены, тензор)
"""


class EcmError(Exception):
    """Базовая ошибка."""

    exit_code = 1


class InvalidArgumentError(EcmError):
    """Аргумент нарушает предусловие операции."""

    exit_code = 2


class InvalidCameraError(InvalidArgumentError):
    """Камера невалидна (фокус, главная точка, не жесткий extrinsic)."""


class InvalidPoseError(InvalidArgumentError):
    """Поза ego не жесткое преобразование или вырождена."""


class UnknownLabelError(EcmError):
    """Семантический класс не найден в EmbeddingProvider."""

    exit_code = 3


class UsageError(EcmError):
    """Неправильное использование CLI."""

    exit_code = 2


class MalformedInputError(EcmError):
    """Входной файл не читается или нарушает формат."""

    exit_code = 3


__all__ = [
    "EcmError",
    "InvalidArgumentError",
    "InvalidCameraError",
    "InvalidPoseError",
    "UnknownLabelError",
    "UsageError",
    "MalformedInputError",
]
