# config/__init__.py
"""Инициализация конфига."""

from .settings import config

__all__ = ["config"]
