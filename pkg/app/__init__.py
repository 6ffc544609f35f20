# app/__init__.py
"""ECM: явное моделирование камер для многовидовой генерации (ядра + CLI)."""

__version__ = "1.0.0"
