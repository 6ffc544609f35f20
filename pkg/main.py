# main.py
"""
🚀 ГЛАВНЫЙ ФАЙЛ ЗАПУСКА

Это точка входа: разбирает флаги и запускает команду ECM.

    python main.py overlap --query-view CAM_FRONT --k 2
    ECM_THREADS=8 python main.py verify --out report.json

Настройки читаются при импорте config.settings. Если переменная ECM_*
не проходит валидацию, выходим с кодом 2 (ошибка использования).
"""

import sys

from pydantic import ValidationError


def main() -> int:
    try:
        from app.cli import run
    except ValidationError as e:
        sys.stderr.write(f"error: invalid ECM_* settings: {e.error_count()} errors\n{e}\n")
        return 2
    return run()


# ==========================================
# 📌 ENTRY POINT (точка входа)
# ==========================================

if __name__ == "__main__":
    sys.exit(main())
