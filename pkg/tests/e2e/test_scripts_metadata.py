"""E2E metadata checks for helper scripts without running them.

Ensures files exist, are executable, and have a shebang.
"""

from __future__ import annotations

import os
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]


def _check_script(path: Path) -> None:
    assert path.exists(), f"Missing script: {path}"
    text = path.read_text(encoding="utf-8")
    assert text.startswith("#!/"), f"Missing shebang in {path}"
    assert os.access(path, os.X_OK), f"Not executable: {path}"


def test_scripts_present_and_executable() -> None:
    """Ensure helper scripts exist, are executable and define their helpers."""
    script = ROOT / "scripts" / "nonopen.sh"
    _check_script(script)
    text = script.read_text(encoding="utf-8")
    for helper in ("nonopen_table", "nonopen_certify_unit", "nonopen_report_all"):
        assert f"{helper}()" in text
