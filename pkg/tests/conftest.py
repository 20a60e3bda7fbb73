# ruff: noqa: D100
import sys
from pathlib import Path

import pytest

# Ensure src layout is importable without installing the package
ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))


@pytest.fixture
def empty_config(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Empty YAML file; every value falls back to its default."""
    for name in (
        "MXG_CONFIG",
        "MXG_HALL_CAP",
        "MXG_SEED",
        "MXG_SAMPLES",
        "MXG_CONCURRENCY",
        "MXG_DEBUG_SPANNING",
    ):
        monkeypatch.delenv(name, raising=False)
    cfg = tmp_path / "conf.yaml"
    cfg.write_text("")
    monkeypatch.chdir(tmp_path)
    return cfg
