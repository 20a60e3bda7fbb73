"""Tests for environment variable overrides in main()."""

import sys
from pathlib import Path

import pytest

from maxgrowth.cli import main


@pytest.mark.asyncio
async def test_env_hall_cap_applies(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """MXG_HALL_CAP lowers the enumeration cap below the request."""
    monkeypatch.setenv("MXG_HALL_CAP", "3")
    monkeypatch.setattr(
        sys,
        "argv",
        ["maxgrowth", "-c", str(empty_config), "hall", "--generators", "2", "--max-length", "3"],
    )

    with pytest.raises(SystemExit) as exc:
        await main()
    assert exc.value.code == 1
    assert "CapExceeded" in capsys.readouterr().err


@pytest.mark.asyncio
async def test_cli_hall_cap_beats_env(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """--hall-cap wins over MXG_HALL_CAP."""
    monkeypatch.setenv("MXG_HALL_CAP", "3")
    monkeypatch.setattr(
        sys,
        "argv",
        [
            "maxgrowth",
            "-c",
            str(empty_config),
            "--hall-cap",
            "10",
            "hall",
            "--generators",
            "2",
            "--max-length",
            "3",
        ],
    )

    await main()
    assert "1 (2): X1 X2" in capsys.readouterr().out


@pytest.mark.asyncio
async def test_env_config_path(
    tmp_path: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """MXG_CONFIG selects the YAML file, whose format applies."""
    cfg = tmp_path / "env.yaml"
    cfg.write_text("output_format: json\n")
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("MXG_CONFIG", str(cfg))
    monkeypatch.setattr(
        sys, "argv", ["maxgrowth", "witt", "--generators", "3", "--length", "3"]
    )

    await main()
    assert capsys.readouterr().out.strip() == (
        '{"generators":3,"length":3,"dimension":8}'
    )
