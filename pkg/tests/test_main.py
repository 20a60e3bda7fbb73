"""Main flow tests: each subcommand end to end through main()."""

import json
import sys
from pathlib import Path

import pytest

from maxgrowth.cli import main
from maxgrowth.flags import lie_flag
from maxgrowth.parsing import parse_frame


async def _run(
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
    config: Path,
    *args: str,
) -> str:
    monkeypatch.setattr(sys, "argv", ["maxgrowth", "-c", str(config), *args])
    await main()
    return capsys.readouterr().out


@pytest.mark.asyncio
async def test_witt(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """Witt dimension printed as a bare integer."""
    out = await _run(
        monkeypatch, capsys, empty_config, "witt", "--generators", "2", "--length", "6"
    )
    assert out.strip() == "9"


@pytest.mark.asyncio
async def test_mgv_text(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """Growth vector, step and free type on one line."""
    out = await _run(
        monkeypatch, capsys, empty_config, "mgv", "--rank", "3", "--dim", "14"
    )
    assert out.strip() == "(3, 6, 14) step=3 free_type=true"


@pytest.mark.asyncio
async def test_mgv_json_after_subcommand(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """--format is accepted after the subcommand."""
    out = await _run(
        monkeypatch,
        capsys,
        empty_config,
        "mgv",
        "--rank",
        "2",
        "--dim",
        "8",
        "--format",
        "json",
    )
    assert json.loads(out) == {
        "rank": 2,
        "dim": 8,
        "growth": [2, 3, 5, 8],
        "step": 4,
        "free_type": True,
    }


@pytest.mark.asyncio
async def test_global_format_survives_subcommand(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """--format before the subcommand is not reset by it."""
    out = await _run(
        monkeypatch,
        capsys,
        empty_config,
        "--format",
        "json",
        "witt",
        "--generators",
        "3",
        "--length",
        "2",
    )
    assert json.loads(out)["dimension"] == 3


@pytest.mark.asyncio
async def test_hall(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """One line per length with its count."""
    out = await _run(
        monkeypatch,
        capsys,
        empty_config,
        "hall",
        "--generators",
        "2",
        "--max-length",
        "3",
    )
    assert out.splitlines() == [
        "1 (2): X1 X2",
        "2 (1): [X1,X2]",
        "3 (2): [X1,[X1,X2]] [X2,[X1,X2]]",
    ]


@pytest.mark.asyncio
async def test_growth_catalog(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """Default max step goes one past the maximal step."""
    out = await _run(
        monkeypatch,
        capsys,
        empty_config,
        "growth",
        "--catalog",
        "engel",
        "--point",
        "0,0,0,0",
    )
    assert out.strip() == (
        "dims=(2, 3, 4, 4) step=3 maximal=true free_type=false "
        "bracket_generating=true regular=true"
    )


@pytest.mark.asyncio
async def test_growth_frame_file_json(
    empty_config: Path,
    tmp_path: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """Frames read from disk; rational points; JSON report."""
    frame_file = tmp_path / "martinet.frame"
    frame_file.write_text("dim 3\nX1 = d1\nX2 = d2 + x1^2*d3\n")
    out = await _run(
        monkeypatch,
        capsys,
        empty_config,
        "growth",
        "--frame",
        str(frame_file),
        "--point",
        "0,1/2,3",
        "--max-step",
        "3",
        "--format",
        "json",
    )
    report = json.loads(out)
    assert report["dims"] == [2, 2, 3]
    assert report["regular"] is False
    assert report["maximal"] is False


@pytest.mark.asyncio
async def test_slice(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """Order-by-order verdict lines."""
    out = await _run(
        monkeypatch,
        capsys,
        empty_config,
        "slice",
        "--catalog",
        "heisenberg",
        "--point",
        "0,0,0",
        "--direction",
        "0,1,0",
    )
    assert out.splitlines() == [
        "i=1 m_i=1 n_i=2 t_rank=1 normal=false verdict=AmpleThinComplement",
        "i=2 m_i=2 n_i=3 t_rank=1 normal=false verdict=NotAmpleHyperplane",
    ]


@pytest.mark.asyncio
async def test_ampleness(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """The generic table ends with the final verdict."""
    out = await _run(
        monkeypatch, capsys, empty_config, "ampleness", "--rank", "2", "--dim", "4"
    )
    lines = out.splitlines()
    assert lines[0] == "i=1 m_i=1 n_i=2 verdict=AmpleThinComplement"
    assert lines[-1] == "final=NotAmpleHyperplane ample=false"


@pytest.mark.asyncio
async def test_nilpotentize_to_file(
    empty_config: Path,
    tmp_path: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """The written frame file has the algebra's growth."""
    target = tmp_path / "engel.frame"
    out = await _run(
        monkeypatch,
        capsys,
        empty_config,
        "nilpotentize",
        "--catalog",
        "engel",
        "--out",
        str(target),
    )
    assert out == ""
    frame = parse_frame(target.read_text())
    assert lie_flag(frame, [0, 0, 0, 0], 3).dims == (2, 3, 4)


@pytest.mark.asyncio
async def test_nilpotentize_maximal_algebra(
    empty_config: Path,
    tmp_path: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """--rank/--dim, and algebra files, print the frame."""
    out = await _run(
        monkeypatch,
        capsys,
        empty_config,
        "nilpotentize",
        "--rank",
        "2",
        "--dim",
        "5",
    )
    assert out.startswith("dim 5\nX1 = ")
    alg_file = tmp_path / "heis.alg"
    alg_file.write_text("layers 2 1\nbracket e1 e2 = e3\n")
    out = await _run(
        monkeypatch,
        capsys,
        empty_config,
        "nilpotentize",
        "--algebra",
        str(alg_file),
        "--format",
        "json",
    )
    report = json.loads(out)
    assert report["layers"] == [2, 1]
    assert report["frame"].startswith("dim 3\n")


@pytest.mark.asyncio
async def test_check_hall_suite(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """A passing suite prints ok and exits normally."""
    out = await _run(monkeypatch, capsys, empty_config, "check", "--suite", "hall")
    assert out.startswith("hall: ok (")


@pytest.mark.asyncio
@pytest.mark.parametrize("value", ["0", "-2", "two"])
async def test_check_rejects_non_positive_concurrency(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
    value: str,
) -> None:
    """--concurrency below one is a usage error, never a hang."""
    with pytest.raises(SystemExit) as exc:
        await _run(
            monkeypatch, capsys, empty_config,
            "--concurrency", value, "check", "--suite", "hall",
        )
    assert exc.value.code == 2
    assert "--concurrency" in capsys.readouterr().err


@pytest.mark.asyncio
async def test_check_ignores_zero_concurrency_env(
    empty_config: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """MXG_CONCURRENCY=0 falls back to the YAML value and the run completes."""
    monkeypatch.setenv("MXG_CONCURRENCY", "0")
    out = await _run(monkeypatch, capsys, empty_config, "check", "--suite", "hall")
    assert out.startswith("hall: ok (")
