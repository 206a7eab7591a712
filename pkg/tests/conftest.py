from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lattice_spectra import LatticeModel  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
MODELS = ROOT / "models"
GOLDEN = Path(__file__).parent / "golden"

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    _ACCEPTANCE.append((name, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def chain12() -> LatticeModel:
    """N = 12 open chain with t = 2 t' = 0.1."""
    return LatticeModel.uniform(12, 0.1, 0.05)


@pytest.fixture
def triangle() -> LatticeModel:
    """Three-site ring with unit hops; realizes the all-ones-off-diagonal 3x3."""
    return LatticeModel.uniform(3, 1.0, 1.0, 0.0, "closed")
