from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from perturbed_gamma import ModelParams, ObservationGrid  # noqa: E402

REF_DT = (200.0, 300.0, 500.0)


@pytest.fixture
def theta0() -> ModelParams:
    return ModelParams(1.0, 0.02, 0.02)


@pytest.fixture
def ref_grid() -> ObservationGrid:
    return ObservationGrid.repeated(REF_DT, 200)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criteria")
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
