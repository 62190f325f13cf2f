from __future__ import annotations

import numpy as np
import pytest

from rpleb import HashSpec


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def spec2() -> HashSpec:
    # wider window keeps the table counts small for unit-sized tests
    return HashSpec(s=2.0, w=4.0, seed=11)


@pytest.fixture
def spec1() -> HashSpec:
    return HashSpec(s=1.0, w=4.0, seed=11)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config: pytest.Config) -> None:
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_line(request: pytest.FixtureRequest):
    """Record one pass/fail line for an acceptance criterion; printed in the summary."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"acceptance {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines.append((number, line))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config: pytest.Config) -> None:
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
