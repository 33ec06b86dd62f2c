from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from treecipher import solver  # noqa: E402
from treecipher.tree import parse_tree  # noqa: E402

from samples import GROWTH_TREE, PATTERN_T1, PATTERN_T2, RUNNING_T1, RUNNING_T2, SAMPLE_TREE  # noqa: E402

# Every backtracking run in the session, as (states_visited, N after deductions).
SOLVED: list[tuple[int, int | None]] = []
ACCEPTANCE_LINES: list[str] = []

_original_backtrack = solver._Engine.backtrack


def _recording_backtrack(self, st, step_limit=None):
    verdict, final = _original_backtrack(self, st, step_limit)
    if verdict is not solver.Verdict.UNKNOWN:
        SOLVED.append((self.trace.states_visited, self.trace.n_after_deductions))
    return verdict, final


solver._Engine.backtrack = _recording_backtrack


@pytest.fixture
def record_acceptance():
    """Print a criterion line and keep it for the terminal summary."""

    def record(line: str) -> None:
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


@pytest.fixture
def running_pair():
    return parse_tree(RUNNING_T1), parse_tree(RUNNING_T2)


@pytest.fixture
def pattern_pair():
    return parse_tree(PATTERN_T1), parse_tree(PATTERN_T2)


@pytest.fixture
def sample_tree():
    return parse_tree(SAMPLE_TREE)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    from treecipher.analytics import state_bound

    checked = [(s, n) for s, n in SOLVED if n is not None]
    bad = [(s, n) for s, n in checked if s > state_bound(n) + 1]
    tr = terminalreporter
    tr.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        tr.write_line(line)
    status = "PASS" if not bad else "FAIL"
    tr.write_line(
        f"[{status}] criterion 8 (whole session): {len(checked)} solved instances, "
        f"{len(bad)} with states_visited > ceil(N*2437/709) + 1"
    )


def pytest_sessionfinish(session, exitstatus):
    from treecipher.analytics import state_bound

    if any(n is not None and s > state_bound(n) + 1 for s, n in SOLVED):
        session.exitstatus = 1
