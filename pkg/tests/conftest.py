import numpy as np
import pytest

from optosqueeze.dynamics import EffectiveParams
from optosqueeze.model import SystemParams


@pytest.fixture
def fig2():
    """Reference working point: g = G = 0.1, delta_b = 2, on resonance, N_m = 10."""
    return SystemParams.fig2()


@pytest.fixture
def fig2_eff(fig2):
    return EffectiveParams.from_system(fig2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line per acceptance criterion; returns the outcome for asserting."""
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
