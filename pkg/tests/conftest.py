import numpy as np
import pytest

from rickerstage.core import RickerSystem

SEED = 20240601


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def stocking_system():
    # sigma2 alternates (2, 0.1): mean 1.05 > 1; beta e^alpha sigma1 = 0.5
    return RickerSystem(alpha=0.0, beta=0.5, sigma1=1.0, sigma2=(2.0, 0.1), c1=1.0, c2=0.0)


def random_seeds(rng, n=20):
    """Initial pairs drawn from (0, 10]^2."""
    return 10.0 - rng.uniform(0.0, 10.0, size=(n, 2))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if rep.when == "call" and "criterion" in props:
                lines.append((props["criterion"], outcome.upper()))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in sorted(lines, key=lambda x: _key(x[0])):
        terminalreporter.write_line(f"{'PASS' if outcome == 'PASSED' else 'FAIL'}  {label}")


def _key(label):
    head = label.split()[0]
    num = "".join(ch for ch in head if ch.isdigit())
    return (int(num) if num else 0, head)
