import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from riskexit.model import ExponentialClaims, ModelParams  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)


def dexp(lam, p, c, b):
    return ModelParams(lam, p, c, ExponentialClaims(b))


MODELS = {
    "symmetric": (dexp(1.0, 0.5, 1.0, 1.0), (1.0, 3.0), (1.0, 0.5, 1.0, 1.0)),
    "m_positive": (dexp(1.0, 0.6, 1.0, 2.0), (1.0, 2.0), (1.0, 0.6, 1.0, 2.0)),
    "m_zero": (dexp(1.0, 1 / 3, 1.0, 2.0), (1.0, 2.0), (1.0, 1 / 3, 1.0, 2.0)),
    "m_negative": (dexp(1.0, 0.4, 2.0, 1.0), (1.0, 2.0), (1.0, 0.4, 2.0, 1.0)),
}


@pytest.fixture(params=list(MODELS))
def model(request):
    """(params, (x, T), raw (lam, p, c, b)) for each reference model."""
    return MODELS[request.param]


@pytest.fixture
def sym():
    return MODELS["symmetric"][0]
