import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tautline.core.signals import PiecewiseConstantSignal

MAX_PIECES = 30
VALUE_RANGE = 10


@st.composite
def signals(draw, min_pieces=2, max_pieces=MAX_PIECES, uniform_grid=None):
    """Piecewise-constant signals with values in [-10, 10] on uniform or random grids."""
    n = draw(st.integers(min_value=min_pieces, max_value=max_pieces))
    # values on a 0.01 lattice keep gnorm away from rounding level
    cents = draw(arrays(np.int64, (n,), elements=st.integers(-100 * VALUE_RANGE, 100 * VALUE_RANGE)))
    values = cents / 100.0
    if uniform_grid is None:
        uniform_grid = draw(st.booleans())
    if uniform_grid:
        return PiecewiseConstantSignal.uniform(values)
    lengths = draw(arrays(np.int64, (n,), elements=st.integers(1, 20))) / 10.0
    return PiecewiseConstantSignal(np.concatenate(([0.0], np.cumsum(lengths))), values)


def lambda_fractions():
    """Lambda as a fraction of gnorm, roughly log-uniform over [1e-3, 2]."""
    return st.floats(min_value=-3.0, max_value=np.log10(2.0)).map(lambda e: 10.0**e)


@pytest.fixture
def sign_signal():
    return PiecewiseConstantSignal([-1.0, 0.0, 1.0], [-1.0, 1.0])


@pytest.fixture
def figure1_signal():
    return PiecewiseConstantSignal.uniform([1.5, -1.0, -0.5, 1.0])


@pytest.fixture
def figure2_signal():
    return PiecewiseConstantSignal.uniform([-1.0, -2.0, -0.45, 1.0, 0.5, 2.05])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def default_tolerance(monkeypatch):
    monkeypatch.delenv("TAUTLINE_TOL", raising=False)
