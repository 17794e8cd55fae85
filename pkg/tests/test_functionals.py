import numpy as np
import pytest
from hypothesis import given, seed, settings, strategies as st

from conftest import signals
from tautline.core.functionals import (
    arc_length,
    dirichlet_energy,
    l2_inner,
    l2_norm,
    linf_norm,
    linf_norm_pl,
    pairing_with_certificate,
    total_variation,
)
from tautline.core.signals import (
    PiecewiseConstantSignal,
    PiecewiseLinearFunction,
    jordan_decomposition,
    jump_measure,
)


def test_total_variation_of_figure1(figure1_signal):
    assert total_variation(figure1_signal) == pytest.approx(4.5)


def test_constant_signal_has_no_variation():
    assert total_variation(PiecewiseConstantSignal.constant(3.0, 0, 1)) == 0.0


def test_norms_of_sign(sign_signal):
    assert l2_norm(sign_signal) == pytest.approx(np.sqrt(2.0))
    assert linf_norm(sign_signal) == 1.0
    assert l2_inner(sign_signal, sign_signal) == pytest.approx(2.0)


def test_pairing_with_the_sign_certificate(sign_signal):
    xi = PiecewiseLinearFunction([-1, 0, 1], [0.0, -1.0, 0.0])
    u = 0.5 * sign_signal
    # xi' = sign(x), so <u, xi'> = 0.5 * 2
    assert pairing_with_certificate(u, xi) == pytest.approx(1.0)
    assert linf_norm_pl(xi) == 1.0


@seed(11)
@settings(max_examples=50, deadline=None)
@given(u=signals())
def test_pairing_attains_total_variation(u):
    # xi = -sign of the jump at each breakpoint, 0 at the ends
    inner = u.breakpoints[1:-1]
    nodes = np.concatenate(([u.breakpoints[0]], inner, [u.breakpoints[-1]]))
    values = np.concatenate(([0.0], -np.sign(np.diff(u.values)), [0.0]))
    xi = PiecewiseLinearFunction(nodes, values)
    assert pairing_with_certificate(u, xi) == pytest.approx(total_variation(u), abs=1e-9)


@seed(17)
@settings(max_examples=50, deadline=None)
@given(u=signals(), draw=st.integers(min_value=0, max_value=2**32 - 1))
def test_pairing_never_exceeds_total_variation(u, draw):
    rng = np.random.default_rng(draw)
    b = u.breakpoints
    nodes = np.sort(np.concatenate((b, 0.5 * (b[:-1] + b[1:]))))
    values = rng.uniform(-1.0, 1.0, size=nodes.size)
    values[0] = values[-1] = 0.0
    xi = PiecewiseLinearFunction(nodes, values)
    assert pairing_with_certificate(u, xi) <= total_variation(u) + 1e-9


@seed(19)
@settings(max_examples=50, deadline=None)
@given(u=signals(), shift=st.floats(min_value=-5, max_value=5))
def test_total_variation_ignores_constants_and_splits_into_jumps(u, shift):
    J = total_variation(u)
    assert total_variation(u + shift) == pytest.approx(J, abs=1e-9)
    pos, neg = jordan_decomposition(jump_measure(u))
    assert float(np.sum(pos.masses) + np.sum(neg.masses)) == pytest.approx(J, abs=1e-9)


def test_string_energies():
    W = PiecewiseLinearFunction([0, 3, 4], [0.0, 4.0, 4.0])
    assert arc_length(W) == pytest.approx(6.0)
    assert dirichlet_energy(W) == pytest.approx(0.5 * (16.0 / 3.0))
