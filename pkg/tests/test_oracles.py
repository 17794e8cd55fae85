import numpy as np
import pytest
from hypothesis import given, seed, settings

from conftest import lambda_fractions, signals
from tautline.analysis.theorems import gnorm
from tautline.core.functionals import l2_norm
from tautline.core.signals import PiecewiseConstantSignal, PiecewiseLinearFunction
from tautline.errors import InfeasibleTubeError, ParameterError
from tautline.solvers.oracles import (
    ARC_LENGTH,
    COSH,
    QUADRATIC,
    QUARTIC,
    GridProblem,
    convex_energy_solve,
    dual_energy,
    duality_gap,
    projected_coordinate_descent,
    qp_tube_derivative,
    qp_tube_solve,
    rof_energy,
)
from tautline.solvers.taut_string import rof_denoise


def test_qp_matches_the_sign_example(sign_signal):
    W = qp_tube_solve(sign_signal, 0.5, subdivisions=8, tol_qp=1e-10)
    assert W(0.0) == pytest.approx(-0.5, abs=1e-8)
    taut = rof_denoise(sign_signal, 0.5).W
    assert np.max(np.abs(W.node_values - taut(W.nodes))) <= 1e-8


def test_qp_matches_figure1(figure1_signal):
    W = qp_tube_solve(figure1_signal, 0.5)
    knots = np.array([0.0, 1.0, 3.0, 4.0])
    assert np.allclose(W(knots), [0.0, 1.0, 0.5, 1.0], atol=1e-6)


def test_constant_signal_gives_the_chord():
    f = PiecewiseConstantSignal.constant(2.0, 0, 1)
    W = qp_tube_solve(f, 0.3)
    assert np.allclose(W.node_values, 2.0 * W.nodes)


def test_qp_derivative_of_sign(sign_signal):
    u = qp_tube_derivative(sign_signal, 0.5)
    assert np.allclose(u(np.array([-0.5, 0.5])), [-0.5, 0.5], atol=1e-8)


def test_qp_derivative_above_threshold_is_the_mean(figure1_signal):
    u = qp_tube_derivative(figure1_signal, 2.0)
    assert np.allclose(u(np.array([0.5, 1.5, 2.5, 3.5])), 0.25, atol=1e-8)


@seed(17)
@settings(max_examples=25, deadline=None)
@given(f=signals(max_pieces=20), fraction=lambda_fractions())
def test_qp_oracle_agrees_with_taut_string(f, fraction):
    g = gnorm(f)
    lam = fraction * g if g > 0 else fraction
    assert l2_norm(qp_tube_derivative(f, lam) - rof_denoise(f, lam).u) <= 1e-6


@pytest.mark.parametrize("energy", [ARC_LENGTH, COSH, QUARTIC])
def test_other_convex_energies_give_the_taut_string(figure1_signal, energy):
    taut = rof_denoise(figure1_signal, 0.5).W
    W = convex_energy_solve(figure1_signal, 0.5, energy)
    assert np.max(np.abs(W.node_values - taut(W.nodes))) <= 1e-4


def test_cosh_from_the_chord_on_the_sign_tube(sign_signal):
    taut = rof_denoise(sign_signal, 0.5).W
    W = convex_energy_solve(sign_signal, 0.5, COSH, initial="chord")
    assert np.max(np.abs(W.node_values - taut(W.nodes))) <= 1e-4


def test_quadratic_energy_reproduces_the_qp(figure1_signal):
    W_qp = qp_tube_solve(figure1_signal, 0.5)
    W_h = convex_energy_solve(figure1_signal, 0.5, QUADRATIC)
    assert np.allclose(W_h.node_values, W_qp.node_values, atol=1e-9)


def test_plain_derivative_callable_is_accepted(figure1_signal):
    taut = rof_denoise(figure1_signal, 0.5).W
    W = convex_energy_solve(figure1_signal, 0.5, lambda s: s / np.sqrt(1.0 + s * s))
    assert np.max(np.abs(W.node_values - taut(W.nodes))) <= 1e-4


def test_decreasing_derivative_is_rejected(figure1_signal):
    with pytest.raises(ParameterError):
        convex_energy_solve(figure1_signal, 0.5, lambda s: -s, initial="chord")


def test_unknown_initial_iterate(figure1_signal):
    with pytest.raises(ParameterError):
        convex_energy_solve(figure1_signal, 0.5, initial="zero")


def test_empty_box_is_infeasible():
    with pytest.raises(InfeasibleTubeError):
        GridProblem(np.array([0.0, 1.0, 2.0]), np.array([1.0]), np.array([0.0]), 0.0, 0.0)


def test_coordinate_descent_converges_from_the_chord(figure1_signal):
    problem = GridProblem.for_signal(figure1_signal, 0.5, subdivisions=2)
    W = projected_coordinate_descent(problem, problem.chord(), tol_qp=1e-12)
    taut = rof_denoise(figure1_signal, 0.5).W
    assert np.max(np.abs(W - taut(problem.nodes))) <= 1e-9


def test_energies_of_the_sign_example(sign_signal):
    result = rof_denoise(sign_signal, 0.5)
    assert rof_energy(sign_signal, result.u, 0.5) == pytest.approx(0.75)
    assert dual_energy(sign_signal, result.xi, 0.5) == pytest.approx(0.75)
    assert abs(duality_gap(sign_signal, result.u, result.xi, 0.5)) <= 1e-12


def test_energy_of_the_signal_itself(figure1_signal):
    assert rof_energy(figure1_signal, figure1_signal, 0.5) == pytest.approx(0.5 * 4.5)


@seed(23)
@settings(max_examples=40, deadline=None)
@given(f=signals(), fraction=lambda_fractions())
def test_weak_and_strong_duality(f, fraction):
    g = gnorm(f)
    lam = fraction * g if g > 0 else fraction
    result = rof_denoise(f, lam)
    # any feasible pair: the signal itself against the zero certificate
    zero = PiecewiseLinearFunction.linear(f.breakpoints[0], f.breakpoints[-1], 0.0, 0.0)
    assert rof_energy(f, f, lam) >= dual_energy(f, zero, lam) - 1e-12
    assert rof_energy(f, result.u, lam) >= dual_energy(f, result.xi, lam) - 1e-8 * max(1.0, result.energy)
    assert abs(duality_gap(f, result.u, result.xi, lam)) <= 1e-8
