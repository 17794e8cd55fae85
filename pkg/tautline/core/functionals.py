"""Norms, inner products and variation functionals, evaluated in closed form."""

import numpy as np

from tautline.core.signals import (
    PiecewiseConstantSignal,
    PiecewiseLinearFunction,
    _check_same_interval,
    common_grid,
)


def total_variation(u: PiecewiseConstantSignal) -> float:
    """J(u): the sum of the absolute interior jumps of ``u``."""
    return float(np.sum(np.abs(np.diff(u.values))))


def l2_norm(u: PiecewiseConstantSignal) -> float:
    return float(np.sqrt(np.dot(u.values * u.values, u.lengths)))


def l2_inner(u: PiecewiseConstantSignal, v: PiecewiseConstantSignal) -> float:
    _check_same_interval(u.interval, v.interval)
    grid = common_grid(u.breakpoints, v.breakpoints)
    return float(np.sum(u.values_on(grid) * v.values_on(grid) * np.diff(grid)))


def l2_distance(u: PiecewiseConstantSignal, v: PiecewiseConstantSignal) -> float:
    return l2_norm(u - v)


def linf_norm(u: PiecewiseConstantSignal) -> float:
    return float(np.max(np.abs(u.values)))


def linf_norm_pl(W: PiecewiseLinearFunction) -> float:
    """Max norm of a piecewise-linear function; attained at a node."""
    return float(np.max(np.abs(W.node_values)))


def pairing_with_certificate(u: PiecewiseConstantSignal, xi: PiecewiseLinearFunction) -> float:
    """Exact value of the integral of u * xi' over the interval."""
    _check_same_interval(u.interval, xi.interval)
    grid = common_grid(u.breakpoints, xi.nodes)
    return float(np.sum(u.values_on(grid) * np.diff(xi(grid))))


def dirichlet_energy(W: PiecewiseLinearFunction) -> float:
    """The stretched-string energy: half the integral of W'^2."""
    steps = np.diff(W.nodes)
    rises = np.diff(W.node_values)
    return float(0.5 * np.sum(rises * rises / steps))


def arc_length(W: PiecewiseLinearFunction) -> float:
    """Length of the graph of ``W``."""
    return float(np.sum(np.hypot(np.diff(W.nodes), np.diff(W.node_values))))
