"""Slow, independent solvers used to cross-check the taut string.

The tube problem is discretized on a refinement of the signal grid and
solved as a box-constrained program over the node values. The defining
iteration is projected coordinate descent: each interior node is moved to the
exact minimizer of the energy along its coordinate, clipped to its box. Nodes
are visited in red-black order (odd, then even), so each half-sweep is a set
of independent 1D projections that numpy applies at once.

For the quadratic energy a primal-dual active-set pass supplies the starting
iterate; the coordinate sweeps then run until the largest node update is at
most ``tol_qp``, so the returned vector is always a fixed point of the
projection sweep, which is the optimality condition of the box program.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from tautline.core.functionals import l2_norm, total_variation
from tautline.core.signals import (
    PiecewiseConstantSignal,
    PiecewiseLinearFunction,
    _check_same_interval,
    cumulative,
    derivative,
)
from tautline.errors import ConvergenceError, InfeasibleTubeError, ParameterError
from tautline.solvers.taut_string import check_lambda

logger = logging.getLogger(__name__)

DEFAULT_SUBDIVISIONS = 4
DEFAULT_TOL_QP = 1e-10
DEFAULT_MAX_SWEEPS = 10**6
ACTIVE_SET_MAX_ITER = 500
BISECTION_MAX_ITER = 200

SlopeMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ConvexEnergy:
    """A strictly convex C1 integrand H with its increasing derivative h = H'."""

    name: str
    H: SlopeMap
    h: SlopeMap


QUADRATIC = ConvexEnergy("quadratic", lambda s: 0.5 * s * s, lambda s: s)
ARC_LENGTH = ConvexEnergy("arc_length", lambda s: np.sqrt(1.0 + s * s), lambda s: s / np.sqrt(1.0 + s * s))
COSH = ConvexEnergy("cosh", np.cosh, np.sinh)
QUARTIC = ConvexEnergy("quartic", lambda s: s**4 / 4.0 + s * s / 2.0, lambda s: s**3 + s)


class GridProblem:
    """The discrete tube: node grid, per-node boxes and pinned end values.

    ``lower_box`` and ``upper_box`` cover the interior nodes only; either may
    hold infinities for a one-sided problem.
    """

    def __init__(
        self,
        nodes: np.ndarray,
        lower_box: np.ndarray,
        upper_box: np.ndarray,
        pinned_start: float,
        pinned_end: float,
        energy: ConvexEnergy = QUADRATIC,
    ):
        nodes = np.asarray(nodes, dtype=float)
        lower_box = np.asarray(lower_box, dtype=float)
        upper_box = np.asarray(upper_box, dtype=float)
        if nodes.size < 2 or np.any(np.diff(nodes) <= 0):
            raise ParameterError("grid nodes must be strictly increasing")
        if lower_box.size != nodes.size - 2 or upper_box.size != nodes.size - 2:
            raise ParameterError("boxes must cover exactly the interior nodes")
        crossed = lower_box > upper_box
        if np.any(crossed):
            i = int(np.argmax(crossed))
            raise InfeasibleTubeError(
                float(nodes[i + 1]), f"box [{lower_box[i]!r}, {upper_box[i]!r}] is empty"
            )
        self.nodes = nodes
        self.lower_box = lower_box
        self.upper_box = upper_box
        self.pinned_start = float(pinned_start)
        self.pinned_end = float(pinned_end)
        self.energy = energy

    @property
    def grid_step(self) -> np.ndarray:
        return np.diff(self.nodes)

    @classmethod
    def for_signal(
        cls,
        f: PiecewiseConstantSignal,
        lam: float,
        subdivisions: int = DEFAULT_SUBDIVISIONS,
        energy: ConvexEnergy = QUADRATIC,
    ) -> "GridProblem":
        """Splits each interval of ``f`` into ``subdivisions`` cells, boxes F(x) +- lam."""
        lam = check_lambda(lam)
        if int(subdivisions) != subdivisions or subdivisions < 1:
            raise ParameterError(f"subdivisions must be a positive integer, got {subdivisions!r}")
        subdivisions = int(subdivisions)
        bp = f.breakpoints
        fractions = np.arange(subdivisions) / subdivisions
        nodes = np.append((bp[:-1, None] + np.diff(bp)[:, None] * fractions).ravel(), bp[-1])
        F = cumulative(f)
        centre = F(nodes)
        return cls(nodes, centre[1:-1] - lam, centre[1:-1] + lam, F.start, F.end, energy)

    def full_boxes(self):
        lo = np.concatenate(([self.pinned_start], self.lower_box, [self.pinned_end]))
        hi = np.concatenate(([self.pinned_start], self.upper_box, [self.pinned_end]))
        return lo, hi

    def objective(self, W: np.ndarray) -> float:
        steps = self.grid_step
        return float(np.sum(self.energy.H(np.diff(W) / steps) * steps))

    def chord(self) -> np.ndarray:
        W = np.interp(self.nodes, self.nodes[[0, -1]], [self.pinned_start, self.pinned_end])
        lo, hi = self.full_boxes()
        return np.clip(W, lo, hi)


def _active_set_start(problem: GridProblem, max_iter: int = ACTIVE_SET_MAX_ITER) -> np.ndarray:
    """Primal-dual active-set iteration for the quadratic box program.

    With the active nodes fixed at their bounds, the free nodes solve a
    discrete Laplace equation, i.e. they interpolate linearly between the
    nearest fixed nodes.
    """
    x = problem.nodes
    lo, hi = problem.full_boxes()
    c = 1.0 / float(np.min(problem.grid_step))
    W = problem.chord()
    mu = np.zeros_like(W)
    active_upper = np.zeros(W.size, dtype=bool)
    active_lower = np.zeros(W.size, dtype=bool)

    for iteration in range(max_iter):
        new_upper = mu + c * (W - hi) > 0
        new_lower = (mu + c * (W - lo) < 0) & ~new_upper
        new_upper[[0, -1]] = False
        new_lower[[0, -1]] = False
        if iteration > 0 and np.array_equal(new_upper, active_upper) and np.array_equal(
            new_lower, active_lower
        ):
            logger.debug(f"active set settled after {iteration} iterations")
            return W
        active_upper, active_lower = new_upper, new_lower

        fixed = active_upper | active_lower
        fixed[[0, -1]] = True
        targets = np.where(active_upper, hi, np.where(active_lower, lo, W))
        targets[0], targets[-1] = problem.pinned_start, problem.pinned_end
        W = np.interp(x, x[fixed], targets[fixed])

        slopes = np.diff(W) / problem.grid_step
        gradient = np.zeros_like(W)
        gradient[1:-1] = slopes[:-1] - slopes[1:]
        mu = np.where(fixed, -gradient, 0.0)
        mu[[0, -1]] = 0.0

    logger.warning(f"active-set start did not settle in {max_iter} iterations; continuing with sweeps")
    return np.clip(W, lo, hi)


def _coordinate_minimizers(
    problem: GridProblem, W: np.ndarray, idx: np.ndarray, tol: float
) -> np.ndarray:
    """Exact unconstrained minimizers along the coordinates ``idx``."""
    left, right = W[idx - 1], W[idx + 1]
    dl = problem.nodes[idx] - problem.nodes[idx - 1]
    dr = problem.nodes[idx + 1] - problem.nodes[idx]
    if problem.energy is QUADRATIC:
        return (dr * left + dl * right) / (dl + dr)

    h = problem.energy.h

    def stationarity(w):
        return h((w - left) / dl) - h((right - w) / dr)

    # for increasing h the root lies between the neighbour values
    lo_end = np.minimum(left, right)
    hi_end = np.maximum(left, right)
    with np.errstate(over="ignore", invalid="ignore"):
        phi_lo, phi_hi = stationarity(lo_end), stationarity(hi_end)
        if np.any(phi_lo > 0) or np.any(phi_hi < 0):
            raise ParameterError(f"h' of energy {problem.energy.name!r} is not increasing")
        for _ in range(BISECTION_MAX_ITER):
            if np.all(hi_end - lo_end <= tol):
                break
            mid = 0.5 * (lo_end + hi_end)
            phi_mid = stationarity(mid)
            if np.any(phi_mid < phi_lo) or np.any(phi_mid > phi_hi):
                raise ParameterError(f"h' of energy {problem.energy.name!r} is not increasing")
            below = phi_mid < 0
            lo_end = np.where(below, mid, lo_end)
            phi_lo = np.where(below, phi_mid, phi_lo)
            hi_end = np.where(below, hi_end, mid)
            phi_hi = np.where(below, phi_hi, phi_mid)
    return 0.5 * (lo_end + hi_end)


def projected_coordinate_descent(
    problem: GridProblem,
    W: np.ndarray,
    tol_qp: float = DEFAULT_TOL_QP,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    track_objective: bool = True,
) -> np.ndarray:
    """Red-black projected coordinate sweeps until the largest update is <= ``tol_qp``.

    With ``track_objective`` the energy must not increase from one sweep to
    the next.

    Raises:
        ConvergenceError: if the objective increases during a sweep or the
            sweep cap is reached.
    """
    if tol_qp <= 0:
        raise ParameterError(f"tol_qp must be positive, got {tol_qp!r}")
    W = np.array(W, dtype=float)
    if W.size <= 2:
        return W
    interior_lo, interior_hi = problem.lower_box, problem.upper_box
    odd = np.arange(1, W.size - 1, 2)
    even = np.arange(2, W.size - 1, 2)
    bisection_tol = tol_qp / 10.0
    objective = problem.objective(W)

    for sweep in range(1, max_sweeps + 1):
        largest = 0.0
        for idx in (odd, even):
            if idx.size == 0:
                continue
            target = _coordinate_minimizers(problem, W, idx, bisection_tol)
            target = np.clip(target, interior_lo[idx - 1], interior_hi[idx - 1])
            largest = max(largest, float(np.max(np.abs(target - W[idx]))))
            W[idx] = target

        new_objective = problem.objective(W) if track_objective else objective
        if new_objective > objective + 1e-12 * max(1.0, abs(objective)):
            raise ConvergenceError(
                f"objective rose from {objective!r} to {new_objective!r} in sweep {sweep}"
            )
        objective = new_objective
        if largest <= tol_qp:
            logger.debug(f"{problem.energy.name} coordinate descent converged in {sweep} sweeps")
            return W

    raise ConvergenceError(f"no convergence to {tol_qp} within {max_sweeps} sweeps")


def qp_tube_solve(
    f: PiecewiseConstantSignal,
    lam: float,
    subdivisions: int = DEFAULT_SUBDIVISIONS,
    tol_qp: float = DEFAULT_TOL_QP,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> PiecewiseLinearFunction:
    """Solves the discretized tube problem for ``f`` and ``lam`` as a box QP."""
    problem = GridProblem.for_signal(f, lam, subdivisions)
    W = _active_set_start(problem)
    W = projected_coordinate_descent(problem, W, tol_qp, max_sweeps)
    return PiecewiseLinearFunction(problem.nodes, W)


def qp_tube_derivative(
    f: PiecewiseConstantSignal,
    lam: float,
    subdivisions: int = DEFAULT_SUBDIVISIONS,
    tol_qp: float = DEFAULT_TOL_QP,
) -> PiecewiseConstantSignal:
    """The oracle's denoised signal, averaged back onto the grid of ``f``.

    The cell slopes inside one interval of ``f`` average (by length) to the
    chord slope between its breakpoints.
    """
    W = qp_tube_solve(f, lam, subdivisions, tol_qp)
    return derivative(PiecewiseLinearFunction(f.breakpoints, W(f.breakpoints)))


def convex_energy_solve(
    f: PiecewiseConstantSignal,
    lam: float,
    energy: Union[ConvexEnergy, SlopeMap] = ARC_LENGTH,
    subdivisions: int = DEFAULT_SUBDIVISIONS,
    tol_qp: float = DEFAULT_TOL_QP,
    initial: str = "quadratic",
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> PiecewiseLinearFunction:
    """Minimizes the sum of H(W') over the same discrete tube.

    Args:
        energy: A ``ConvexEnergy``, or just the derivative h = H' (then H
            is unknown and the per-sweep objective check is skipped).
        initial: ``"quadratic"`` starts from ``qp_tube_solve`` on the same
            grid, ``"chord"`` from the straight chord clipped to the boxes.

    Raises:
        ParameterError: if h turns out not to be increasing.
    """
    if not isinstance(energy, ConvexEnergy):
        h = energy
        energy = ConvexEnergy(getattr(h, "__name__", "custom"), lambda s: 0.5 * s * s, h)
        track = False
    else:
        track = True

    problem = GridProblem.for_signal(f, lam, subdivisions, energy)
    if initial == "quadratic":
        start = qp_tube_solve(f, lam, subdivisions, tol_qp).node_values
    elif initial == "chord":
        start = problem.chord()
    else:
        raise ParameterError(f"unknown initial iterate {initial!r}")

    W = projected_coordinate_descent(problem, start, tol_qp, max_sweeps, track_objective=track)
    return PiecewiseLinearFunction(problem.nodes, W)


def rof_energy(f: PiecewiseConstantSignal, u: PiecewiseConstantSignal, lam: float) -> float:
    """lam * J(u) + 0.5 * ||f - u||^2."""
    _check_same_interval(f.interval, u.interval)
    return lam * total_variation(u) + 0.5 * l2_norm(f - u) ** 2


def dual_energy(f: PiecewiseConstantSignal, xi: PiecewiseLinearFunction, lam: float) -> float:
    """0.5 * (||f||^2 - ||f - lam * xi'||^2) for a test function xi pinned to 0."""
    _check_same_interval(f.interval, xi.interval)
    return 0.5 * (l2_norm(f) ** 2 - l2_norm(f - lam * derivative(xi)) ** 2)


def duality_gap(
    f: PiecewiseConstantSignal,
    u: PiecewiseConstantSignal,
    xi: PiecewiseLinearFunction,
    lam: float,
    relative: bool = True,
) -> float:
    """Primal minus dual energy; relative to ``max(1, |primal|)`` by default."""
    primal = rof_energy(f, u, lam)
    gap = primal - dual_energy(f, xi, lam)
    return gap / max(1.0, abs(primal)) if relative else gap
