"""The taut string: exact tube solver and ROF denoising with its dual certificate.

``solve_tube`` pulls a string taut between two piecewise-linear obstacles.
Both obstacles are linear between consecutive nodes of their common grid, so
the string is a polyline whose knots sit on obstacle nodes, and the problem is
a shortest path through the vertical gates ``[lower(x_i), upper(x_i)]``. It is
solved with a single forward funnel sweep:

* the upper chain is the greatest convex minorant of the upper gate ends seen
  from the apex, the lower chain the least concave majorant of the lower ends;
* a new upper end that dips below the lower chain (or a lower end that rises
  above the upper chain) forces contact points, which are emitted as knots
  while the apex walks along the opposite chain.

Every gate end is pushed and popped at most once, so the sweep is linear.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numba import njit

from tautline.config import resolve_tolerance
from tautline.core.functionals import (
    arc_length,
    l2_norm,
    linf_norm_pl,
    pairing_with_certificate,
    total_variation,
)
from tautline.core.signals import (
    Interval,
    PiecewiseConstantSignal,
    PiecewiseLinearFunction,
    _check_same_interval,
    common_grid,
    cumulative,
    derivative,
    mean_zero_split,
)
from tautline.core.verdicts import Verdict
from tautline.errors import InfeasibleTubeError, ParameterError

logger = logging.getLogger(__name__)

ContactSet = List[Tuple[float, float]]


def check_lambda(lam: float, name: str = "lambda") -> float:
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0:
        raise ParameterError(f"{name} must be a positive finite number, got {lam!r}")
    return lam


class Tube:
    """The feasible set for the string: ``lower <= W <= upper`` with pinned ends.

    Either obstacle may be ``None`` (absent), which gives the one-sided tubes
    used for isotonic regression.
    """

    def __init__(
        self,
        lower: Optional[PiecewiseLinearFunction],
        upper: Optional[PiecewiseLinearFunction],
        start_value: float,
        end_value: float,
    ):
        if lower is None and upper is None:
            raise ParameterError("a tube needs at least one obstacle")
        if lower is not None and upper is not None:
            _check_same_interval(lower.interval, upper.interval)
        for name, value in (("start value", start_value), ("end value", end_value)):
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        self.lower = lower
        self.upper = upper
        self.start_value = float(start_value)
        self.end_value = float(end_value)

    @classmethod
    def around(cls, F: PiecewiseLinearFunction, lam: float) -> "Tube":
        """The tube of half-width ``lam`` around ``F``, pinned at F(a) and F(b)."""
        lam = check_lambda(lam)
        return cls(F - lam, F + lam, F.start, F.end)

    @classmethod
    def below(cls, F: PiecewiseLinearFunction) -> "Tube":
        """Everything under ``F``, pinned at F(a) and F(b)."""
        return cls(None, F, F.start, F.end)

    @property
    def interval(self) -> Interval:
        return (self.lower if self.lower is not None else self.upper).interval

    def grid(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Common node grid with lower and upper values on it (+-inf if absent)."""
        if self.lower is None:
            x = self.upper.nodes
        elif self.upper is None:
            x = self.lower.nodes
        else:
            x = common_grid(self.lower.nodes, self.upper.nodes)
        lo = self.lower(x) if self.lower is not None else np.full(x.size, -np.inf)
        hi = self.upper(x) if self.upper is not None else np.full(x.size, np.inf)
        return x, lo, hi

    def scale(self) -> float:
        _, lo, hi = self.grid()
        finite = np.concatenate((lo[np.isfinite(lo)], hi[np.isfinite(hi)]))
        return max(1.0, float(np.max(np.abs(finite))), abs(self.start_value), abs(self.end_value))

    def check_feasibility(self, tol: Optional[float] = None) -> None:
        """Raises ``InfeasibleTubeError`` naming the first violating node."""
        slack = resolve_tolerance(tol) * self.scale()
        x, lo, hi = self.grid()
        crossed = lo > hi + slack
        if np.any(crossed):
            i = int(np.argmax(crossed))
            raise InfeasibleTubeError(float(x[i]), f"lower {lo[i]!r} > upper {hi[i]!r}")
        for i, value, label in ((0, self.start_value, "start"), (-1, self.end_value, "end")):
            if not lo[i] - slack <= value <= hi[i] + slack:
                raise InfeasibleTubeError(
                    float(x[i]), f"pinned {label} value {value!r} outside [{lo[i]!r}, {hi[i]!r}]"
                )


@njit(cache=True)
def _pull_taut(xs, lows, highs, has_lower, has_upper, start, end):
    """Funnel sweep through the gates; returns the knots of the taut string.

    The chains live in preallocated arrays, each a window ``[head, tail)``:
    gate ends are appended at the tail, the apex consumes from the head.
    """
    n = xs.shape[0]
    last = n - 1
    knot_x = np.empty(2 * n + 1)
    knot_y = np.empty(2 * n + 1)
    knot_x[0] = xs[0]
    knot_y[0] = start
    knots = 1
    ax = xs[0]
    ay = start
    upper_x = np.empty(n)
    upper_y = np.empty(n)
    lower_x = np.empty(n)
    lower_y = np.empty(n)
    upper_head = upper_tail = 0
    lower_head = lower_tail = 0

    for i in range(1, n):
        x = xs[i]
        if i == last:
            hy = end
            ly = end
            upper_gate = True
            lower_gate = True
        else:
            hy = highs[i]
            ly = lows[i]
            upper_gate = has_upper
            lower_gate = has_lower

        if upper_gate:
            while upper_tail > upper_head:
                qx = upper_x[upper_tail - 1]
                qy = upper_y[upper_tail - 1]
                if upper_tail - upper_head > 1:
                    px = upper_x[upper_tail - 2]
                    py = upper_y[upper_tail - 2]
                else:
                    px = ax
                    py = ay
                if (qy - py) / (qx - px) >= (hy - qy) / (x - qx):
                    upper_tail -= 1
                else:
                    break
            if upper_tail == upper_head:
                while lower_tail > lower_head:
                    lx = lower_x[lower_head]
                    lyy = lower_y[lower_head]
                    if (hy - ay) / (x - ax) < (lyy - ay) / (lx - ax):
                        ax = lx
                        ay = lyy
                        lower_head += 1
                        knot_x[knots] = ax
                        knot_y[knots] = ay
                        knots += 1
                    else:
                        break
            upper_x[upper_tail] = x
            upper_y[upper_tail] = hy
            upper_tail += 1

        if lower_gate:
            while lower_tail > lower_head:
                qx = lower_x[lower_tail - 1]
                qy = lower_y[lower_tail - 1]
                if lower_tail - lower_head > 1:
                    px = lower_x[lower_tail - 2]
                    py = lower_y[lower_tail - 2]
                else:
                    px = ax
                    py = ay
                if (qy - py) / (qx - px) <= (ly - qy) / (x - qx):
                    lower_tail -= 1
                else:
                    break
            if lower_tail == lower_head:
                while upper_tail > upper_head:
                    ux = upper_x[upper_head]
                    uy = upper_y[upper_head]
                    if (ly - ay) / (x - ax) > (uy - ay) / (ux - ax):
                        ax = ux
                        ay = uy
                        upper_head += 1
                        knot_x[knots] = ax
                        knot_y[knots] = ay
                        knots += 1
                    else:
                        break
            lower_x[lower_tail] = x
            lower_y[lower_tail] = ly
            lower_tail += 1

    for j in range(lower_head, lower_tail):
        if lower_x[j] > knot_x[knots - 1]:
            knot_x[knots] = lower_x[j]
            knot_y[knots] = lower_y[j]
            knots += 1
    return knot_x[:knots].copy(), knot_y[:knots].copy()


def solve_tube(tube: Tube, tol: Optional[float] = None) -> PiecewiseLinearFunction:
    """Returns the minimizer of the string energy over the tube.

    Raises:
        InfeasibleTubeError: if the obstacles cross or a pinned value lies
            outside them (beyond ``tol`` times the tube scale).
    """
    tube.check_feasibility(tol)
    x, lo, hi = tube.grid()
    # tolerated crossings are squeezed shut so every gate stays non-empty
    if tube.lower is not None and tube.upper is not None:
        lo = np.minimum(lo, hi)
    knot_x, knot_y = _pull_taut(
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(lo, dtype=np.float64),
        np.ascontiguousarray(hi, dtype=np.float64),
        tube.lower is not None,
        tube.upper is not None,
        tube.start_value,
        tube.end_value,
    )
    logger.debug(f"taut string through {x.size} gates has {knot_x.size} knots")
    return PiecewiseLinearFunction(knot_x, knot_y)


def contact_sets(
    W: PiecewiseLinearFunction, obstacle: PiecewiseLinearFunction, slack: float
) -> ContactSet:
    """Maximal closed intervals of the common grid where ``|W - obstacle| <= slack``.

    Isolated contact points are reported as degenerate intervals ``(x, x)``.
    """
    grid = common_grid(W.nodes, obstacle.nodes)
    touching = np.abs(W(grid) - obstacle(grid)) <= slack
    edges = np.flatnonzero(np.diff(np.concatenate(([0], touching.astype(np.int8), [0]))))
    starts, stops = edges[::2], edges[1::2] - 1
    return list(zip(grid[starts].tolist(), grid[stops].tolist()))


@dataclass(frozen=True)
class DenoiseResult:
    """The ROF solution for one lambda with its taut string and dual certificate.

    ``W == F - lam * xi`` identically, ``u`` is the derivative of ``W`` and
    ``J_u`` equals the pairing of ``u`` with ``xi'``.
    """

    lam: float
    f: PiecewiseConstantSignal
    F: PiecewiseLinearFunction
    u: PiecewiseConstantSignal
    W: PiecewiseLinearFunction
    xi: PiecewiseLinearFunction
    J_u: float
    energy: float
    contact_upper: ContactSet
    contact_lower: ContactSet

    @property
    def fidelity(self) -> float:
        """Squared L2 distance between the in-signal and the denoised signal."""
        return l2_norm(self.f - self.u) ** 2

    @property
    def string_length(self) -> float:
        return arc_length(self.W)

    @property
    def tube(self) -> Tube:
        return Tube.around(self.F, self.lam)


def rof_denoise(
    f: PiecewiseConstantSignal, lam: float, tol: Optional[float] = None
) -> DenoiseResult:
    """Denoises ``f`` with the taut string algorithm.

    Args:
        f: The in-signal.
        lam: Regularization weight, must be positive.
        tol: Absolute tolerance for the threshold and contact tests, scaled
            by ``max(1, ||F||_inf)``. Defaults to the configured tolerance.

    Returns:
        A ``DenoiseResult`` holding u_lambda, W_lambda and xi_lambda.
    """
    lam = check_lambda(lam)
    tol = resolve_tolerance(tol)
    F = cumulative(f)
    slack = tol * max(1.0, linf_norm_pl(F))
    a, b = F.nodes[0], F.nodes[-1]

    f0, mean = mean_zero_split(f)
    threshold = linf_norm_pl(cumulative(f0))
    if lam >= threshold - slack:
        # the chord is feasible: the denoised signal is the constant mean
        W = PiecewiseLinearFunction([a, b], [F.start, F.end])
        u = PiecewiseConstantSignal([a, b], [mean])
    else:
        W = solve_tube(Tube.around(F, lam), tol)
        u = derivative(W)

    xi = (F - W) / lam
    J_u = total_variation(u)
    energy = lam * J_u + 0.5 * l2_norm(f - u) ** 2
    logger.debug(f"rof_denoise(lam={lam}): {f.size} -> {u.size} pieces, energy={energy}")
    return DenoiseResult(
        lam=lam,
        f=f,
        F=F,
        u=u,
        W=W,
        xi=xi,
        J_u=J_u,
        energy=energy,
        contact_upper=contact_sets(W, F + lam, slack),
        contact_lower=contact_sets(W, F - lam, slack),
    )


def verify_certificate(
    f: PiecewiseConstantSignal,
    lam: float,
    u: PiecewiseConstantSignal,
    xi: PiecewiseLinearFunction,
    tol: Optional[float] = None,
) -> Verdict:
    """Checks that (u, xi) certify u as the ROF minimizer for (f, lam).

    The three conditions are: (i) u = f - lam * xi' everywhere, (ii) xi
    vanishes at both ends and ``||xi||_inf <= 1 + tol``, and (iii)
    ``J(u) = <u, xi'>`` within ``tol * (1 + J(u))``. Together they are
    sufficient for optimality; no reference solution is needed. Tolerances
    on xi are scaled by ``max(1, ||F||_inf / lam)``.
    """
    lam = check_lambda(lam)
    tol = resolve_tolerance(tol)
    _check_same_interval(f.interval, u.interval)
    _check_same_interval(f.interval, xi.interval)

    violations = []
    scale = max(1.0, float(np.max(np.abs(f.values))), float(np.max(np.abs(u.values))))
    # xi = (F - W)/lam carries the rounding of F magnified by 1/lam
    precision = max(1.0, linf_norm_pl(cumulative(f)) / lam)

    gap = u - (f - lam * derivative(xi))
    residual_i = float(np.max(np.abs(gap.values)))
    if residual_i > tol * scale:
        violations.append(f"(i) u != f - lam*xi' (max deviation {residual_i:.3e})")

    end_values = max(abs(xi.start), abs(xi.end))
    sup = linf_norm_pl(xi)
    if end_values > tol * precision:
        violations.append(f"(ii) xi does not vanish at the ends ({end_values:.3e})")
    if sup > 1.0 + tol * precision:
        violations.append(f"(ii) ||xi||_inf = {sup!r} > 1")

    J_u = total_variation(u)
    pairing = pairing_with_certificate(u, xi)
    residual_iii = abs(J_u - pairing)
    if residual_iii > tol * (1.0 + J_u) * precision:
        violations.append(f"(iii) J(u) = {J_u!r} but <u, xi'> = {pairing!r}")

    return Verdict(
        name="certificate",
        ok=not violations,
        residual=max(residual_i, residual_iii, max(0.0, sup - 1.0), end_values),
        violations=tuple(violations),
        details={"lambda": lam, "J_u": J_u, "pairing": pairing, "xi_sup": sup},
    )
