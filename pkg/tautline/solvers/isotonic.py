"""Isotonic regression through the lower convex envelope of the cumulative signal.

The best non-decreasing approximation of ``f`` is the derivative of the
string pulled taut *under* F alone (no lower obstacle, ends pinned), and that
string is the lower convex envelope of F. ``pava_oracle`` reaches the same
answer independently with pool-adjacent-violators.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from tautline.config import resolve_tolerance
from tautline.core.functionals import l2_norm
from tautline.core.signals import (
    PiecewiseConstantSignal,
    PiecewiseLinearFunction,
    cumulative,
    derivative,
)
from tautline.core.verdicts import Verdict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IsotonicResult:
    """Non-decreasing fit ``u = W'`` with its convex string ``W <= F``.

    ``xi = F - W`` is the non-negative test function certifying the fit; it
    vanishes wherever u jumps.
    """

    f: PiecewiseConstantSignal
    F: PiecewiseLinearFunction
    u: PiecewiseConstantSignal
    W: PiecewiseLinearFunction
    xi: PiecewiseLinearFunction
    residual: float
    contact_points: List[float]


def lower_convex_envelope(F: PiecewiseLinearFunction) -> PiecewiseLinearFunction:
    """The largest convex function below ``F`` (monotone-chain hull of its nodes).

    Collinear nodes are dropped, so consecutive slopes strictly increase.
    """
    hull_x: List[float] = []
    hull_y: List[float] = []
    for x, y in zip(F.nodes.tolist(), F.node_values.tolist()):
        while len(hull_x) >= 2:
            ox, oy = hull_x[-2], hull_y[-2]
            px, py = hull_x[-1], hull_y[-1]
            if (px - ox) * (y - oy) - (py - oy) * (x - ox) <= 0:
                hull_x.pop()
                hull_y.pop()
            else:
                break
        hull_x.append(x)
        hull_y.append(y)
    return PiecewiseLinearFunction(hull_x, hull_y)


def isotonic_fit(f: PiecewiseConstantSignal, tol: Optional[float] = None) -> IsotonicResult:
    """Least-squares non-decreasing fit of ``f``."""
    tol = resolve_tolerance(tol)
    F = cumulative(f)
    W = lower_convex_envelope(F)
    u = derivative(W)
    xi = F - W
    slack = tol * max(1.0, float(np.max(np.abs(F.node_values))))
    contacts = xi.nodes[xi.node_values <= slack].tolist()
    logger.debug(f"isotonic fit pooled {f.size} pieces into {u.size}")
    return IsotonicResult(
        f=f,
        F=F,
        u=u,
        W=W,
        xi=xi,
        residual=0.5 * l2_norm(u - f) ** 2,
        contact_points=contacts,
    )


class _Block:
    """A pool of consecutive intervals with its length-weighted sum."""

    __slots__ = ("start", "end", "weighted_sum", "weight")

    def __init__(self, index: int, value: float, weight: float):
        self.start = index
        self.end = index + 1
        self.weighted_sum = value * weight
        self.weight = weight

    def merge_with_next_block(self, right: "_Block") -> None:
        assert self.end == right.start
        self.weighted_sum += right.weighted_sum
        self.weight += right.weight
        self.end = right.end

    def value(self) -> float:
        return self.weighted_sum / self.weight


def _pool_adjacent_violators(values: Sequence[float], weights: Sequence[float]) -> np.ndarray:
    blocks = [_Block(0, values[0], weights[0])]
    for index in range(1, len(values)):
        cur_block = _Block(index, values[index], weights[index])
        while blocks and blocks[-1].value() > cur_block.value():
            prev_block = blocks.pop()
            prev_block.merge_with_next_block(cur_block)
            cur_block = prev_block
        blocks.append(cur_block)

    return np.repeat([b.value() for b in blocks], [b.end - b.start for b in blocks])


def pava_oracle(f: PiecewiseConstantSignal) -> PiecewiseConstantSignal:
    """Weighted pool-adjacent-violators over (value, interval length) pairs."""
    fitted = _pool_adjacent_violators(f.values.tolist(), f.lengths.tolist())
    return PiecewiseConstantSignal(f.breakpoints, fitted)


def check_isotonic_certificate(
    f: PiecewiseConstantSignal, result: IsotonicResult, tol: Optional[float] = None
) -> Verdict:
    """Checks monotonicity, ``W <= F`` with pinned ends, convexity and complementarity.

    Complementarity means the string touches F at every jump of u, which is
    the same as every pool's length-weighted residual summing to zero.
    """
    tol = resolve_tolerance(tol)
    scale = max(1.0, float(np.max(np.abs(result.F.node_values))))
    violations = []

    steps = np.diff(result.u.values)
    if np.any(steps < -tol * scale):
        violations.append(f"u decreases by {-float(np.min(steps)):.3e}")
    if np.any(np.diff(result.W.slopes) < -tol * scale):
        violations.append("W is not convex")

    xi = result.xi
    lowest = float(np.min(xi.node_values))
    if lowest < -tol * scale:
        violations.append(f"W rises above F by {-lowest:.3e}")
    ends = max(abs(xi.start), abs(xi.end))
    if ends > tol * scale:
        violations.append(f"W is not pinned to F at the ends ({ends:.3e})")

    jumps = result.u.breakpoints[1:-1]
    gaps = np.abs(xi(jumps)) if jumps.size else np.zeros(0)
    worst_gap = float(np.max(gaps)) if gaps.size else 0.0
    if worst_gap > tol * scale:
        violations.append(f"string leaves F at a jump of u (gap {worst_gap:.3e})")

    return Verdict(
        name="isotonic_certificate",
        ok=not violations,
        residual=max(worst_gap, ends, max(0.0, -lowest)),
        violations=tuple(violations),
        details={"pools": result.u.size, "residual": result.residual},
    )
