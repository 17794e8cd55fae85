"""Piecewise-constant signals, piecewise-linear functions and atomic measures.

All three types are immutable after construction: the numpy arrays they hold
are copied and marked read-only, so instances can be shared freely between
threads.
"""

import logging
import math
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from tautline.errors import DomainMismatchError, InvalidSignalError, ParameterError

logger = logging.getLogger(__name__)

Number = Union[int, float]


class Interval:
    """A bounded open interval (a, b)."""

    __slots__ = ("a", "b")

    def __init__(self, a: Number, b: Number):
        a, b = float(a), float(b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise InvalidSignalError(f"interval endpoints must be finite, got ({a}, {b})")
        if not a < b:
            raise InvalidSignalError(f"interval needs a < b, got ({a}, {b})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __setattr__(self, name, value):
        raise AttributeError("Interval is immutable")

    @property
    def length(self) -> float:
        return self.b - self.a

    def __eq__(self, other) -> bool:
        return isinstance(other, Interval) and self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __repr__(self) -> str:
        return f"Interval({self.a!r}, {self.b!r})"


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def common_grid(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Sorted union of two grids; a grid that already holds the other is returned as is."""
    if first.size < second.size:
        first, second = second, first
    idx = np.minimum(np.searchsorted(first, second), first.size - 1)
    if np.array_equal(first[idx], second):
        return first
    return np.union1d(first, second)


def _as_grid(points: Iterable[Number], what: str) -> np.ndarray:
    grid = np.array(points, dtype=float).ravel()
    if grid.size < 2:
        raise InvalidSignalError(f"{what} needs at least two points")
    if not np.all(np.isfinite(grid)):
        raise InvalidSignalError(f"{what} must be finite")
    steps = np.diff(grid)
    if np.any(steps <= 0):
        bad = int(np.argmax(steps <= 0))
        raise InvalidSignalError(
            f"{what} must be strictly increasing (x[{bad}]={grid[bad]!r}, x[{bad + 1}]={grid[bad + 1]!r})"
        )
    return grid


def _check_same_interval(left: Interval, right: Interval) -> None:
    if left != right:
        raise DomainMismatchError(f"operands live on different intervals: {left} vs {right}")


class PiecewiseConstantSignal:
    """A signal taking the value ``values[i]`` on ``(breakpoints[i], breakpoints[i+1])``.

    The signal is stored in canonical form: adjacent intervals never share
    the same value (they are merged on construction, with exact equality).
    """

    __slots__ = ("_breakpoints", "_values")

    def __init__(self, breakpoints: Sequence[Number], values: Sequence[Number]):
        grid = _as_grid(breakpoints, "breakpoints")
        vals = np.array(values, dtype=float).ravel()
        if vals.size != grid.size - 1:
            raise InvalidSignalError(
                f"expected {grid.size - 1} values for {grid.size} breakpoints, got {vals.size}"
            )
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmax(~np.isfinite(vals)))
            raise InvalidSignalError(f"value {bad} is not finite ({vals[bad]!r})")

        keep = np.ones(vals.size, dtype=bool)
        keep[1:] = vals[1:] != vals[:-1]
        vals = vals[keep]
        grid = np.append(grid[:-1][keep], grid[-1])

        self._breakpoints = _frozen(grid)
        self._values = _frozen(vals)

    @classmethod
    def uniform(cls, values: Sequence[Number], a: Number = 0.0, b: Optional[Number] = None):
        """Builds a signal on equal-length intervals; defaults to the grid [0, 1, ..., n]."""
        vals = np.asarray(values, dtype=float).ravel()
        if vals.size == 0:
            raise InvalidSignalError("a signal needs at least one value")
        b = float(a) + vals.size if b is None else b
        return cls(np.linspace(float(a), float(b), vals.size + 1), vals)

    @classmethod
    def constant(cls, value: Number, a: Number, b: Number):
        return cls([a, b], [value])

    @property
    def breakpoints(self) -> np.ndarray:
        return self._breakpoints

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def interval(self) -> Interval:
        return Interval(self._breakpoints[0], self._breakpoints[-1])

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self._breakpoints)

    @property
    def size(self) -> int:
        """Number of constant pieces."""
        return int(self._values.size)

    def is_constant(self) -> bool:
        return self._values.size == 1

    def __call__(self, x):
        """Evaluates the signal, using the value on the right of a breakpoint (left at b)."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self._breakpoints, x, side="right") - 1
        idx = np.clip(idx, 0, self._values.size - 1)
        return self._values[idx]

    def values_on(self, grid: np.ndarray) -> np.ndarray:
        """Values on the cells of ``grid``, a refinement of the breakpoints."""
        idx = np.searchsorted(self._breakpoints, grid[:-1], side="right") - 1
        return self._values[idx]

    def _combine(self, other: "PiecewiseConstantSignal", op) -> "PiecewiseConstantSignal":
        _check_same_interval(self.interval, other.interval)
        grid = common_grid(self._breakpoints, other._breakpoints)
        return PiecewiseConstantSignal(grid, op(self.values_on(grid), other.values_on(grid)))

    def __add__(self, other):
        if isinstance(other, PiecewiseConstantSignal):
            return self._combine(other, np.add)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return PiecewiseConstantSignal(self._breakpoints, self._values + float(other))
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, PiecewiseConstantSignal):
            return self._combine(other, np.subtract)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return PiecewiseConstantSignal(self._breakpoints, self._values - float(other))
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return PiecewiseConstantSignal(self._breakpoints, -self._values)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, np.floating, np.integer)):
            return PiecewiseConstantSignal(self._breakpoints, self._values * float(scalar))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, (int, float, np.floating, np.integer)):
            return PiecewiseConstantSignal(self._breakpoints, self._values / float(scalar))
        return NotImplemented

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseConstantSignal):
            return NotImplemented
        return np.array_equal(self._breakpoints, other._breakpoints) and np.array_equal(
            self._values, other._values
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"PiecewiseConstantSignal(breakpoints={self._breakpoints.tolist()!r}, "
            f"values={self._values.tolist()!r})"
        )


class PiecewiseLinearFunction:
    """The continuous linear interpolant of ``node_values`` at ``nodes``."""

    __slots__ = ("_nodes", "_node_values")

    def __init__(self, nodes: Sequence[Number], node_values: Sequence[Number]):
        grid = _as_grid(nodes, "nodes")
        vals = np.array(node_values, dtype=float).ravel()
        if vals.size != grid.size:
            raise InvalidSignalError(f"expected {grid.size} node values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmax(~np.isfinite(vals)))
            raise InvalidSignalError(f"node value {bad} is not finite ({vals[bad]!r})")
        self._nodes = _frozen(grid)
        self._node_values = _frozen(vals)

    @classmethod
    def linear(cls, a: Number, b: Number, start: Number, end: Number):
        return cls([a, b], [start, end])

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def node_values(self) -> np.ndarray:
        return self._node_values

    @property
    def interval(self) -> Interval:
        return Interval(self._nodes[0], self._nodes[-1])

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self._node_values) / np.diff(self._nodes)

    @property
    def start(self) -> float:
        return float(self._node_values[0])

    @property
    def end(self) -> float:
        return float(self._node_values[-1])

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self._nodes, self._node_values)

    def refine(self, grid: np.ndarray) -> "PiecewiseLinearFunction":
        """Same function with nodes on ``grid`` (which must span the interval)."""
        return PiecewiseLinearFunction(grid, self(grid))

    def _combine(self, other: "PiecewiseLinearFunction", op) -> "PiecewiseLinearFunction":
        _check_same_interval(self.interval, other.interval)
        grid = common_grid(self._nodes, other._nodes)
        return PiecewiseLinearFunction(grid, op(self(grid), other(grid)))

    def __add__(self, other):
        if isinstance(other, PiecewiseLinearFunction):
            return self._combine(other, np.add)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return PiecewiseLinearFunction(self._nodes, self._node_values + float(other))
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, PiecewiseLinearFunction):
            return self._combine(other, np.subtract)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return PiecewiseLinearFunction(self._nodes, self._node_values - float(other))
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return PiecewiseLinearFunction(self._nodes, -self._node_values)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, np.floating, np.integer)):
            return PiecewiseLinearFunction(self._nodes, self._node_values * float(scalar))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, (int, float, np.floating, np.integer)):
            return PiecewiseLinearFunction(self._nodes, self._node_values / float(scalar))
        return NotImplemented

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseLinearFunction):
            return NotImplemented
        return np.array_equal(self._nodes, other._nodes) and np.array_equal(
            self._node_values, other._node_values
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"PiecewiseLinearFunction(nodes={self._nodes.tolist()!r}, "
            f"node_values={self._node_values.tolist()!r})"
        )


class AtomicMeasure:
    """A finite signed sum of point masses strictly inside an interval."""

    __slots__ = ("_interval", "_locations", "_masses")

    def __init__(self, interval: Interval, locations: Sequence[Number], masses: Sequence[Number]):
        locs = np.array(locations, dtype=float).ravel()
        mass = np.array(masses, dtype=float).ravel()
        if locs.size != mass.size:
            raise InvalidSignalError(f"{locs.size} locations but {mass.size} masses")
        if not (np.all(np.isfinite(locs)) and np.all(np.isfinite(mass))):
            raise InvalidSignalError("atom locations and masses must be finite")
        if locs.size and (locs[0] <= interval.a or locs[-1] >= interval.b):
            raise InvalidSignalError(f"atoms must lie strictly inside {interval}")
        if np.any(np.diff(locs) <= 0):
            raise InvalidSignalError("atom locations must be strictly increasing")
        nonzero = mass != 0
        self._interval = interval
        self._locations = _frozen(locs[nonzero])
        self._masses = _frozen(mass[nonzero])

    @classmethod
    def empty(cls, interval: Interval):
        return cls(interval, [], [])

    @property
    def interval(self) -> Interval:
        return self._interval

    @property
    def locations(self) -> np.ndarray:
        return self._locations

    @property
    def masses(self) -> np.ndarray:
        return self._masses

    @property
    def total_variation_mass(self) -> float:
        return float(np.sum(np.abs(self._masses)))

    @property
    def total_mass(self) -> float:
        return float(np.sum(self._masses))

    def __len__(self) -> int:
        return int(self._masses.size)

    def atoms(self):
        return list(zip(self._locations.tolist(), self._masses.tolist()))

    def mass_at(self, x: float) -> float:
        """Mass of the atom at ``x`` (0 if there is none)."""
        idx = np.searchsorted(self._locations, x)
        if idx < self._locations.size and self._locations[idx] == x:
            return float(self._masses[idx])
        return 0.0

    def __repr__(self) -> str:
        return f"AtomicMeasure({self._interval!r}, atoms={self.atoms()!r})"


def cumulative(f: PiecewiseConstantSignal) -> PiecewiseLinearFunction:
    """Returns F(x) = integral of f from a to x, with nodes at f's breakpoints."""
    increments = f.values * f.lengths
    return PiecewiseLinearFunction(f.breakpoints, np.concatenate(([0.0], np.cumsum(increments))))


def derivative(W: PiecewiseLinearFunction) -> PiecewiseConstantSignal:
    """Returns the signal of slopes of ``W`` (in canonical form)."""
    return PiecewiseConstantSignal(W.nodes, W.slopes)


def jump_measure(u: PiecewiseConstantSignal) -> AtomicMeasure:
    """The distributional derivative of ``u``: one atom per interior breakpoint."""
    return AtomicMeasure(u.interval, u.breakpoints[1:-1], np.diff(u.values))


def jordan_decomposition(mu: AtomicMeasure) -> Tuple[AtomicMeasure, AtomicMeasure]:
    """Splits ``mu`` into its positive and negative variations (``mu = pos - neg``)."""
    positive = mu.masses > 0
    pos = AtomicMeasure(mu.interval, mu.locations[positive], mu.masses[positive])
    neg = AtomicMeasure(mu.interval, mu.locations[~positive], -mu.masses[~positive])
    return pos, neg


def mean_value(f: PiecewiseConstantSignal) -> float:
    return float(np.dot(f.values, f.lengths) / f.interval.length)


def mean_zero_split(f: PiecewiseConstantSignal) -> Tuple[PiecewiseConstantSignal, float]:
    """Returns ``(f - c, c)`` where ``c`` is the mean of ``f`` over its interval."""
    c = mean_value(f)
    return f - c, c


def simplify(f: PiecewiseConstantSignal, eps: float) -> PiecewiseConstantSignal:
    """Merges runs of adjacent values that stay within ``eps`` of the run's first value.

    Each merged run is replaced by its length-weighted mean. Meant for noisy
    input ingestion; ``eps = 0`` returns ``f`` unchanged.
    """
    if eps < 0 or not math.isfinite(eps):
        raise ParameterError(f"simplify needs a finite eps >= 0, got {eps!r}")
    if eps == 0 or f.is_constant():
        return f

    values, lengths = f.values, f.lengths
    cuts = [0]
    anchor = values[0]
    for i in range(1, values.size):
        if abs(values[i] - anchor) > eps:
            cuts.append(i)
            anchor = values[i]
    cuts.append(values.size)

    merged = [
        float(np.dot(values[s:e], lengths[s:e]) / np.sum(lengths[s:e]))
        for s, e in zip(cuts[:-1], cuts[1:])
    ]
    logger.debug(f"simplify(eps={eps}): {values.size} -> {len(merged)} pieces")
    return PiecewiseConstantSignal(f.breakpoints[cuts], merged)
