"""One-dimensional total-variation denoising with the taut string algorithm."""

from tautline.analysis import (
    LambdaSweep,
    check_fundamental_estimate,
    check_vanishing_threshold,
    gnorm,
    value_function_sweep,
)
from tautline.core import (
    AtomicMeasure,
    Interval,
    PiecewiseConstantSignal,
    PiecewiseLinearFunction,
    Verdict,
    cumulative,
    derivative,
    jump_measure,
    total_variation,
)
from tautline.errors import (
    ConvergenceError,
    DomainMismatchError,
    InfeasibleTubeError,
    InvalidSignalError,
    ParameterError,
    SignalFormatError,
    TautlineError,
)
from tautline.solvers import (
    DenoiseResult,
    IsotonicResult,
    Tube,
    isotonic_fit,
    qp_tube_solve,
    rof_denoise,
    solve_tube,
    verify_certificate,
)

__version__ = "0.1.0"
