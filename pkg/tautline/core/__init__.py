from tautline.core.functionals import (
    arc_length,
    dirichlet_energy,
    l2_distance,
    l2_inner,
    l2_norm,
    linf_norm,
    linf_norm_pl,
    pairing_with_certificate,
    total_variation,
)
from tautline.core.signals import (
    AtomicMeasure,
    Interval,
    PiecewiseConstantSignal,
    PiecewiseLinearFunction,
    cumulative,
    derivative,
    jordan_decomposition,
    jump_measure,
    mean_value,
    mean_zero_split,
    simplify,
)
from tautline.core.verdicts import Verdict
