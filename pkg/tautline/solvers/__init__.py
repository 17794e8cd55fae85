from tautline.solvers.isotonic import (
    IsotonicResult,
    check_isotonic_certificate,
    isotonic_fit,
    lower_convex_envelope,
    pava_oracle,
)
from tautline.solvers.oracles import (
    ARC_LENGTH,
    COSH,
    QUADRATIC,
    QUARTIC,
    ConvexEnergy,
    GridProblem,
    convex_energy_solve,
    dual_energy,
    duality_gap,
    qp_tube_derivative,
    qp_tube_solve,
    rof_energy,
)
from tautline.solvers.taut_string import (
    DenoiseResult,
    Tube,
    contact_sets,
    rof_denoise,
    solve_tube,
    verify_certificate,
)
