from tautline.analysis.theorems import (
    FrozenCertificateProbe,
    LambdaSweep,
    check_bv_convergence,
    check_certificate_reuse,
    check_convex_energy_agreement,
    check_energy_optimality,
    check_fundamental_estimate,
    check_non_expansive,
    check_oracle_equivalence,
    check_piecewise_constant_rate,
    check_semigroup,
    check_shortest_path,
    check_vanishing_threshold,
    gnorm,
    probe_frozen_certificate,
    value_function_sweep,
)
