"""The verdict battery behind ``tautline verify``.

One run denoises a signal over a lambda grid and folds every structural
check into a single report. All randomness comes from one seeded generator,
so a rerun with the same inputs produces the same report.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from tautline.config import resolve_tolerance
from tautline.core.signals import PiecewiseConstantSignal, PiecewiseLinearFunction
from tautline.core.verdicts import Verdict, combine
from tautline.errors import ParameterError
from tautline.analysis.theorems import (
    check_bv_convergence,
    check_certificate_reuse,
    check_convex_energy_agreement,
    check_fundamental_estimate,
    check_oracle_equivalence,
    check_semigroup,
    check_vanishing_threshold,
    gnorm,
    probe_frozen_certificate,
    value_function_sweep,
)
from tautline.solvers.oracles import ARC_LENGTH
from tautline.solvers.taut_string import rof_denoise, verify_certificate

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_COUNT = 4
RANDOM_MAX_PIECES = 200
RANDOM_VALUE_RANGE = 10.0


@dataclass(frozen=True)
class SuppliedCertificate:
    """A claimed (u, xi) pair for one lambda, checked without solving anything."""

    lam: float
    u: PiecewiseConstantSignal
    xi: PiecewiseLinearFunction


def random_signal(
    rng: np.random.Generator,
    max_pieces: int = RANDOM_MAX_PIECES,
    uniform_grid: bool = True,
) -> PiecewiseConstantSignal:
    """A signal with 2..max_pieces values drawn uniformly from [-10, 10].

    With ``uniform_grid=False`` the interval lengths are drawn from [0.1, 2].
    """
    n = int(rng.integers(2, max_pieces + 1))
    values = rng.uniform(-RANDOM_VALUE_RANGE, RANDOM_VALUE_RANGE, size=n)
    if uniform_grid:
        return PiecewiseConstantSignal.uniform(values)
    breakpoints = np.concatenate(([0.0], np.cumsum(rng.uniform(0.1, 2.0, size=n))))
    return PiecewiseConstantSignal(breakpoints, values)


def random_lambdas(
    rng: np.random.Generator, f: PiecewiseConstantSignal, count: int = DEFAULT_LAMBDA_COUNT
) -> List[float]:
    """Sorted lambdas drawn log-uniformly from [1e-3 * gnorm, 2 * gnorm]."""
    g = gnorm(f)
    if g == 0.0:
        g = 1.0
    draws = np.exp(rng.uniform(np.log(1e-3 * g), np.log(2.0 * g), size=count))
    return sorted(set(float(lam) for lam in draws))


def lambda_grid(lam_min: float, lam_max: float, count: int, scale: str = "log") -> List[float]:
    """``count`` lambdas from ``lam_min`` to ``lam_max`` spaced on a log or linear scale."""
    if count < 1:
        raise ParameterError(f"count must be at least 1, got {count!r}")
    if not 0 < lam_min <= lam_max:
        raise ParameterError(f"need 0 < lambda-min <= lambda-max, got {lam_min!r}, {lam_max!r}")
    if count == 1:
        return [float(lam_min)]
    if lam_min == lam_max:
        raise ParameterError("lambda-min equals lambda-max but more than one lambda was requested")
    if scale == "log":
        grid = np.geomspace(lam_min, lam_max, count)
    elif scale == "linear":
        grid = np.linspace(lam_min, lam_max, count)
    else:
        raise ParameterError(f"scale must be 'log' or 'linear', got {scale!r}")
    return [float(lam) for lam in grid]


def run_battery(
    f: PiecewiseConstantSignal,
    lambdas: Sequence[float],
    rng: np.random.Generator,
    tol: Optional[float] = None,
    certificate: Optional[SuppliedCertificate] = None,
) -> Dict[str, Verdict]:
    """Runs every check for ``f`` over ``lambdas`` and returns one verdict per check name.

    The semigroup step ``mu`` and the certificate-reuse parameter are drawn
    from ``rng``; the convex-energy comparison runs at the median lambda.
    """
    tol = resolve_tolerance(tol)
    lambdas = sorted(float(lam) for lam in lambdas)
    g = gnorm(f)
    per_lambda = {
        "equivalence": [],
        "certificate": [],
        "fundamental_estimate": [],
        "vanishing_threshold": [],
        "semigroup": [],
        "certificate_reuse": [],
    }
    for lam in lambdas:
        result = rof_denoise(f, lam, tol)
        per_lambda["equivalence"].append(check_oracle_equivalence(f, lam))
        per_lambda["certificate"].append(verify_certificate(f, lam, result.u, result.xi, tol))
        per_lambda["fundamental_estimate"].append(check_fundamental_estimate(f, lam, tol))
        per_lambda["vanishing_threshold"].append(check_vanishing_threshold(f, lam, tol))
        mu = float(rng.uniform(0.0, max(g, lam)))
        per_lambda["semigroup"].append(check_semigroup(f, lam, mu, tol))
        reuse_mu = float(lam * rng.uniform(0.05, 1.0))
        per_lambda["certificate_reuse"].append(check_certificate_reuse(f, lam, reuse_mu, tol))

    verdicts = {name: combine(name, parts) for name, parts in per_lambda.items()}
    verdicts["value_function"] = value_function_sweep(f, lambdas, tol).verdict
    verdicts["bv_convergence"] = check_bv_convergence(f, lambdas, tol)
    verdicts["frozen_certificate"] = probe_frozen_certificate(f, tol).verdict
    verdicts["convex_energy"] = check_convex_energy_agreement(
        f, lambdas[len(lambdas) // 2], ARC_LENGTH
    )
    if certificate is not None:
        supplied = verify_certificate(f, certificate.lam, certificate.u, certificate.xi, tol)
        verdicts["supplied_certificate"] = combine("supplied_certificate", [supplied])

    failed = sorted(name for name, verdict in verdicts.items() if not verdict.ok)
    if failed:
        logger.info(f"battery failed checks: {', '.join(failed)}")
    return verdicts


def battery_report(runs: Sequence[Dict], seed: Optional[int], tol: float) -> Dict:
    """Assembles per-signal battery results into the JSON-ready verify report."""
    ok = all(run["ok"] for run in runs)
    failed = sorted({name for run in runs for name in run["failed"]})
    return {"ok": ok, "seed": seed, "tolerance": tol, "failed": failed, "signals": list(runs)}


def battery_run(
    label: str,
    f: PiecewiseConstantSignal,
    lambdas: Sequence[float],
    rng: np.random.Generator,
    tol: Optional[float] = None,
    certificate: Optional[SuppliedCertificate] = None,
) -> Dict:
    """One signal's entry in the verify report."""
    verdicts = run_battery(f, lambdas, rng, tol, certificate)
    failed = sorted(name for name, verdict in verdicts.items() if not verdict.ok)
    return {
        "signal": label,
        "pieces": f.size,
        "lambdas": sorted(float(lam) for lam in lambdas),
        "ok": not failed,
        "failed": failed,
        "checks": {name: verdict.to_dict() for name, verdict in sorted(verdicts.items())},
    }
