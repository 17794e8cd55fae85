"""Executable checks of the structural facts about TV denoising.

Every ``check_*`` function returns a ``Verdict`` and never raises because a
property failed; exceptions are reserved for invalid arguments.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from tautline.config import resolve_tolerance
from tautline.core.functionals import (
    arc_length,
    l2_distance,
    l2_norm,
    linf_norm,
    linf_norm_pl,
    pairing_with_certificate,
    total_variation,
)
from tautline.core.signals import (
    PiecewiseConstantSignal,
    PiecewiseLinearFunction,
    common_grid,
    cumulative,
    jump_measure,
    mean_zero_split,
)
from tautline.core.verdicts import Verdict
from tautline.errors import ParameterError
from tautline.solvers.oracles import (
    DEFAULT_SUBDIVISIONS,
    DEFAULT_TOL_QP,
    ConvexEnergy,
    convex_energy_solve,
    qp_tube_derivative,
    rof_energy,
)
from tautline.solvers.taut_string import (
    DenoiseResult,
    check_lambda,
    rof_denoise,
    verify_certificate,
)

logger = logging.getLogger(__name__)

EQUIVALENCE_TOL = 1e-6
CONVEX_ENERGY_TOL = 1e-4
PROBE_FLOOR = 1e-8


def gnorm(f: PiecewiseConstantSignal) -> float:
    """The G-norm of ``f``: max norm of the cumulative signal of its mean-zero part.

    This is the smallest lambda for which denoising returns the constant mean.
    """
    f0, _ = mean_zero_split(f)
    return linf_norm_pl(cumulative(f0))


def _scale(f: PiecewiseConstantSignal) -> float:
    return max(1.0, linf_norm_pl(cumulative(f)))


def check_vanishing_threshold(
    f: PiecewiseConstantSignal, lam: float, tol: Optional[float] = None
) -> Verdict:
    """Checks the three threshold statements for ``f`` at ``lam``.

    (a) u is constant exactly when lam reaches gnorm(f); (b) below the
    threshold the string touches a tube wall, ``||F0 - W0|| = lam``;
    (c) ``||W0|| = max(0, gnorm - lam)``. F0 and W0 belong to the mean-zero part.
    """
    lam = check_lambda(lam)
    tol = resolve_tolerance(tol)
    g = gnorm(f)
    f0, _ = mean_zero_split(f)
    allowance = tol * _scale(f)

    denoised = rof_denoise(f, lam, tol)
    centred = rof_denoise(f0, lam, tol)

    constant = denoised.u.is_constant()
    above = lam >= g - allowance
    a_ok = constant == above
    wall = linf_norm_pl(centred.F - centred.W)
    b_ok = True
    residual_b = 0.0
    if not above:
        residual_b = abs(wall - lam)
        b_ok = residual_b <= allowance
    residual_c = abs(linf_norm_pl(centred.W) - max(0.0, g - lam))
    c_ok = residual_c <= allowance

    violations = []
    if not a_ok:
        violations.append(f"(a) u constant={constant} but lam={lam!r}, gnorm={g!r}")
    if not b_ok:
        violations.append(f"(b) ||F0 - W0|| = {wall!r} != lam = {lam!r}")
    if not c_ok:
        violations.append(f"(c) ||W0|| off by {residual_c:.3e}")
    return Verdict(
        name="vanishing_threshold",
        ok=not violations,
        residual=max(residual_b, residual_c),
        violations=tuple(violations),
        details={"lambda": lam, "gnorm": g, "a": a_ok, "b": b_ok, "c": c_ok},
    )


@dataclass(frozen=True)
class LambdaSweep:
    """Denoising results along an increasing lambda grid, with the checks they passed.

    ``verdict`` records monotonicity of e, J and fidelity, concavity of e,
    the plateau above the threshold and the bound ``e(lam) <= lam * J(f)``.
    """

    lambdas: List[float]
    results: List[DenoiseResult]
    e_values: List[float]
    j_values: List[float]
    fidelity: List[float]
    verdict: Verdict

    def rows(self):
        for lam, e, j, fid in zip(self.lambdas, self.e_values, self.j_values, self.fidelity):
            yield lam, e, j, fid, fid / lam


def _check_lambda_grid(lambdas: Sequence[float]) -> List[float]:
    lambdas = [float(lam) for lam in lambdas]
    if not lambdas:
        raise ParameterError("a sweep needs at least one lambda")
    for lam in lambdas:
        check_lambda(lam)
    if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise ParameterError("lambdas must be strictly increasing")
    return lambdas


def value_function_sweep(
    f: PiecewiseConstantSignal, lambdas: Sequence[float], tol: Optional[float] = None
) -> LambdaSweep:
    """Denoises ``f`` for every lambda and checks the shape of the value function.

    Raises:
        ParameterError: if ``lambdas`` is empty, unsorted or not positive.
    """
    lambdas = _check_lambda_grid(lambdas)
    tol = resolve_tolerance(tol)

    results = [rof_denoise(f, lam, tol) for lam in lambdas]
    e = np.array([r.energy for r in results])
    j = np.array([r.J_u for r in results])
    fid = np.array([r.fidelity for r in results])
    lam_arr = np.array(lambdas)

    g = gnorm(f)
    J_f = total_variation(f)
    f0, _ = mean_zero_split(f)
    plateau = 0.5 * l2_norm(f0) ** 2
    allowance = tol * max(1.0, float(np.max(np.abs(e))), plateau)

    violations = []
    if np.any(np.diff(e) < -allowance):
        violations.append("e(lambda) decreases")
    if np.any(np.diff(j) > allowance):
        violations.append("J(u_lambda) increases")
    if np.any(np.diff(fid) < -allowance):
        violations.append("||f - u_lambda||^2 decreases")

    concavity = 0.0
    if e.size >= 3:
        left, mid, right = lam_arr[:-2], lam_arr[1:-1], lam_arr[2:]
        chord = ((right - mid) * e[:-2] + (mid - left) * e[2:]) / (right - left)
        concavity = float(max(0.0, np.max(chord - e[1:-1])))
        if concavity > allowance:
            violations.append(f"e(lambda) is not concave (excess {concavity:.3e})")

    above = lam_arr >= g
    plateau_gap = float(np.max(np.abs(e[above] - plateau))) if np.any(above) else 0.0
    if plateau_gap > allowance:
        violations.append(f"e(lambda) leaves the plateau {plateau!r} above gnorm")

    excess = float(max(0.0, np.max(e - lam_arr * J_f)))
    if excess > allowance:
        violations.append(f"e(lambda) exceeds lambda * J(f) by {excess:.3e}")

    logger.debug(f"value function sweep over {len(lambdas)} lambdas, gnorm={g}")
    verdict = Verdict(
        name="value_function",
        ok=not violations,
        residual=max(concavity, plateau_gap, excess),
        violations=tuple(violations),
        details={"gnorm": g, "plateau": plateau, "count": len(lambdas)},
    )
    return LambdaSweep(
        lambdas=lambdas,
        results=results,
        e_values=e.tolist(),
        j_values=j.tolist(),
        fidelity=fid.tolist(),
        verdict=verdict,
    )


def check_fundamental_estimate(
    f: PiecewiseConstantSignal, lam: float, tol: Optional[float] = None
) -> Verdict:
    """Checks that denoising creates no jump, flips no jump sign and enlarges no jump.

    Atoms of u's jump measure with mass at most the tolerance are treated as
    rounding noise and ignored.
    """
    lam = check_lambda(lam)
    tol = resolve_tolerance(tol)
    u = rof_denoise(f, lam, tol).u
    mu_f = jump_measure(f)
    mu_u = jump_measure(u)
    allowance = tol * max(1.0, linf_norm(f))

    violations = []
    residual = 0.0
    for x, mass in mu_u.atoms():
        if abs(mass) <= allowance:
            continue
        mass_f = mu_f.mass_at(x)
        if mass_f == 0.0:
            violations.append(f"u jumps by {mass!r} at x={x!r} where f is continuous")
            residual = max(residual, abs(mass))
        elif math.copysign(1.0, mass) != math.copysign(1.0, mass_f):
            violations.append(f"jump at x={x!r} flips sign ({mass_f!r} -> {mass!r})")
            residual = max(residual, abs(mass))
        elif abs(mass) > abs(mass_f) + allowance:
            violations.append(f"jump at x={x!r} grows from {mass_f!r} to {mass!r}")
            residual = max(residual, abs(mass) - abs(mass_f))
    return Verdict(
        name="fundamental_estimate",
        ok=not violations,
        residual=residual,
        violations=tuple(violations),
        details={"lambda": lam, "jumps_f": len(mu_f), "jumps_u": len(mu_u)},
    )


def check_bv_convergence(
    f: PiecewiseConstantSignal, lambdas: Sequence[float], tol: Optional[float] = None
) -> Verdict:
    """Checks the finite forms of L2 convergence as lambda shrinks.

    For each lambda: ``||u - f||^2 <= 2 lam (J(f) - J(u))``, ``J(u) <= J(f)``
    and ``J(f - u) = J(f) - J(u)``. The details carry a decay table with
    ``||u - f||^2 / lam`` and ``J(u) / J(f)`` for inspection.
    """
    tol = resolve_tolerance(tol)
    J_f = total_variation(f)
    allowance = tol * max(1.0, J_f, l2_norm(f) ** 2)

    violations = []
    residual = 0.0
    table = []
    for lam in sorted(check_lambda(lam) for lam in lambdas):
        result = rof_denoise(f, lam, tol)
        fidelity = result.fidelity
        bound = 2.0 * lam * (J_f - result.J_u)
        bv_distance = total_variation(f - result.u)
        split = abs(bv_distance - (J_f - result.J_u))
        if fidelity > bound + allowance:
            violations.append(f"lam={lam!r}: ||u - f||^2 = {fidelity!r} > {bound!r}")
        if result.J_u > J_f + allowance:
            violations.append(f"lam={lam!r}: J(u) = {result.J_u!r} > J(f) = {J_f!r}")
        if split > allowance:
            violations.append(f"lam={lam!r}: J(f - u) off by {split:.3e}")
        residual = max(residual, fidelity - bound, result.J_u - J_f, split)
        table.append(
            {
                "lambda": lam,
                "fidelity": fidelity,
                "ratio": fidelity / lam,
                "j_ratio": result.J_u / J_f if J_f > 0 else 1.0,
                "bv_distance": bv_distance,
            }
        )
    return Verdict(
        name="bv_convergence",
        ok=not violations,
        residual=max(0.0, residual),
        violations=tuple(violations),
        details={"J_f": J_f, "table": table},
    )


def check_piecewise_constant_rate(
    f: PiecewiseConstantSignal, lam1: float, lam2: float, tol: Optional[float] = None
) -> Verdict:
    """Checks that ``(f - u)/lam`` agrees at ``lam1 < lam2`` (a frozen certificate).

    Raises:
        ParameterError: unless ``0 < lam1 < lam2``.
    """
    lam1 = check_lambda(lam1, "lambda_1")
    lam2 = check_lambda(lam2, "lambda_2")
    if lam1 >= lam2:
        raise ParameterError(f"need lambda_1 < lambda_2, got {lam1!r} >= {lam2!r}")
    tol = resolve_tolerance(tol)
    q1 = (f - rof_denoise(f, lam1, tol).u) / lam1
    q2 = (f - rof_denoise(f, lam2, tol).u) / lam2
    residual = linf_norm(q1 - q2)
    allowance = tol * max(1.0, linf_norm(f) / lam1)
    ok = residual <= allowance
    return Verdict(
        name="piecewise_constant_rate",
        ok=ok,
        residual=residual,
        violations=() if ok else (f"(f - u)/lam differs by {residual:.3e} between {lam1!r} and {lam2!r}",),
        details={"lambda_1": lam1, "lambda_2": lam2, "rate_constant": l2_norm(q2)},
    )


@dataclass(frozen=True)
class FrozenCertificateProbe:
    """Outcome of the search for a lambda below which the certificate is frozen."""

    lambda_bar: Optional[float]
    xi: Optional[PiecewiseLinearFunction]
    rate_constant: Optional[float]
    verdict: Verdict


def probe_frozen_certificate(
    f: PiecewiseConstantSignal, tol: Optional[float] = None, floor: float = PROBE_FLOOR
) -> FrozenCertificateProbe:
    """Halves lambda from gnorm/2 until two consecutive quotients agree.

    The rate constant is ``||xi'||``, so that ``||f - u_lam|| = lam * ||xi'||``
    for every lambda up to ``lambda_bar``. Below ``floor * gnorm`` the probe
    gives up and the verdict is marked inconclusive.
    """
    tol = resolve_tolerance(tol)
    g = gnorm(f)
    if g == 0.0:
        verdict = Verdict(name="frozen_certificate", ok=True, details={"gnorm": 0.0})
        return FrozenCertificateProbe(None, None, 0.0, verdict)

    lam = g / 2.0
    tried = 0
    while lam / 2.0 >= floor * g:
        tried += 1
        verdict = check_piecewise_constant_rate(f, lam / 2.0, lam, tol)
        if verdict.ok:
            xi = rof_denoise(f, lam, tol).xi
            rate = verdict.details["rate_constant"]
            logger.debug(f"certificate frozen below lambda={lam} after {tried} probes")
            return FrozenCertificateProbe(
                lam,
                xi,
                rate,
                Verdict(
                    name="frozen_certificate",
                    ok=True,
                    residual=verdict.residual,
                    details={"gnorm": g, "lambda_bar": lam, "rate_constant": rate, "probes": tried},
                ),
            )
        lam /= 2.0

    logger.warning(f"no frozen certificate found above {floor * g!r}; probe inconclusive")
    verdict = Verdict(
        name="frozen_certificate",
        ok=True,
        inconclusive=True,
        details={"gnorm": g, "floor": floor * g, "probes": tried},
    )
    return FrozenCertificateProbe(None, None, None, verdict)


def _denoised(f: PiecewiseConstantSignal, lam: float, tol: float) -> Optional[DenoiseResult]:
    return rof_denoise(f, lam, tol) if lam > 0 else None


def check_semigroup(
    f: PiecewiseConstantSignal, lam: float, mu: float, tol: Optional[float] = None
) -> Verdict:
    """Checks that denoising with lam then mu equals denoising once with lam + mu.

    A zero parameter means the identity. When the total is positive, the
    averaged certificate ``(lam * xi_lam + mu * xi_mu) / (lam + mu)`` must
    certify the result as well.

    Raises:
        ParameterError: if ``lam`` or ``mu`` is negative or not finite.
    """
    for name, value in (("lambda", lam), ("mu", mu)):
        if not math.isfinite(value) or value < 0:
            raise ParameterError(f"{name} must be a finite number >= 0, got {value!r}")
    tol = resolve_tolerance(tol)
    lam, mu = float(lam), float(mu)

    first = _denoised(f, lam, tol)
    u_lam = first.u if first is not None else f
    second = _denoised(u_lam, mu, tol)
    chained = second.u if second is not None else u_lam
    direct_result = _denoised(f, lam + mu, tol)
    direct = direct_result.u if direct_result is not None else f

    residual = l2_distance(chained, direct)
    allowance = tol * max(1.0, l2_norm(f))
    violations = []
    if residual > allowance:
        violations.append(f"(u_lam)_mu and u_(lam+mu) differ by {residual:.3e}")

    details = {"lambda": lam, "mu": mu}
    if lam + mu > 0:
        weighted = [(w, r.xi) for w, r in ((lam, first), (mu, second)) if r is not None]
        xi_bar = weighted[0][0] * weighted[0][1]
        for w, xi in weighted[1:]:
            xi_bar = xi_bar + w * xi
        xi_bar = xi_bar / (lam + mu)
        averaged = verify_certificate(f, lam + mu, direct, xi_bar, tol)
        details["averaged_certificate"] = averaged.to_dict()
        if not averaged.ok:
            violations.extend(f"averaged certificate: {v}" for v in averaged.violations)
    return Verdict(
        name="semigroup",
        ok=not violations,
        residual=residual,
        violations=tuple(violations),
        details=details,
    )


def check_certificate_reuse(
    f: PiecewiseConstantSignal, lam: float, mu: float, tol: Optional[float] = None
) -> Verdict:
    """Checks ``J(u_lam) = <u_lam, xi_mu'>`` for a smaller parameter ``mu``.

    Raises:
        ParameterError: unless ``0 < mu <= lam``.
    """
    lam = check_lambda(lam)
    mu = check_lambda(mu, "mu")
    if mu > lam:
        raise ParameterError(f"need mu <= lambda, got mu={mu!r} > lambda={lam!r}")
    tol = resolve_tolerance(tol)
    u = rof_denoise(f, lam, tol).u
    xi_mu = rof_denoise(f, mu, tol).xi
    J_u = total_variation(u)
    pairing = pairing_with_certificate(u, xi_mu)
    residual = abs(J_u - pairing)
    precision = max(1.0, _scale(f) / mu)
    ok = residual <= tol * (1.0 + J_u) * precision
    return Verdict(
        name="certificate_reuse",
        ok=ok,
        residual=residual,
        violations=() if ok else (f"J(u_lam) = {J_u!r} but <u_lam, xi_mu'> = {pairing!r}",),
        details={"lambda": lam, "mu": mu, "J_u": J_u, "pairing": pairing},
    )


def check_energy_optimality(
    f: PiecewiseConstantSignal,
    lam: float,
    v: PiecewiseConstantSignal,
    tol: Optional[float] = None,
) -> Verdict:
    """Checks ``E(v) - E(u_lam) >= 0.5 * ||v - u_lam||^2`` for a competitor ``v``."""
    lam = check_lambda(lam)
    tol = resolve_tolerance(tol)
    result = rof_denoise(f, lam, tol)
    excess = rof_energy(f, v, lam) - result.energy
    margin = 0.5 * l2_norm(v - result.u) ** 2
    shortfall = margin - excess
    ok = shortfall <= tol * max(1.0, result.energy, margin)
    return Verdict(
        name="energy_optimality",
        ok=ok,
        residual=max(0.0, shortfall),
        violations=() if ok else (f"E(v) - E(u) = {excess!r} < 0.5||v - u||^2 = {margin!r}",),
        details={"lambda": lam, "excess": excess, "margin": margin},
    )


def check_non_expansive(
    f: PiecewiseConstantSignal,
    g: PiecewiseConstantSignal,
    lam: float,
    tol: Optional[float] = None,
) -> Verdict:
    """Checks ``||u_f - u_g|| <= ||f - g||`` for two in-signals on one interval."""
    lam = check_lambda(lam)
    tol = resolve_tolerance(tol)
    distance_in = l2_distance(f, g)
    distance_out = l2_distance(rof_denoise(f, lam, tol).u, rof_denoise(g, lam, tol).u)
    excess = distance_out - distance_in
    ok = excess <= tol * max(1.0, distance_in)
    return Verdict(
        name="non_expansive",
        ok=ok,
        residual=max(0.0, excess),
        violations=() if ok else (f"||u_f - u_g|| = {distance_out!r} > ||f - g|| = {distance_in!r}",),
        details={"lambda": lam, "input_distance": distance_in, "output_distance": distance_out},
    )


def check_shortest_path(
    result: DenoiseResult,
    candidates: Sequence[PiecewiseLinearFunction],
    tol: Optional[float] = None,
) -> Verdict:
    """Checks that no feasible candidate string is shorter than the taut string.

    Candidates that leave the tube or miss the pinned ends are skipped and
    counted in the details.
    """
    tol = resolve_tolerance(tol)
    tube = result.tube
    allowance = tol * tube.scale()
    taut = arc_length(result.W)
    feasible = 0
    shortest = math.inf
    for W in candidates:
        grid = common_grid(W.nodes, result.F.nodes)
        values = W(grid)
        inside = np.all(values >= tube.lower(grid) - allowance) and np.all(
            values <= tube.upper(grid) + allowance
        )
        pinned = abs(W.start - tube.start_value) <= allowance and abs(W.end - tube.end_value) <= allowance
        if not (inside and pinned):
            continue
        feasible += 1
        shortest = min(shortest, arc_length(W))

    excess = max(0.0, taut - shortest) if feasible else 0.0
    ok = excess <= allowance
    return Verdict(
        name="shortest_path",
        ok=ok,
        residual=excess,
        violations=() if ok else (f"a feasible string is shorter by {excess:.3e}",),
        details={"taut_length": taut, "feasible": feasible, "skipped": len(candidates) - feasible},
    )


def check_oracle_equivalence(
    f: PiecewiseConstantSignal,
    lam: float,
    subdivisions: int = DEFAULT_SUBDIVISIONS,
    tol_qp: float = DEFAULT_TOL_QP,
    tol: float = EQUIVALENCE_TOL,
) -> Verdict:
    """Compares the taut-string solution with the box-QP oracle in L2."""
    lam = check_lambda(lam)
    u = rof_denoise(f, lam).u
    u_qp = qp_tube_derivative(f, lam, subdivisions, tol_qp)
    residual = l2_norm(u - u_qp)
    ok = residual <= tol
    return Verdict(
        name="equivalence",
        ok=ok,
        residual=residual,
        violations=() if ok else (f"taut string and QP oracle differ by {residual:.3e} at lam={lam!r}",),
        details={"lambda": lam, "subdivisions": subdivisions},
    )


def check_convex_energy_agreement(
    f: PiecewiseConstantSignal,
    lam: float,
    energy: ConvexEnergy,
    subdivisions: int = DEFAULT_SUBDIVISIONS,
    tol_qp: float = DEFAULT_TOL_QP,
    tol: float = CONVEX_ENERGY_TOL,
    initial: str = "quadratic",
) -> Verdict:
    """Checks that minimizing another strictly convex string energy gives the taut string."""
    lam = check_lambda(lam)
    W = rof_denoise(f, lam).W
    W_h = convex_energy_solve(f, lam, energy, subdivisions, tol_qp, initial=initial)
    residual = float(np.max(np.abs(W_h.node_values - W(W_h.nodes))))
    ok = residual <= tol
    return Verdict(
        name="convex_energy",
        ok=ok,
        residual=residual,
        violations=() if ok else (f"{energy.name} minimizer is {residual:.3e} off the taut string",),
        details={"lambda": lam, "energy": energy.name},
    )


