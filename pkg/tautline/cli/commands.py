"""Handlers for the ``tautline`` subcommands.

Each handler takes the parsed argparse namespace and returns the exit status.
Exceptions propagate to ``tautline.main``, which maps them to exit codes.
"""

import logging
from pathlib import Path

import numpy as np

from tautline.analysis.battery import (
    battery_report,
    battery_run,
    lambda_grid,
    random_lambdas,
    random_signal,
)
from tautline.analysis.theorems import gnorm, value_function_sweep
from tautline.cli.signal_files import (
    read_signal,
    side_file,
    write_contacts,
    write_json,
    write_nodes,
    write_signal,
    write_table,
    write_tube,
)
from tautline.config import resolve_tolerance
from tautline.core.functionals import total_variation
from tautline.errors import ParameterError
from tautline.solvers.isotonic import check_isotonic_certificate, isotonic_fit
from tautline.solvers.oracles import duality_gap
from tautline.solvers.taut_string import rof_denoise

logger = logging.getLogger(__name__)

SWEEP_HEADER = ("lambda", "e", "J_u", "fidelity", "fidelity_over_lambda")


def cmd_denoise(args) -> int:
    """Denoises one signal and writes u plus any requested side files."""
    f = read_signal(args.input).signal
    result = rof_denoise(f, args.lam)
    write_signal(args.output, result.u)

    if args.emit_string:
        write_nodes(side_file(args.output, "string"), result.W)
    if args.emit_certificate:
        write_nodes(side_file(args.output, "certificate"), result.xi)
    if args.emit_tube:
        tube = result.tube
        write_tube(side_file(args.output, "tube"), tube.lower, tube.upper)
        contacts = [("upper", s, e) for s, e in result.contact_upper]
        contacts += [("lower", s, e) for s, e in result.contact_lower]
        write_contacts(side_file(args.output, "contacts"), contacts)
    if args.diagnostics:
        write_json(
            args.diagnostics,
            {
                "lambda": result.lam,
                "J_f": total_variation(f),
                "J_u": result.J_u,
                "e": result.energy,
                "gnorm": gnorm(f),
                "duality_gap": duality_gap(f, result.u, result.xi, result.lam),
                "fidelity": result.fidelity,
                "string_length": result.string_length,
                "pieces_in": f.size,
                "pieces_out": result.u.size,
            },
        )
    logger.info(f"Denoised {f.size} pieces into {result.u.size} at lambda={result.lam}")
    return 0


def cmd_isotonic(args) -> int:
    """Writes the non-decreasing least-squares fit, optionally with W and F."""
    f = read_signal(args.input).signal
    result = isotonic_fit(f)
    verdict = check_isotonic_certificate(f, result)
    if not verdict.ok:
        logger.warning(f"Isotonic certificate check failed: {'; '.join(verdict.violations)}")
    write_signal(args.output, result.u)
    if args.emit_envelope:
        write_nodes(side_file(args.output, "envelope"), result.W)
        write_nodes(side_file(args.output, "cumulative"), result.F)
    logger.info(f"Pooled {f.size} pieces into {result.u.size}")
    return 0


def cmd_sweep(args) -> int:
    """Writes the value-function table over a lambda grid."""
    f = read_signal(args.input).signal
    lambdas = lambda_grid(args.lambda_min, args.lambda_max, args.count, args.scale)
    sweep = value_function_sweep(f, lambdas)
    if not sweep.verdict.ok:
        logger.warning(f"Value function checks failed: {'; '.join(sweep.verdict.violations)}")
    write_table(args.output, SWEEP_HEADER, sweep.rows())
    logger.info(f"Swept {len(lambdas)} lambdas from {lambdas[0]} to {lambdas[-1]}")
    return 0


def _verify_lambdas(args, rng, f):
    if args.lambda_min is None and args.lambda_max is None:
        return random_lambdas(rng, f, args.count)
    if args.lambda_min is None or args.lambda_max is None:
        raise ParameterError("give both --lambda-min and --lambda-max, or neither")
    return lambda_grid(args.lambda_min, args.lambda_max, args.count, args.scale)


def cmd_verify(args) -> int:
    """Runs the verdict battery and writes a JSON report; 0 iff every check passed."""
    tol = resolve_tolerance()
    rng = np.random.default_rng(args.seed)
    runs = []
    if args.input is not None:
        signal_file = read_signal(args.input)
        f = signal_file.signal
        runs.append(
            battery_run(
                Path(args.input).name, f, _verify_lambdas(args, rng, f), rng, tol, signal_file.certificate
            )
        )
    else:
        if args.random < 1:
            raise ParameterError(f"--random needs at least one signal, got {args.random}")
        for index in range(args.random):
            f = random_signal(rng)
            runs.append(battery_run(f"random-{index}", f, _verify_lambdas(args, rng, f), rng, tol))

    report = battery_report(runs, args.seed, tol)
    write_json(args.report, report)
    if report["ok"]:
        logger.info(f"All checks passed on {len(runs)} signal(s)")
        return 0
    logger.error(f"Verification failed: {', '.join(report['failed'])}")
    return 1
