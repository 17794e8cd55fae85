"""Corpus-scale runs over seeded random signals. Deselect with ``-m "not slow"``."""

import time

import numpy as np
import pytest

from tautline.analysis.battery import random_lambdas, random_signal
from tautline.analysis.theorems import (
    check_bv_convergence,
    check_certificate_reuse,
    check_convex_energy_agreement,
    check_fundamental_estimate,
    check_non_expansive,
    check_oracle_equivalence,
    check_semigroup,
    check_vanishing_threshold,
    gnorm,
    probe_frozen_certificate,
    value_function_sweep,
)
from tautline.core.functionals import l2_norm, linf_norm_pl
from tautline.core.signals import PiecewiseConstantSignal
from tautline.solvers.isotonic import isotonic_fit, pava_oracle
from tautline.solvers.oracles import ARC_LENGTH, COSH, QUARTIC
from tautline.solvers.taut_string import rof_denoise

pytestmark = pytest.mark.slow

PERF_BUDGET_SECONDS = 1.0


def corpus(seed, count, max_pieces=200):
    rng = np.random.default_rng(seed)
    for index in range(count):
        f = random_signal(rng, max_pieces, uniform_grid=bool(index % 2))
        yield rng, f


def test_taut_string_matches_the_qp_oracle_and_keeps_jumps():
    for rng, f in corpus(100, 500):
        lam = random_lambdas(rng, f, count=1)[0]
        verdict = check_oracle_equivalence(f, lam)
        assert verdict.ok, verdict.violations
        assert check_fundamental_estimate(f, lam).ok


def test_vanishing_threshold_corpus():
    for _, f in corpus(101, 100):
        g = gnorm(f)
        for factor in (0.99, 1.0, 1.01, 0.5):
            verdict = check_vanishing_threshold(f, factor * g)
            assert verdict.ok, verdict.violations


def test_value_function_corpus():
    for _, f in corpus(102, 50):
        g = gnorm(f)
        sweep = value_function_sweep(f, np.geomspace(1e-3 * g, 2 * g, 16))
        assert sweep.verdict.ok, sweep.verdict.violations


def test_convergence_corpus():
    for rng, f in corpus(103, 200):
        verdict = check_bv_convergence(f, random_lambdas(rng, f))
        assert verdict.ok, verdict.violations


def test_frozen_certificate_corpus():
    for _, f in corpus(104, 50):
        probe = probe_frozen_certificate(f)
        assert probe.verdict.ok
        if not probe.verdict.inconclusive:
            u = rof_denoise(f, probe.lambda_bar / 2).u
            assert set(u.breakpoints.tolist()) <= set(f.breakpoints.tolist())


def test_semigroup_reuse_and_non_expansive_corpus():
    for rng, f in corpus(105, 200):
        g = gnorm(f)
        lam, mu = rng.uniform(0.0, g, size=2)
        assert check_semigroup(f, lam, mu).ok
        assert check_certificate_reuse(f, lam, lam * rng.uniform(0.01, 1.0)).ok
        other = PiecewiseConstantSignal(f.breakpoints, rng.uniform(-10.0, 10.0, size=f.size))
        assert check_non_expansive(f, other, lam).ok


def test_isotonic_corpus():
    for _, f in corpus(106, 500):
        assert l2_norm(isotonic_fit(f).u - pava_oracle(f)) <= 1e-9


@pytest.mark.parametrize("energy", [ARC_LENGTH, COSH, QUARTIC])
def test_convex_energies_on_random_tubes(energy):
    for rng, f in corpus(107, 20, max_pieces=50):
        lam = random_lambdas(rng, f, count=1)[0]
        verdict = check_convex_energy_agreement(f, lam, energy, initial="chord")
        assert verdict.ok, verdict.violations


def test_million_sample_solve():
    rng = np.random.default_rng(108)
    f = PiecewiseConstantSignal.uniform(rng.uniform(-10.0, 10.0, size=10**6))
    lam = 0.01 * gnorm(f)
    # compile the sweep before the clock starts
    small = PiecewiseConstantSignal.uniform([1.0, -2.0, 3.0, -1.0])
    rof_denoise(small, 0.1 * gnorm(small))
    start = time.perf_counter()
    result = rof_denoise(f, lam)
    elapsed = time.perf_counter() - start
    assert elapsed < PERF_BUDGET_SECONDS
    assert result.W.nodes.size <= f.size + 1
    assert linf_norm_pl(result.xi) <= 1.0 + 1e-6
