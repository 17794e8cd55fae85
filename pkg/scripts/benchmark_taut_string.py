#!/usr/bin/env python3
"""
Times the taut-string solver on a large random signal.
"""

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from tautline.core.signals import PiecewiseConstantSignal
from tautline.analysis.theorems import gnorm
from tautline.solvers.taut_string import rof_denoise

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def main():
    parser = argparse.ArgumentParser(description="benchmark rof_denoise")
    parser.add_argument("--samples", type=int, default=10**6)
    parser.add_argument("--fraction", type=float, default=0.01, help="lambda as a fraction of gnorm")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    f = PiecewiseConstantSignal.uniform(rng.uniform(-10.0, 10.0, size=args.samples))
    lam = args.fraction * gnorm(f)
    small = PiecewiseConstantSignal.uniform([1.0, -2.0, 3.0, -1.0])
    rof_denoise(small, 0.1 * gnorm(small))

    logger.info(f"🚀 Denoising {args.samples} samples at lambda={lam:.6g}")

    start = time.perf_counter()
    result = rof_denoise(f, lam)
    elapsed = time.perf_counter() - start

    logger.info(f"⏱️ {elapsed:.3f} s, {result.W.nodes.size} knots, {result.u.size} pieces")
    return 0


if __name__ == "__main__":
    sys.exit(main())
