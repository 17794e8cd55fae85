#!/usr/bin/env python3
"""
Runs the check battery over every bundled signal in data/signals/.
The corrupted-certificate fixture is expected to fail its supplied certificate.
"""

import sys
from pathlib import Path
import logging

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from tautline.analysis.battery import battery_run, random_lambdas
from tautline.cli.signal_files import read_signal

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXPECTED_FAILURES = {"corrupted_certificate.json": ["supplied_certificate"]}


def fixture_files(data_dir: Path):
    """Lists the signal files, logging what was found."""
    files = sorted(list(data_dir.glob("*.json")) + list(data_dir.glob("*.csv")))
    if not files:
        logger.error(f"❌ No signal files in {data_dir}")
        return []

    logger.info(f"📚 Found {len(files)} fixtures:")
    for i, path in enumerate(files, 1):
        logger.info(f"  {i}. {path.name}")
    return files


def main():
    logger.info("🚀 Verifying bundled fixtures")
    logger.info("=" * 60)

    data_dir = Path(__file__).parent.parent / "data" / "signals"
    if not data_dir.exists():
        logger.error(f"❌ Folder not found: {data_dir}")
        return 2

    files = fixture_files(data_dir)
    if not files:
        return 2

    surprises = 0
    for path in files:
        rng = np.random.default_rng(0)
        signal_file = read_signal(path)
        f = signal_file.signal
        run = battery_run(path.name, f, random_lambdas(rng, f), rng, certificate=signal_file.certificate)
        expected = EXPECTED_FAILURES.get(path.name, [])
        if run["failed"] == expected:
            logger.info(f"  ✅ {path.name}: failed checks {expected or 'none'} as expected")
        else:
            surprises += 1
            logger.error(f"  ❌ {path.name}: failed {run['failed']}, expected {expected}")

    logger.info("=" * 60)
    if surprises:
        logger.error(f"❌ {surprises} fixture(s) did not behave as expected")
        return 1
    logger.info("🎉 All fixtures behave as expected")
    return 0


if __name__ == "__main__":
    sys.exit(main())
