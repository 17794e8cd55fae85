import argparse
import logging
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv

from tautline.cli.commands import cmd_denoise, cmd_isotonic, cmd_sweep, cmd_verify
from tautline.config import log_level
from tautline.errors import (
    DomainMismatchError,
    InvalidSignalError,
    ParameterError,
    SignalFormatError,
    TautlineError,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

EXIT_FAILED = 1
EXIT_IO = 2
EXIT_FORMAT = 3
EXIT_PARAMETER = 4


def _add_lambda_grid(parser: argparse.ArgumentParser, required: bool) -> None:
    parser.add_argument("--lambda-min", dest="lambda_min", type=float, required=required)
    parser.add_argument("--lambda-max", dest="lambda_max", type=float, required=required)
    parser.add_argument("--count", type=int, default=16 if required else 4)
    parser.add_argument("--scale", choices=("log", "linear"), default="log")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tautline", description="1-D total-variation denoising with the taut string"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    denoise = commands.add_parser("denoise", help="denoise a signal for one lambda")
    denoise.add_argument("--input", required=True, help="CSV or JSON signal file")
    denoise.add_argument("--lambda", dest="lam", type=float, required=True)
    denoise.add_argument("--output", required=True, help="denoised signal (.csv or .json)")
    denoise.add_argument("--emit-string", action="store_true", help="write <stem>.string.csv")
    denoise.add_argument("--emit-certificate", action="store_true", help="write <stem>.certificate.csv")
    denoise.add_argument(
        "--emit-tube", action="store_true", help="write <stem>.tube.csv and <stem>.contacts.csv"
    )
    denoise.add_argument("--diagnostics", help="JSON file for J(f), J(u), e, gnorm and duality gap")
    denoise.set_defaults(handler=cmd_denoise)

    isotonic = commands.add_parser("isotonic", help="non-decreasing least-squares fit")
    isotonic.add_argument("--input", required=True)
    isotonic.add_argument("--output", required=True)
    isotonic.add_argument(
        "--emit-envelope",
        action="store_true",
        help="write <stem>.envelope.csv and <stem>.cumulative.csv",
    )
    isotonic.set_defaults(handler=cmd_isotonic)

    sweep = commands.add_parser("sweep", help="value function over a lambda grid")
    sweep.add_argument("--input", required=True)
    _add_lambda_grid(sweep, required=True)
    sweep.add_argument("--output", required=True, help="CSV table")
    sweep.set_defaults(handler=cmd_sweep)

    verify = commands.add_parser("verify", help="run the full check battery")
    source = verify.add_mutually_exclusive_group(required=True)
    source.add_argument("--input")
    source.add_argument("--random", type=int, help="number of random signals")
    verify.add_argument("--seed", type=int, default=0)
    _add_lambda_grid(verify, required=False)
    verify.add_argument("--report", required=True, help="JSON report")
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else log_level(), format=LOG_FORMAT)

    try:
        return args.handler(args)
    except OSError as e:
        logger.error(f"❌ I/O error: {e}")
        return EXIT_IO
    except (SignalFormatError, InvalidSignalError, DomainMismatchError) as e:
        logger.error(f"❌ Bad signal: {e}")
        return EXIT_FORMAT
    except ParameterError as e:
        logger.error(f"❌ Bad parameter: {e}")
        return EXIT_PARAMETER
    except TautlineError as e:
        logger.error(f"❌ {type(e).__name__}: {e}", exc_info=True)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
