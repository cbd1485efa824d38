#!/usr/bin/env python3
"""
Command line entry point.

Exit codes: 0 success, 1 verification failure, 2 no radial representation,
64 usage or parameter error.
"""

import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from src.cli.commands import HANDLERS
from src.cli.schemas import RunConfig
from src.core.exceptions import AqfockError, NonExistence, ParameterError
from src.core.logging_config import log, setup_logging

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_NON_EXISTENCE = 2
EXIT_USAGE = 64

EPILOG = """\
output formats:
  measure   JSON {"schema": "aqfock/1", "alpha", "q", "atoms": [{"r", "w"}], "truncation": {"tol", "terms", "residual"}}
            CSV  r,w (positions ascending)
  classify  JSON {"schema", "alpha", "q", "exists", "branch", "reason"}; CSV alpha,q,exists,branch,reason
  moments   k,target,tridiagonal,quadrature,radial: target = (-alpha;q)_k [k]_q! and radial
            are radial moments int r^2k; tridiagonal and quadrature are m_2k of nu
  density   x,density
  typeb     k,gram_norm,fock_norm,vacuum_moment,tridiagonal_moment
  verify    suite,name,residual,tolerance,passed,detail
  sweep     alpha,q,exists,branch,min_weight (sorted by alpha, q)
tables default to CSV; --format json wraps them in {"schema", "command", "columns", "rows"}.
AQFOCK_PRECISION=extended accumulates q-products with mpmath.
"""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser exiting with the usage code instead of 2"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="aqfock",
        description="Radial Bargmann representations of the (alpha,q)-Gaussian law",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=sorted(HANDLERS), help="What to compute")
    parser.add_argument("--alpha", type=float, default=None, help="alpha in (-1, 1)")
    parser.add_argument("--q", type=float, default=None, help="q in (-1, 1)")
    parser.add_argument("--t", type=float, default=None, help="t-deformation, t >= 1 (measure)")
    parser.add_argument("--kmax", type=int, default=12, help="Highest moment index (default: 12)")
    parser.add_argument("--dim", type=int, default=24, help="One-mode truncation dimension (default: 24)")
    parser.add_argument("--n", type=int, default=3, help="Type-B rank (default: 3)")
    parser.add_argument("--tol", type=float, default=None, help="Truncation tolerance")
    parser.add_argument("--quad-order", type=int, default=None, help="Gauss-Legendre order (default: 400)")
    parser.add_argument("--format", choices=["json", "csv"], default=None, help="Output format")
    parser.add_argument("--output", type=str, default=None, help="Output file (default: stdout)")
    parser.add_argument("--force", action="store_true", help="Emit the signed measure when none exists")
    parser.add_argument("--suite", type=str, default="all", help="qcalc, radial, density, fock1, typeb or all")
    parser.add_argument("--grid", type=int, default=41, help="Points per axis (default: 41)")
    parser.add_argument("--eps", type=float, default=None, help="Tolerance for alpha = q (default: exact)")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        setup_logging("DEBUG")

    try:
        cfg = RunConfig(**vars(args))
    except ValidationError as e:
        errors = "; ".join(f"{'.'.join(map(str, err['loc'])) or 'config'}: {err['msg']}" for err in e.errors())
        print(f"aqfock: invalid arguments: {errors}", file=sys.stderr)
        return EXIT_USAGE

    try:
        text, code = HANDLERS[cfg.command](cfg)
    except NonExistence as e:
        print(f"aqfock: no radial representation: {e}", file=sys.stderr)
        return EXIT_NON_EXISTENCE
    except (ParameterError, ValidationError) as e:
        print(f"aqfock: {e}", file=sys.stderr)
        return EXIT_USAGE
    except AqfockError as e:
        log.error(f"{cfg.command} failed: {e}")
        return EXIT_VERIFY_FAILED

    if cfg.output:
        cfg.output.write_text(text, encoding="utf-8")
        log.info(f"Results saved to: {cfg.output}")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
