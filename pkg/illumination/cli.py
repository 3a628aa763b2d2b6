"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 usage or domain error.
"""

import argparse
import json
import logging
import math
import sys

import numpy as np

from .chernoff_engine import chernoff_bound
from .constants import (
    DEFAULT_SEED,
    FIGURE_DEFAULTS,
    ORACLE_AGREEMENT_TOL,
    ORACLE_MAX_NBAR,
    ORACLE_MAX_NS,
    PROBE_MATCH_TOL,
    PROBES,
)
from .errors import (
    ConvergenceError,
    IlluminationError,
    NonPhysicalStateError,
    OracleBudgetError,
    ParameterError,
    TruncationError,
)
from .fock_oracle import coherent_amplitudes, oracle_chernoff_bound, tmsv_amplitudes
from .io_utils import dump_record, load_json, rows_to_csv, rows_to_json, write_metadata, write_table
from .probe_optimizer import optimize_single, optimize_two
from .sweeps import SWEEP_COLUMNS, FORMATS, FigureSpec, SweepConfig, chernoff_row, figure_rows, run_sweep
from .target_model import ProbeSpec, TargetParams

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

_SINGLE_CUTOFF = 40
_TWO_CUTOFF = 60


class CheckFailed(Exception):
    """A numerical check ran but did not pass."""


# --- argparse types ---

def _finite(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def unit_interval(text):
    value = _finite(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def non_negative(text):
    value = _finite(text)
    if value < 0.0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def positive(text):
    value = _finite(text)
    if value <= 0.0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


# --- Subcommands ---

def cmd_chernoff(args):
    row = chernoff_row((args.probe, args.r, args.kappa, args.nbar, args.ns), args.m)
    print(dump_record(row))
    return EXIT_OK


def cmd_sweep(args):
    mapping = load_json(args.config) if args.config else {}
    config = SweepConfig.from_mapping(
        mapping,
        probes=args.probe,
        r=args.r,
        kappa=args.kappa,
        nbar=args.nbar,
        ns=args.ns,
        m=args.m,
        out=args.out,
        fmt=args.format,
        workers=args.workers,
    )
    rows = run_sweep(config)
    if config.out:
        write_table(config.out, SWEEP_COLUMNS, rows, config.fmt)
    else:
        text = rows_to_csv(SWEEP_COLUMNS, rows) if config.fmt == "csv" else rows_to_json(SWEEP_COLUMNS, rows)
        sys.stdout.write(text)
    return EXIT_OK


def cmd_figure(args):
    spec = FigureSpec.defaults(
        args.figure,
        ns=args.ns,
        kappa=args.kappa,
        nbar=args.nbar,
        r=args.r,
        m=args.m,
    )
    out = args.out or f"{spec.figure_id}.{args.format}"
    rows = figure_rows(spec, args.workers)
    write_table(out, spec.columns, rows, args.format)
    write_metadata(out, spec.metadata())
    return EXIT_OK


def cmd_oracle_check(args):
    if not args.allow_large and (args.nbar > ORACLE_MAX_NBAR or args.ns > ORACLE_MAX_NS):
        raise ParameterError(
            f"--nbar must be at most {ORACLE_MAX_NBAR} and --ns at most {ORACLE_MAX_NS} "
            f"for the oracle (got {args.nbar}, {args.ns}); pass --allow-large to override."
        )
    probe = ProbeSpec.from_name(args.probe, args.ns)
    params = TargetParams(args.r, args.kappa, args.nbar)
    q_gaussian = chernoff_bound(probe, params).q
    report = oracle_chernoff_bound(probe, params, args.cutoff)
    diff = abs(q_gaussian - report.q)
    print(dump_record({
        "probe": args.probe,
        "q_gaussian": q_gaussian,
        "q_oracle": report.q,
        "diff": diff,
        "cutoff": report.cutoff,
        "cutoff_delta_q": report.delta_q,
        "leakage": report.leakage,
    }))
    if diff > ORACLE_AGREEMENT_TOL:
        raise CheckFailed(f"Oracle and Gaussian bounds differ by {diff:.3e}.")
    return EXIT_OK


def cmd_optimal_probe(args):
    if args.mode == "single":
        cutoff = args.cutoff or _SINGLE_CUTOFF
        optimum = optimize_single(args.ns, cutoff, seed=args.seed)
        reference = coherent_amplitudes(args.ns, cutoff)
    else:
        if args.nbar is None or args.nbar <= 0.0:
            raise ParameterError("--nbar must be given and positive for --mode two.")
        cutoff = args.cutoff or _TWO_CUTOFF
        optimum = optimize_two(args.ns, args.nbar, cutoff, seed=args.seed)
        reference = tmsv_amplitudes(args.ns, cutoff)

    deviation = float(np.max(np.abs(optimum.coeffs - reference)))
    print(dump_record({
        "mode": args.mode,
        "ns": args.ns,
        "cutoff": cutoff,
        "max_deviation": deviation,
        "stationarity_residual": optimum.residual,
        "mu1": optimum.multipliers[0],
        "mu2": optimum.multipliers[1],
        "objective": optimum.objective,
        "restart_spread": optimum.restart_spread,
    }))
    if deviation > PROBE_MATCH_TOL:
        raise CheckFailed(f"Optimised coefficients deviate from the closed form by {deviation:.3e}.")
    return EXIT_OK


# --- Parser ---

def _add_point_flags(parser):
    parser.add_argument("--probe", choices=PROBES, default="coherent")
    parser.add_argument("--r", type=unit_interval, default=0.0, help="absorption parameter")
    parser.add_argument("--kappa", type=unit_interval, default=0.01, help="target reflectivity")
    parser.add_argument("--nbar", type=non_negative, default=1.0, help="background mean photon number")
    parser.add_argument("--ns", type=non_negative, default=0.5, help="signal mean photon number")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="illumination",
        description="Chernoff bounds for quantum illumination of an absorbing target.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chernoff", help="Chernoff bound at one parameter point")
    _add_point_flags(p)
    p.add_argument("--m", type=positive_int, default=1, help="copy count")
    p.set_defaults(func=cmd_chernoff)

    p = sub.add_parser("sweep", help="Chernoff bounds over a parameter grid")
    p.add_argument("--config", help="JSON sweep config; flags override its values")
    p.add_argument("--probe", choices=PROBES, action="append", help="repeat for several probes")
    p.add_argument("--r", help="grid: 'a,b,c' or 'start:stop:count'")
    p.add_argument("--kappa", help="grid")
    p.add_argument("--nbar", help="grid")
    p.add_argument("--ns", help="grid")
    p.add_argument("--m", type=positive_int)
    p.add_argument("--out")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--workers", type=positive_int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="Tables behind the published figures")
    p.add_argument("figure", choices=sorted(FIGURE_DEFAULTS))
    p.add_argument("--ns", type=non_negative)
    p.add_argument("--kappa", type=unit_interval)
    p.add_argument("--nbar", help="grid overriding the figure defaults")
    p.add_argument("--r", help="grid overriding the figure defaults")
    p.add_argument("--m", type=positive_int)
    p.add_argument("--out")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--workers", type=positive_int, default=1)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("oracle-check", help="Compare the Gaussian bound with the Fock-space oracle")
    _add_point_flags(p)
    p.add_argument("--cutoff", type=positive_int, help="starting cutoff (default: tail rule)")
    p.add_argument("--allow-large", action="store_true", help="skip the desk-scale guard")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("optimal-probe", help="Certify the optimal perturbative probes")
    p.add_argument("--mode", choices=("single", "two"), default="single")
    p.add_argument("--ns", type=positive, required=True)
    p.add_argument("--nbar", type=positive)
    p.add_argument("--cutoff", type=positive_int)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_optimal_probe)
    return parser


def _configure_logging(verbosity):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s - %(levelname)s - %(message)s", stream=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except (CheckFailed, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except (ParameterError, NonPhysicalStateError, OracleBudgetError, TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IlluminationError, OSError, json.JSONDecodeError) as exc:
        logger.debug("Unhandled domain error", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
