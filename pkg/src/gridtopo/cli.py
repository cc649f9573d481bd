"""``gridtopo`` command line.

JSON reports go to stdout (or ``--output``), diagnostics to stderr.
Exit codes: 0 success, 1 bad input, 2 ran fine but the admittances are not
uniquely identifiable (``estimate``) or the rigidity check failed
(``rigidity-check``).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .estimation import (
    DEFAULT_ZERO_TOL,
    OutOfDomainError,
    analyze_identifiability,
    coefficient_from_measurements,

    estimate_admittance,
    estimation_report,
    expected_rank,
    extract_topology,
    min_measurements,
)
from .linalg import DEFAULT_RANK_TOL
from .topology import edge_count
from .measurements import MeasurementError, read_measurements_csv, write_measurements_csv
from .rigidity import check_equivalence
from .simulator import NetworkError, VoltageProfileSpec, generate_measurements, load_network

EXIT_OK, EXIT_INPUT, EXIT_NOT_UNIQUE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would collide with EXIT_NOT_UNIQUE
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(payload: dict, output: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if output in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load(path: str, conjugate: bool):
    mset = read_measurements_csv(path)
    return mset.conjugated_voltages() if conjugate else mset


def run_estimate(args) -> int:
    mset = _load(args.measurements, args.conjugate_voltages)
    cm = coefficient_from_measurements(mset)
    est = estimate_admittance(cm, rank_tol_rel=args.rank_tol)
    net = extract_topology(est.y, args.zero_tol, est.residual_norm)
    _emit(estimation_report(est, net), args.output)
    if not est.report.unique:
        print(f"rank {est.report.achieved_rank} < {est.report.e} unknowns: admittances not "
              f"uniquely identifiable (need tau >= {est.report.min_tau})", file=sys.stderr)
        return EXIT_NOT_UNIQUE
    return EXIT_OK


def identifiability_forecast(n: int, tau: int) -> dict:
    rank = expected_rank(n, tau)
    unknowns = edge_count(n)
    return {
        "expected_rank": rank,
        "unknowns": unknowns,
        "min_tau": min_measurements(n),
        "unique_expected": rank == unknowns,
    }


def run_identifiability(args) -> int:
    if args.nodes < 2:
        raise UsageError(f"--nodes must be >= 2, got {args.nodes}")
    _emit(identifiability_forecast(args.nodes, args.tau), args.output)
    return EXIT_OK


def run_simulate(args) -> int:
    net = load_network(args.network)
    spec = VoltageProfileSpec(
        mode=args.profile, nominal=args.nominal, perturbation=args.perturb, seed=args.seed)
    mset = generate_measurements(net, spec, args.tau)
    data = write_measurements_csv(mset)
    if args.output in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(args.output, "wb") as fh:
            fh.write(data)
    report = analyze_identifiability(coefficient_from_measurements(mset))
    try:
        forecast = f"generic rank {expected_rank(net.n, args.tau)}"
    except OutOfDomainError:
        forecast = "tau > n, generic rank formula not applicable"
    print(f"n={net.n} tau={args.tau}: {forecast}, achieved rank {report.achieved_rank} of "
          f"{report.e} unknowns, {'unique' if report.unique else 'NOT unique'} "
          f"(minimum tau {report.min_tau})", file=sys.stderr)
    return EXIT_OK


def run_rigidity_check(args) -> int:
    mset = _load(args.measurements, args.conjugate_voltages)
    report = check_equivalence(coefficient_from_measurements(mset), mset, tol=args.tol)
    _emit(report.to_dict(), args.output)
    return EXIT_OK if report.ok else EXIT_NOT_UNIQUE


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridtopo", description=(
        "Identify grid topology and line admittances from nodal voltage/current phasors."))
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug output to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, measurements=True):
        if measurements:
            p.add_argument("--measurements", required=True, help="measurement CSV")
            p.add_argument("--conjugate-voltages", action="store_true",
                           help="conjugate voltage phasors on load (opposite angle convention)")
        p.add_argument("--output", default=None, help="output path (default stdout)")

    p = sub.add_parser("estimate", help="estimate admittances and topology")
    common(p)
    p.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    p.add_argument("--zero-tol", type=float, default=DEFAULT_ZERO_TOL)
    p.set_defaults(func=run_estimate)

    p = sub.add_parser("identifiability", help="rank forecast for n nodes and tau snapshots")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--tau", type=_positive_int, required=True)
    common(p, measurements=False)
    p.set_defaults(func=run_identifiability)

    p = sub.add_parser("simulate", help="forward-simulate measurements for a network")
    p.add_argument("--network", required=True, help="network JSON")
    p.add_argument("--tau", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", choices=("random", "perturbed"), default="perturbed")
    p.add_argument("--nominal", type=float, default=1.0)
    p.add_argument("--perturb", type=float, default=0.05)
    common(p, measurements=False)
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("rigidity-check", help="compare A(v)^T with the rigidity matrix")
    common(p)
    p.add_argument("--tol", type=float, default=DEFAULT_RANK_TOL)
    p.set_defaults(func=run_rigidity_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except (MeasurementError, NetworkError, OutOfDomainError, UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
