"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 numerical failure or resource
cap, 3 property-suite failure.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import sys

from strongconverse.binning import bin_density, binning_divergence_gap
from strongconverse.checks import SUITES, run_suites
from strongconverse.divergence import (
    check_alpha,
    cutoff_rate,
    hoeffding_anti_divergence,
    log_q_star,
    petz_renyi,
    sandwiched_renyi,
)
from strongconverse.errors import NumericalError, TolOutOfRange, ValidationError
from strongconverse.exponents import ENGINES, convergence_sweep
from strongconverse.pairfile import load_pair, write_csv

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1), not argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from exc
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="strongconverse",
                     description="Renyi divergences and strong converse exponents for state pairs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, pair=True):
        p = sub.add_parser(name, help=help_text)
        if pair:
            p.add_argument("--pair", required=True,
                           help="pair file path or bundled fixture name")
        p.add_argument("--tol", type=float, default=1e-6, help="optimizer tolerance in (0, 1e-2]")
        p.add_argument("--seed", type=_seed, default=0, help="unsigned 64-bit RNG seed")
        p.add_argument("--out", default="-", help="output path (default stdout)")
        return p

    p = add("divergence", "sandwiched and Petz Renyi divergences")
    p.add_argument("--alpha", type=_floats, default=[1.5, 2.0], help="comma-separated orders")

    p = add("exponent", "finite-n strong converse exponents b_n(r)")
    p.add_argument("--r", type=float, required=True, help="rate: type-II budget exp(-n r)")
    p.add_argument("--n-schedule", type=_ints, default=[1, 2, 4, 8], help="ascending copy numbers")
    p.add_argument("--engine", choices=ENGINES, default="auto", help="Neyman-Pearson solver")

    p = add("check", "run seeded property suites", pair=False)
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")

    p = add("bin", "geometric spectral binning of eta")
    p.add_argument("--k", type=int, required=True, help="ladder ratio 1 + 1/k")
    p.add_argument("--alpha", type=_floats, default=[1.5, 2.0, 4.0], help="comma-separated orders")

    p = add("cutoff", "generalised cutoff rate")
    p.add_argument("--kappa", type=_floats, required=True, help="comma-separated values in (0, 1)")

    p = add("hoeffding", "Hoeffding anti-divergence H*_r")
    p.add_argument("--r", type=_floats, required=True, help="comma-separated rates")
    return parser


def _cmd_divergence(args, out):
    pair = load_pair(args.pair).state_pair()
    rows = []
    for a in sorted(check_alpha(x) for x in args.alpha):
        petz = petz_renyi(pair, a) if a <= 2.0 else math.nan
        rows.append((a, sandwiched_renyi(pair, a), petz, math.exp(log_q_star(pair, a))))
    write_csv(out, ("alpha", "sandwiched", "petz", "q_star"), rows)


def _cmd_exponent(args, out):
    pair = load_pair(args.pair).pair
    rep = convergence_sweep(pair, args.r, args.n_schedule, args.engine, args.tol)
    rows = [(rec.n, rec.b_n, abs(rec.b_n - rep.h_star), rec.engine, rec.duality_gap)
            for rec in rep.records]
    write_csv(out, ("n", "b_n", "gap_to_h_star", "engine", "duality_gap"), rows)


def _cmd_bin(args, out):
    pair = load_pair(args.pair).state_pair()
    b = bin_density(pair.eta, args.k)
    gaps = binning_divergence_gap(pair, args.k, args.alpha)
    write_csv(out, ("k", "bin_count", "spectrum_bound", "max_divergence_gap", "log_ratio"),
              [(args.k, b.bin_count, b.spectrum_bound, max(g for _, g in gaps),
                math.log1p(1.0 / args.k))])


def _cmd_cutoff(args, out):
    pair = load_pair(args.pair).state_pair()
    rows = []
    for kappa in sorted(args.kappa):
        v = cutoff_rate(pair, kappa, args.tol)
        order = 1.0 / (1.0 - kappa)
        rows.append((kappa, v, order, sandwiched_renyi(pair, order)))
    write_csv(out, ("kappa", "cutoff_rate", "renyi_order", "sandwiched_at_order"), rows)


def _cmd_hoeffding(args, out):
    pair = load_pair(args.pair).state_pair()
    rows = []
    for r in sorted(args.r):
        h = hoeffding_anti_divergence(pair, r, args.tol)
        rows.append((r, h.value, h.arg_alpha, h.truncation_bound))
    write_csv(out, ("r", "h_star", "arg_alpha", "truncation_bound"), rows)


def _cmd_check(args, out):
    results = run_suites(args.suite, args.seed)
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        detail = f" ({r.detail})" if r.detail else ""
        print(f"{status} [{r.suite}] {r.name}{detail}", file=out)
    print(f"{len(results) - len(failed)}/{len(results)} assertions passed", file=out)
    return EXIT_CHECK if failed else EXIT_OK


_COMMANDS = {
    "divergence": _cmd_divergence,
    "exponent": _cmd_exponent,
    "bin": _cmd_bin,
    "cutoff": _cmd_cutoff,
    "hoeffding": _cmd_hoeffding,
    "check": _cmd_check,
}


@contextlib.contextmanager
def _output(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if not 0.0 < args.tol <= 1e-2:
            raise TolOutOfRange(f"tol must lie in (0, 1e-2], got {args.tol}")
        with _output(args.out) as out:
            code = _COMMANDS[args.command](args, out)
        return EXIT_OK if code is None else code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
