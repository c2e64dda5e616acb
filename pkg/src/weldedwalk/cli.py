"""Command-line front end.

Every subcommand writes CSV (or the instance format for ``gen``) to ``--out``
or stdout. Outputs start with a ``#`` comment carrying the full configuration
and files are replaced atomically. Exit status: 0 success, 1 a check failed,
2 usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable

from . import amplify, edgewalk, graph, reduced, spectrum

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _config_comment(args: argparse.Namespace) -> str:
    items = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return "# weldedwalk " + " ".join(f"{k}={v}" for k, v in items.items())


def _emit(args: argparse.Namespace, lines: Iterable[str], comment: bool = True) -> None:
    text = "\n".join(([_config_comment(args)] if comment else []) + list(lines)) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(args.out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".weldedwalk-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, args.out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _n_values(args: argparse.Namespace, default_min: int | None = None) -> list[int]:
    if args.n is not None:
        if args.n_min is not None or args.n_max is not None:
            raise UsageError("give either --n or --n-min/--n-max, not both")
        return [args.n]
    lo = args.n_min if args.n_min is not None else default_min
    if lo is None or args.n_max is None:
        raise UsageError("--n or --n-min/--n-max is required")
    if lo > args.n_max:
        raise UsageError("--n-min exceeds --n-max")
    return list(range(lo, args.n_max + 1))


def _require_n(args: argparse.Namespace) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    return args.n


def _map(fn: Callable, values: list[int], jobs: int) -> list:
    if jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, values))
    return [fn(v) for v in values]


def cmd_gen(args) -> int:
    tree = graph.generate(_require_n(args), args.seed)
    # the instance header already records n, seed and rng
    _emit(args, graph.dumps(tree).splitlines(), comment=False)
    return EXIT_OK


def _load_or_generate(args) -> graph.WeldedTree:
    if args.instance:
        return graph.load(args.instance)
    return graph.generate(_require_n(args), args.seed)


def cmd_walk_full(args) -> int:
    tree = _load_or_generate(args)
    steps = args.steps if args.steps is not None else 3 * tree.n
    ledger = graph.QueryLedger()
    state = edgewalk.initial_state(tree, ledger)
    lines = ["t,p_exit,norm_sq,residual"]
    for t in range(steps + 1):
        if t > 0:
            state = edgewalk.walk_step(tree, state, ledger, args.cost)
        _, residual = edgewalk.project_reduced(tree, state)
        p = edgewalk.vertex_probability(tree, state, tree.exit)
        lines.append(f"{t},{p:.15g},{state.norm_sq():.15g},{residual:.3e}")
    lines.append(f"# oracle_calls={ledger.quantum_oracle_calls}")
    _emit(args, lines)
    return EXIT_OK


def cmd_walk_reduced(args) -> int:
    n = _require_n(args)
    if args.steps is None:
        raise UsageError("--steps is required")
    kind = "exact" if args.exact else "float"
    amp = reduced.target_amplitude(n, args.steps, kind)
    if args.exact:
        lines = ["n,steps,target_amplitude,exact", f"{n},{args.steps},{float(amp):.15g},{amp}"]
    else:
        lines = ["n,steps,target_amplitude", f"{n},{args.steps},{amp:.15g}"]
    _emit(args, lines)
    return EXIT_OK


def cmd_predetermine(args) -> int:
    lines = ["n,T,amplitude_modulus"]
    for n in _n_values(args):
        T, amp = reduced.predetermine_T(n, args.window)
        lines.append(f"{n},{T},{amp:.15g}")
    _emit(args, lines)
    return EXIT_OK


def cmd_scan(args) -> int:
    ns = _n_values(args, default_min=6)
    rows = reduced.conjecture_scan(ns[0], ns[-1], jobs=args.jobs)
    _emit(args, [reduced.SCAN_HEADER] + [r.csv() for r in rows])
    return EXIT_OK if all(r.passed for r in rows) else EXIT_CHECK_FAILED


def cmd_table(args) -> int:
    ns = _n_values(args) if (args.n is not None or args.n_max is not None) else sorted(reduced.TABLE2)
    lines = ["n,T,value,fingerprint,fingerprint_reduced,reference,odd_factors_divide,ratio_to_reference,exact"]
    ok = True
    for n in ns:
        row = reduced.table_row(n)
        ref = "" if row.reference is None else str(row.reference)
        divides = "" if row.odd_factors_divide is None else str(row.odd_factors_divide).lower()
        ratio = "" if row.ratio_to_reference is None else str(row.ratio_to_reference)
        exact = str(row.amplitude) if args.exact else ""
        lines.append(
            f"{n},{row.T},{row.value:.15g},{row.fingerprint},{row.fingerprint.cancel_threes()},"
            f"{ref},{divides},{ratio},{exact}"
        )
        ok &= row.odd_factors_divide is not False
    _emit(args, lines)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_spectrum(args) -> int:
    n = _require_n(args)
    spec = spectrum.build_spectrum(n)
    _emit(args, spec.csv_rows())
    return EXIT_OK


def cmd_gap_check(args) -> int:
    gaps = _map(spectrum.phase_gap, _n_values(args, default_min=2), args.jobs)
    _emit(args, [spectrum.GAP_HEADER] + [g.csv() for g in gaps])
    return EXIT_OK if all(g.passed for g in gaps) else EXIT_CHECK_FAILED


def _avg_row(n: int) -> tuple[int, int, int, float, float]:
    k = math.ceil(math.log2(5 * n))
    T = math.ceil(3.6 * n)
    exact, lower = spectrum.average_probability(n, T, k)
    return n, T, k, exact, lower


def cmd_avg_bound(args) -> int:
    rows = _map(_avg_row, _n_values(args, default_min=10), args.jobs)
    lines = ["n,T,k,exact_average,lower_bound,pass"]
    ok = True
    for n, T, k, exact, lower in rows:
        passed = exact >= lower
        ok &= passed
        lines.append(f"{n},{T},{k},{exact:.15g},{lower:.15g},{str(passed).lower()}")
    _emit(args, lines)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_theorem_check(args) -> int:
    ns = _n_values(args, default_min=6)
    rows = _map(spectrum.theorem_check, ns, args.jobs)
    lines = ["n,max_p,bound,pass"]
    for n, (best, bound, passed) in zip(ns, rows):
        lines.append(f"{n},{best:.15g},{bound:.15g},{str(passed).lower()}")
    _emit(args, lines)
    return EXIT_OK if all(r[2] for r in rows) else EXIT_CHECK_FAILED


def cmd_frames(args) -> int:
    n = _require_n(args)
    steps = args.steps if args.steps is not None else 3 * n
    rows = reduced.emit_frames(n, steps)
    _emit(args, [reduced.FRAMES_HEADER] + [f"{t},{k},{a:.15g}" for t, k, a in rows])
    return EXIT_OK


def cmd_deterministic(args) -> int:
    n = _require_n(args)
    plan = amplify.make_plan(n, args.window)
    final, _ = amplify.run_deterministic(n, plan, cost=args.cost)
    lines = [
        amplify.REPORT_HEADER,
        f"{n},{plan.T1},{plan.p_T1:.15g},{plan.T2},{plan.alpha:.15g},{final:.15g},"
        f"{amplify.query_total(plan, 2)},{amplify.query_total(plan, 4)}",
    ]
    ok = final >= 1 - 1e-9
    if args.full:
        tree = _load_or_generate(args)
        found, ledger = amplify.run_deterministic(tree, plan, cost=args.cost, seed=args.seed)
        width = (2 * tree.n + 3) // 4
        correct = found == tree.name_of(tree.exit)
        ok &= correct
        lines += [
            "seed,exit_name,found_name,correct,oracle_calls",
            f"{args.seed},{tree.name_of(tree.exit):0{width}x},{found:0{width}x},{str(correct).lower()},"
            f"{ledger.quantum_oracle_calls}",
        ]
    _emit(args, lines)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_baseline(args) -> int:
    tree = _load_or_generate(args)
    name, queries = graph.classical_baseline(tree, args.seed)
    width = (2 * tree.n + 3) // 4
    _emit(args, ["n,seed,exit_name,classical_queries", f"{tree.n},{args.seed},{name:0{width}x},{queries}"])
    return EXIT_OK if name == tree.name_of(tree.exit) else EXIT_CHECK_FAILED


COMMANDS: dict[str, tuple[Callable, str]] = {
    "gen": (cmd_gen, "generate a random instance"),
    "walk-full": (cmd_walk_full, "run the walk on a concrete instance"),
    "walk-reduced": (cmd_walk_reduced, "target amplitude in the reduced model"),
    "predetermine": (cmd_predetermine, "choose the walk length T"),
    "scan": (cmd_scan, "best odd T in [2n, 2.5n] over a range of n"),
    "table": (cmd_table, "exact amplitudes with factor fingerprints"),
    "spectrum": (cmd_spectrum, "closed-form eigenpairs"),
    "gap-check": (cmd_gap_check, "theta and phase gaps against the 1/n bound"),
    "avg-bound": (cmd_avg_bound, "averaged success probability and its lower bound"),
    "theorem-check": (cmd_theorem_check, "max p(t) against 1/(20n)"),
    "frames": (cmd_frames, "nonzero reduced components per step"),
    "deterministic": (cmd_deterministic, "amplified exit finding with query accounting"),
    "baseline": (cmd_baseline, "classical random-walk baseline"),
}


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weldedwalk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name, (func, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--n", type=_positive)
        p.add_argument("--n-min", type=_positive)
        p.add_argument("--n-max", type=_positive)
        p.add_argument("--seed", type=int, default=0, help="instance and sampling seed (default 0)")
        p.add_argument("--steps", type=int, help="walk steps (default depends on the command)")
        p.add_argument("--exact", action="store_true", help="exact (a + b sqrt2)/3^e arithmetic")
        p.add_argument("--window", choices=("theorem", "conjecture"), default="theorem")
        p.add_argument("--cost", type=int, choices=edgewalk.COST_CONVENTIONS, default=4,
                       help="oracle calls charged per walk step (default 4)")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--jobs", type=_positive, default=1, help="worker processes for range commands")
        if name in ("walk-full", "baseline", "deterministic"):
            p.add_argument("--instance", help="instance file to load instead of generating one")
        if name == "deterministic":
            p.add_argument("--full", action="store_true", help="also run on a concrete instance and sample")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.steps is not None and args.steps < 0:
        parser.print_usage(sys.stderr)
        print("weldedwalk: error: --steps must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:  # capacity, window and parse errors are ValueErrors
        parser.print_usage(sys.stderr)
        print(f"weldedwalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
