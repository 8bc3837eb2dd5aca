"""Command line: ``pfdavg run | table2 | export``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .faulttree import DEFAULT_POINTS_PER_INTERVAL, TimeCurve, average_pfd_ft
from .markov import SolverError, build_markov, unavailability_curve
from .petri import PetriError, estimate_pfd, history_fractions, write_histories_csv
from .report import METHODS, Cell, ComparisonReport, MethodOptions, format_sig, run_method, table2
from .scenario import CASE_IDS, Scenario, ScenarioError, builtin_case, parse_scenario

EXIT_INPUT = 2
EXIT_SOLVER = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load(args) -> tuple[str, Scenario]:
    if args.case:
        return args.case, builtin_case(args.case)
    path = Path(args.scenario)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliError(f"cannot read scenario file: {exc}", EXIT_INPUT) from None
    return path.stem, parse_scenario(text)


def _options(args) -> MethodOptions:
    return MethodOptions(histories=args.histories, seed=args.seed, confidence=args.confidence,
                         points_per_interval=args.grid_points_per_interval)


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_SOLVER) from None


def _describe(cell) -> str:
    m = cell.meta
    if cell.method == "equations":
        extra = (f"valid_dut={str(m['valid_dut']).lower()} "
                 f"valid_duu={str(m['valid_duu']).lower()} "
                 f"lambda_DUT*T1={m['dut_exposure']:.3g} lambda_DUU*T0={m['duu_exposure']:.3g}")
    elif cell.method == "fault_tree":
        extra = f"grid_points_per_interval={m['grid_points']}"
    elif cell.method == "markov":
        extra = f"states={m['states']} tolerance={m['tolerance']:.0e}"
    else:
        rel = m["half_width"] / cell.value if cell.value else 0.0
        extra = (f"ci{round(100 * m['confidence'])}=±{format_sig(m['half_width'])} "
                 f"(±{100 * rel:.3g}%) histories={m['histories']} seed={m['seed']}")
    return f"{cell.case}  {cell.method:<10}  {format_sig(cell.value)}  {extra}\n"


def cmd_run(args) -> int:
    name, s = _load(args)
    options = _options(args)
    methods = METHODS if args.method == "all" else (args.method,)
    cells = []
    for method in methods:
        if method == "petri" and args.dump_histories:
            fractions = history_fractions(s, options.histories, options.seed)
            est = estimate_pfd(s, options.histories, options.seed, options.confidence,
                               samples=fractions)
            try:
                write_histories_csv(args.dump_histories, fractions)
            except OSError as exc:
                raise CliError(f"cannot write {args.dump_histories}: {exc}", EXIT_SOLVER)
            cell = Cell(name, "petri", est.mean, {
                "half_width": est.half_width, "confidence": est.confidence,
                "histories": est.histories, "seed": est.seed})
        else:
            cell = run_method(s, method, options, case=name)
        if method == "markov" and args.dump_states:
            try:
                build_markov(s).write_states_csv(args.dump_states)
            except OSError as exc:
                raise CliError(f"cannot write {args.dump_states}: {exc}", EXIT_SOLVER)
        cells.append(cell)
    if args.format == "csv":
        _emit(ComparisonReport(cells).to_csv(), args.out)
    else:
        _emit("".join(_describe(c) for c in cells), args.out)
    return 0


def cmd_table2(args) -> int:
    methods = METHODS if args.method == "all" else (args.method,)
    report = table2(_options(args), methods=methods)
    _emit(report.to_csv() if args.format == "csv" else report.to_text(), args.out)
    return 0


def cmd_export(args) -> int:
    if args.method not in ("fault_tree", "markov"):
        raise CliError("no time curve for this method", EXIT_INPUT)
    _, s = _load(args)
    if args.method == "fault_tree":
        curve = average_pfd_ft(s, args.grid_points_per_interval).curve
    else:
        t, p = unavailability_curve(s, args.grid_points_per_interval)
        curve = TimeCurve(t, p)
    try:
        curve.write_csv(args.out, value_header="unavailability")
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}", EXIT_SOLVER) from None
    return 0


def _common(p: argparse.ArgumentParser, scenario: bool = True):
    if scenario:
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--case", choices=CASE_IDS)
        src.add_argument("--scenario", metavar="FILE")
    p.add_argument("--histories", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--confidence", type=float, default=0.90)
    p.add_argument("--grid-points-per-interval", type=int, default=DEFAULT_POINTS_PER_INTERVAL)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfdavg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate one scenario")
    _common(run)
    run.add_argument("--method", choices=(*METHODS, "all"), default="all")
    run.add_argument("--format", choices=("text", "csv"), default="text")
    run.add_argument("--out")
    run.add_argument("--dump-states", metavar="CSV", help="markov state space")
    run.add_argument("--dump-histories", metavar="CSV", help="per-history petri results")
    run.set_defaults(func=cmd_run)

    t2 = sub.add_parser("table2", help="all methods on the six built-in cases")
    _common(t2, scenario=False)
    t2.add_argument("--method", choices=(*METHODS, "all"), default="all")
    t2.add_argument("--format", choices=("text", "csv"), default="text")
    t2.add_argument("--out")
    t2.set_defaults(func=cmd_table2)

    ex = sub.add_parser("export", help="time curve as CSV")
    _common(ex)
    ex.add_argument("--method", choices=METHODS, required=True)
    ex.add_argument("--out", required=True)
    ex.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, PetriError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
