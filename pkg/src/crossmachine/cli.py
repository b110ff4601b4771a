"""Command-line front end.

Exit status: 0 on success, 1 on usage errors, 2 on data or domain errors.
Results go to stdout; warnings and diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import data_io, experiments, runtime_model, signtest
from .runtime_model import (
    Applicability,
    biased_estimate,
    check_applicability,
    gamma_for,
    load_calibration,
)

USAGE_ERROR = 1
DATA_ERROR = 2

DEFAULT_GAMMA_GRID = tuple(round(0.05 * i, 2) for i in range(1, 21))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with status 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _die(message: str, status: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return status


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _emit_warnings(caught) -> None:
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)


def cmd_equivalent_runtime(args: argparse.Namespace) -> int:
    model, curve = load_calibration(args.calibration)
    gamma = gamma_for(args.p_gamma, curve)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        t2 = biased_estimate(args.t1, args.s1, args.s2, model, gamma)
    _emit_warnings(caught)
    print(f"{t2:.6f}")
    return 0


def cmd_corrected_p_value(args: argparse.Namespace) -> int:
    if not (0 <= args.k <= args.n) or args.n < 1:
        raise UsageError(f"need 0 <= k <= n and n >= 1, got n={args.n}, k={args.k}")
    if not (0 <= args.p_gamma < 1):
        raise UsageError(f"p_gamma must lie in [0, 1), got {args.p_gamma}")
    print(f"{signtest.corrected_p_value(args.p_gamma, args.n, args.k):.9f}")
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    matrix = data_io.parse_runtime_matrix(Path(args.matrix).read_text(encoding="utf-8"))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model, curve = runtime_model.calibrate(matrix, args.gamma_grid)
    _emit_warnings(caught)
    text = runtime_model.write_calibration(model, curve)
    Path(args.out).write_text(text, encoding="utf-8")
    n_mach, n_proc = matrix.runtimes.shape
    print(f"machines: {n_mach}")
    print(f"processes: {n_proc}")
    print(f"slope: {model.slope:.9g}")
    print(f"intercept: {model.intercept:.9g}")
    print(f"alpha: {model.alpha:.9g}")
    print(f"score range: {model.score_min:.9g} .. {model.score_max:.9g}")
    print(f"fit rmse: {model.fit_rmse:.9g}")
    print("gamma,p_gamma")
    for g, p in curve.points:
        print(f"{g:.6f},{p:.9f}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    table = data_io.parse_comparison(Path(args.table).read_text(encoding="utf-8"))
    s1 = args.s1 if args.s1 is not None else table.s1
    s2 = args.s2 if args.s2 is not None else table.s2
    direction = args.direction or table.direction
    table = data_io.ComparisonTable(table.rows, direction, table.machine1, table.machine2, s1, s2)
    notes: list[str] = []

    if s1 is not None or s2 is not None or args.estimate_runtimes:
        model, curve = load_calibration(args.calibration)
        for label, s in (("s1", s1), ("s2", s2)):
            if s is None:
                continue
            status = check_applicability(s, model)
            if status is Applicability.WARN_OUT_OF_RANGE:
                notes.append(
                    f"{label} = {s:g} lies outside the calibrated range "
                    f"[{model.score_min:g}, {model.score_max:g}]"
                )
            elif status is Applicability.ERROR_BEYOND_POLE:
                return _die(f"{label} = {s:g} is at or beyond the pole {model.alpha:g}", DATA_ERROR)

    if args.estimate_runtimes:
        if s1 is None or s2 is None:
            return _die("--estimate-runtimes needs machine scores (--s1, --s2)", DATA_ERROR)
        gamma = gamma_for(args.p_gamma, curve)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", runtime_model.OutOfRangeWarning)
            estimates = [biased_estimate(r.t1, s1, s2, model, gamma) for r in table.rows]
        table = table.with_estimates(estimates)
        print(f"estimated equivalent runtimes (p_gamma {args.p_gamma:.9f}, gamma {gamma:.9f})")
        print("instance,t1,t_hat2")
        for r in table.rows:
            print(f"{r.instance_id},{data_io._num(r.t1)},{r.t_hat2:.6f}")
        if not any(r.b_hat is not None for r in table.rows):
            for note in notes:
                print(f"warning: {note}", file=sys.stderr)
            return 0
        print()

    if not table.has_b_hat:
        return _die("the table lacks b_hat values (run B first, or pass --estimate-runtimes)", DATA_ERROR)
    result = signtest.run_comparison(table, args.p_gamma, args.alpha, direction)
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)
    sys.stdout.write(data_io.write_report(result, table, notes))
    return 0


def _fleet_matrix(args: argparse.Namespace):
    if args.matrix:
        return data_io.parse_runtime_matrix(Path(args.matrix).read_text(encoding="utf-8"))
    fleet = experiments.synthetic_fleet(
        args.machines, args.processes, args.noise, args.noise_level, args.seed
    )
    return experiments.simulate_fleet(fleet)


def cmd_validate(args: argparse.Namespace) -> int:
    out = sys.stdout
    if args.subtask == "type1":
        out.write("extra_pct,rejection_rate\n")
        for extra in args.extra:
            rate = experiments.type1_error_experiment(
                extra, args.instances, args.reps, args.alpha, args.seed
            )
            out.write(f"{extra:g},{rate:.9f}\n")
    elif args.subtask == "bound":
        rows = experiments.bound_check_experiment(args.n, args.p_gamma, args.reps, args.seed)
        out.write("k,empirical,std_error,corrected_p_value,satisfied\n")
        for r in rows:
            out.write(
                f"{r.k},{r.empirical:.9f},{r.std_error:.9f},{r.corrected:.9f},"
                f"{'true' if r.satisfied else 'false'}\n"
            )
    elif args.subtask == "ldr":
        values = experiments.prediction_errors(_fleet_matrix(args), args.method)
        out.write("x,y\n")
        for x, y in experiments.ecdf(values):
            out.write(f"{x:.9f},{y:.9f}\n")
    elif args.subtask == "pearson":
        mean, pairs = experiments.pairwise_pearson(_fleet_matrix(args))
        out.write("machine1,machine2,pearson\n")
        for m1, m2, r in pairs:
            out.write(f"{m1},{m2},{r:.9f}\n")
        out.write(f"mean,,{mean:.9f}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="crossmachine",
        description="Compare optimization algorithms run on different machines.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("equivalent-runtime", help="estimate the equivalent runtime on another machine")
    p.add_argument("p_gamma", type=float, help="accepted probability of overshooting the true runtime")
    p.add_argument("s1", type=float, help="score of the machine the runtime was measured on")
    p.add_argument("s2", type=float, help="score of the target machine")
    p.add_argument("t1", type=float, help="measured runtime in seconds")
    p.add_argument("--calibration", help=f"calibration file (default: ${runtime_model.CALIBRATION_ENV} or the shipped one)")
    p.set_defaults(func=cmd_equivalent_runtime)

    p = sub.add_parser("corrected-p-value", help="corrected one-sided sign-test p-value")
    p.add_argument("p_gamma", type=float)
    p.add_argument("n", type=int, help="number of untied instances")
    p.add_argument("k", type=int, help="instances on which A beat B")
    p.set_defaults(func=cmd_corrected_p_value)

    p = sub.add_parser("calibrate", help="fit a calibration file from a runtime matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--gamma-grid", type=_float_list, default=list(DEFAULT_GAMMA_GRID))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("compare", help="run the corrected sign test on a comparison table")
    p.add_argument("--table", required=True)
    p.add_argument("--p-gamma", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--direction", choices=signtest.DIRECTIONS)
    p.add_argument("--s1", type=float)
    p.add_argument("--s2", type=float)
    p.add_argument("--estimate-runtimes", action="store_true")
    p.add_argument("--calibration")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="emit validation series as CSV")
    p.add_argument("subtask", choices=("type1", "bound", "ldr", "pearson"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--extra", type=_float_list, default=[0.0, 8.0, 16.0, 32.0, 64.0])
    p.add_argument("--instances", type=int, default=16)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--p-gamma", type=float, default=0.01)
    p.add_argument("--matrix", help="runtime matrix CSV (default: a synthetic fleet)")
    p.add_argument("--machines", type=int, default=8)
    p.add_argument("--processes", type=int, default=64)
    p.add_argument("--noise", choices=experiments.NOISE_MODELS, default="lognormal")
    p.add_argument("--noise-level", type=float, default=0.05)
    p.add_argument("--method", choices=("equivalent", "same"), default="equivalent")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.func(args)
    except UsageError as exc:
        return _die(str(exc), USAGE_ERROR)
    except (ValueError, OSError) as exc:
        return _die(str(exc), DATA_ERROR)


if __name__ == "__main__":
    sys.exit(main())
