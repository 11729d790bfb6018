"""
maxlab command line.

    maxlab compute delta.json --beta 1/2 --points 0,1
    maxlab reproduce thm5 --beta 1/2 --jmax 20 --out reports/
    maxlab fuzz var-bound --trials 10000 --seed 42
    maxlab converge thm2 --jmax 50
    maxlab probe D --trials 100
    maxlab check f.json
    maxlab check --list
    maxlab violations

Exit codes: 0 success, 1 usage or input error, 2 verification failure or violation.
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from . import config
from .database import open_session
from .errors import DomainError, InvalidFunctionError, MaxlabError, UnsupportedVariantError, ViolationError
from .schemas import ExperimentReport, RunConfig, function_digest, json_value, load_function
from .services.check_registry import check_registry
from .services.counterexamples import Setting, reproduce_setting
from .services.experiments import (
    DISCRETE_FAMILIES,
    PWL_FAMILIES,
    THM1_THRESHOLD,
    THM2_THRESHOLD,
    converge_thm1,
    converge_thm2,
    fuzz_inequalities,
    probe_open_questions,
)
from .services.functions import DiscreteBVFunction, OperatorVariant, PiecewiseLinearFunction, Side, StepFunction, delta_at_origin
from .services.generators import RandomBVSpec
from .services.maxcont import RealWindow, evaluate_continuous
from .services.maxdisc import DiscreteWindow, MaxEvaluation, maximal_discrete
from .services.reporting import FORMATS, format_table, summary_lines, write_report
from .services.run_executor import RunExecutor, list_violations, mark_reviewed
from .services.scalar import ScalarMode, parse_scalar, to_text

logger = logging.getLogger(__name__)

REPRODUCE_COLUMNS = [
    "j", "h", "value_0", "value_1", "value_2", "derivative", "formula",
    "derivative_gap", "varq_lower_bound", "bv_distance",
]
STRUCTURE_CHECKS = ["contact", "one-sided-control", "tail-limit"]


class MaxlabArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# === Helpers ===

def _read_function(path: str):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise InvalidFunctionError(f"cannot read {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise InvalidFunctionError(f"{path} is not valid JSON: {e.msg} (line {e.lineno})")
    if not isinstance(data, dict):
        raise InvalidFunctionError(f"{path} must hold a JSON object")
    return load_function(data)


def _run_config(args, command: str, default_beta: str = "0", **extra) -> RunConfig:
    fields = dict(
        command=command,
        centered=args.centered,
        beta=args.beta if args.beta is not None else default_beta,
        side=args.side,
        mode=args.mode,
        seed=args.seed,
        j_max=args.jmax,
        trials=args.trials,
        grid_step=args.grid_step,
        threshold=args.threshold,
        out=args.out,
        format=args.format,
    )
    fields.update(extra)
    return RunConfig(**fields)


def _format_value(evaluation: MaxEvaluation) -> str:
    if evaluation.divergent:
        return "infinite"
    value = evaluation.value
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else to_text(value)
    return f"{float(value):.12g}"


def _format_witness(evaluation: MaxEvaluation) -> str:
    if evaluation.divergent:
        return "-"
    if evaluation.tail_limit is not None:
        return f"tail:{evaluation.tail_limit.value}"
    w = evaluation.window
    if isinstance(w, DiscreteWindow):
        return f"[{w.lo}, {w.hi}]"
    if isinstance(w, RealWindow):
        return f"[{to_text(w.L)}, {to_text(w.R)}] {w.kind.value}"
    return "-"


def _emit(report: ExperimentReport, cfg: RunConfig, args, always: bool = True) -> None:
    report.metadata["config"] = cfg.model_dump(mode="json")
    if cfg.out is None and not always:
        return
    out_dir = cfg.out or config.OUTPUT_DIR
    for path in write_report(report, out_dir, cfg.format, seed=cfg.seed, timestamp=args.timestamp):
        print(f"wrote {path}")


def _parse_points(text: str, f) -> List:
    items = [p for p in text.split(",") if p.strip()]
    if not items:
        raise DomainError("no points given")
    if isinstance(f, DiscreteBVFunction):
        try:
            return [int(p) for p in items]
        except ValueError:
            raise DomainError(f"discrete points must be integers, got {text!r}")
    return [parse_scalar(p, f.mode) for p in items]


# === Commands ===

def cmd_compute(args, executor: RunExecutor) -> int:
    f = _read_function(args.function)
    cfg = _run_config(args, "compute", target=args.function)
    variant = OperatorVariant(centered=cfg.centered, beta=parse_scalar(cfg.beta, f.mode), side=cfg.side)
    points = _parse_points(args.points, f)

    def runner(ex: RunExecutor) -> ExperimentReport:
        rows = []
        for x in points:
            if isinstance(f, DiscreteBVFunction):
                evaluation = maximal_discrete(f, x, variant)
            else:
                evaluation = evaluate_continuous(f, x, variant)
            rows.append({
                "x": json_value(x),
                "value": "infinite" if evaluation.divergent else json_value(evaluation.value),
                "display": _format_value(evaluation),
                "witness": _format_witness(evaluation),
                "divergent": evaluation.divergent,
            })
        return ExperimentReport(
            name="compute",
            parameters={"function": function_digest(f), "variant": variant.describe()},
            rows=rows,
            verdict="computed",
        )

    report = executor.execute("compute", cfg, runner)
    labels = [p.strip() for p in args.points.split(",") if p.strip()]
    for x, row in zip(labels, report.rows):
        print(f"{x.strip()}: {row['display']}  {row['witness']}")
    print(", ".join(row["display"] for row in report.rows))
    _emit(report, cfg, args, always=False)
    return 0


def cmd_reproduce(args, executor: RunExecutor) -> int:
    cfg = _run_config(args, "reproduce", default_beta="1/2", target=args.setting)
    beta = cfg.beta_value()
    if beta == 0:
        raise DomainError("counterexamples need 0 < beta < 1")
    report = executor.execute(
        f"reproduce-{args.setting}",
        cfg,
        lambda ex: reproduce_setting(Setting(args.setting), beta, cfg.j_max, args.strategy, cfg.mode),
    )
    print(format_table(report, REPRODUCE_COLUMNS))
    for check in report.summary["sequence_checks"]:
        print(f"{'PASS' if check['ok'] else 'FAIL'} {check['name']}")
    _emit(report, cfg, args)
    print("PASS" if report.verdict == "pass" else "FAIL")
    return 0


def _random_spec(args, cfg: RunConfig) -> RandomBVSpec:
    try:
        tails = (Fraction(args.left_tail), Fraction(args.right_tail))
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"tails must be rationals, got {args.left_tail!r}, {args.right_tail!r}")
    return RandomBVSpec(
        seed=cfg.seed,
        width_range=(1, args.width_max),
        denominator=args.denominator,
        left_tail=tails[0],
        right_tail=tails[1],
        mode=cfg.mode,
    )


def cmd_fuzz(args, executor: RunExecutor) -> int:
    which = check_registry.ids() if "all" in args.checks else args.checks
    cfg = _run_config(args, "fuzz", default_beta="1/2", target=",".join(which))
    spec = _random_spec(args, cfg)
    report = executor.execute(
        "fuzz",
        cfg,
        lambda ex: _fuzz(ex, spec, cfg, which),
    )
    for check_id, entry in report.summary["checks"].items():
        line = f"{check_id}: {entry['violations']} violations"
        if "max_ratio" in entry:
            line += f"; max ratio {entry['max_ratio']:.6g}"
        if "extremal_ratio" in entry:
            line += f"; extremal instance ratio {entry['extremal_ratio']:.6g}"
        print(line)
    _emit(report, cfg, args)
    if report.summary["violations"]:
        raise ViolationError(f"{report.summary['violations']} violations found")
    return 0


def _fuzz(executor: RunExecutor, spec: RandomBVSpec, cfg: RunConfig, which: List[str]) -> ExperimentReport:
    beta = cfg.beta_value()
    if beta == 0 and any(check_registry.get(c).fractional for c in which):
        raise DomainError("fractional checks need 0 < beta < 1")
    return fuzz_inequalities(spec, cfg.trials, which, beta, on_violation=executor.record_violation)


def cmd_converge(args, executor: RunExecutor) -> int:
    target = args.which
    default_family = {"thm2": "bump", "thm1": "tent-scale", "questionD": "random"}[target]
    family = args.family or default_family
    default_threshold = THM1_THRESHOLD if target == "thm1" else THM2_THRESHOLD
    cfg = _run_config(args, "converge", target=target, family=family)
    threshold = cfg.threshold or default_threshold
    mode = cfg.mode

    if target == "thm2":
        if family not in DISCRETE_FAMILIES:
            raise DomainError(f"unknown family {family!r} for thm2", known=list(DISCRETE_FAMILIES))
        f = _read_function(args.function) if args.function else delta_at_origin(mode)
        if not isinstance(f, DiscreteBVFunction):
            raise UnsupportedVariantError("thm2 runs on discrete functions")
        runner = lambda ex: converge_thm2(f, family, cfg.j_max, threshold)
    elif target == "thm1":
        if family not in PWL_FAMILIES:
            raise DomainError(f"unknown family {family!r} for thm1", known=list(PWL_FAMILIES))
        f = _read_function(args.function) if args.function else PiecewiseLinearFunction.tent(mode=mode)
        if not isinstance(f, PiecewiseLinearFunction):
            raise UnsupportedVariantError("thm1 runs on piecewise-linear functions")
        runner = lambda ex: converge_thm1(f, family, cfg.grid_step, cfg.j_max, threshold, side=cfg.side)
    else:
        spec = _random_spec(args, cfg)
        runner = lambda ex: probe_open_questions(
            "D", spec, cfg.trials, cfg.j_max, threshold, family, on_violation=ex.record_violation
        )

    report = executor.execute(f"converge-{target}", cfg, runner)
    for line in summary_lines(report)[:-1]:
        print(line)
    _emit(report, cfg, args)
    print(summary_lines(report)[-1])
    return 0


def cmd_probe(args, executor: RunExecutor) -> int:
    cfg = _run_config(args, "probe", target=args.setting, family=args.family)
    spec = _random_spec(args, cfg)
    threshold = cfg.threshold or THM2_THRESHOLD
    step = args.probe_step
    report = executor.execute(
        f"probe-{args.setting}",
        cfg,
        lambda ex: probe_open_questions(
            args.setting, spec, cfg.trials, cfg.j_max, threshold, args.family, step,
            on_violation=ex.record_violation,
        ),
    )
    lines = summary_lines(report)
    for line in lines[:-1]:
        print(line)
    _emit(report, cfg, args)
    print(lines[-1])
    return 0


def cmd_check(args, executor: RunExecutor) -> int:
    if args.list:
        print(json.dumps({"by_category": check_registry.list_by_category(), "checks": check_registry.list_all()}, indent=2))
        return 0
    if args.function is None:
        raise DomainError("check needs a function file (or --list)")
    f = _read_function(args.function)
    cfg = _run_config(args, "check", target=args.function)
    kind = "discrete" if isinstance(f, DiscreteBVFunction) else "step" if isinstance(f, StepFunction) else "pwl"
    ids = args.checks or ([c for c in STRUCTURE_CHECKS] if kind == "discrete" else ["continuous-var-bound"])
    checks = [check_registry.get(c) for c in ids]
    for check in checks:
        if check.instance != kind:
            raise UnsupportedVariantError(f"check {check.id} takes {check.instance} functions, got {kind}")

    def runner(ex: RunExecutor) -> ExperimentReport:
        rows = []
        for check in checks:
            result = check.handler(f, cfg.beta_value() if check.fractional else 0)
            rows.append(result.model_dump(mode="json"))
            if result.verdict == "fail":
                ex.record_violation(check.id, f, result.model_dump(mode="json"))
        failed = any(r["verdict"] == "fail" for r in rows)
        return ExperimentReport(
            name="check",
            parameters={"function": function_digest(f), "checks": ids},
            rows=rows,
            verdict="fail" if failed else "pass",
            decision_rule="pass iff no check fails",
        )

    report = executor.execute("check", cfg, runner)
    for row in report.rows:
        print(f"{row['check']}: {row['verdict']}")
    _emit(report, cfg, args, always=False)
    if report.verdict == "fail":
        raise ViolationError("structural check failed")
    return 0


def cmd_violations(args, executor: RunExecutor) -> int:
    if executor.db is None:
        raise DomainError("violations are stored in the database; drop --no-record")
    if args.mark_reviewed is not None:
        out = mark_reviewed(executor.db, args.mark_reviewed)
        print(json.dumps(out.model_dump(mode="json"), indent=2, sort_keys=True))
        return 0
    items = list_violations(executor.db, include_reviewed=args.all)
    print(json.dumps([v.model_dump(mode="json") for v in items], indent=2, sort_keys=True))
    return 0


# === Parser ===

def _operator_options() -> argparse.ArgumentParser:
    common = MaxlabArgumentParser(add_help=False)
    common.add_argument("--beta", default=None, help='fractional order, decimal or "p/q" (default 0, 1/2 for reproduce/fuzz)')
    centering = common.add_mutually_exclusive_group()
    centering.add_argument("--centered", dest="centered", action="store_true", help="centered windows")
    centering.add_argument("--uncentered", dest="centered", action="store_false", help="uncentered windows (default)")
    common.set_defaults(centered=False)
    common.add_argument("--side", choices=[s.value for s in Side], default=Side.TWO_SIDED.value)
    common.add_argument("--mode", choices=[m.value for m in ScalarMode], default=ScalarMode.RATIONAL.value)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--jmax", type=int, default=20)
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--grid-step", type=float, default=1e-3)
    common.add_argument("--threshold", type=float, default=None, help="verdict threshold (a reporting convention)")
    common.add_argument("--out", default=None, help="report directory")
    common.add_argument("--format", choices=FORMATS, default="both")
    return common


def _random_options() -> argparse.ArgumentParser:
    common = MaxlabArgumentParser(add_help=False)
    common.add_argument("--width-max", type=int, default=12, help="largest random core width")
    common.add_argument("--denominator", type=int, default=4, help="values lie on k/denominator")
    common.add_argument("--left-tail", default="0")
    common.add_argument("--right-tail", default="0")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = MaxlabArgumentParser(prog="maxlab", description="Computational lab for maximal operators")
    parser.add_argument("--db", default=None, help="SQLAlchemy URL (default MAXLAB_DATABASE_URL)")
    parser.add_argument("--no-record", action="store_true", help="do not persist runs or violations")
    parser.add_argument("--log-level", default=None)
    parser.add_argument("--timestamp", default=None, help="timestamp used in report file names")
    subparsers = parser.add_subparsers(dest="command", required=True)
    operator = _operator_options()
    random_opts = _random_options()

    p = subparsers.add_parser("compute", parents=[operator], help="maximal function values with witnesses")
    p.add_argument("function", help="function JSON file")
    p.add_argument("--points", required=True, help="comma-separated points")
    p.set_defaults(handler=cmd_compute)

    p = subparsers.add_parser("reproduce", parents=[operator], help="build and verify a counterexample sequence")
    p.add_argument("setting", choices=[s.value for s in Setting])
    p.add_argument("--strategy", choices=["unimodal", "verify"], default="unimodal")
    p.set_defaults(handler=cmd_reproduce)

    p = subparsers.add_parser("fuzz", parents=[operator, random_opts], help="inequality and structure fuzzing")
    p.add_argument("checks", nargs="+", choices=check_registry.ids() + ["all"])
    p.set_defaults(handler=cmd_fuzz)

    p = subparsers.add_parser("converge", parents=[operator, random_opts], help="continuity demonstrations")
    p.add_argument("which", choices=["thm1", "thm2", "questionD"])
    p.add_argument("--function", default=None, help="base function JSON (default delta / tent)")
    p.add_argument("--family", default=None, help="perturbation family")
    p.set_defaults(handler=cmd_converge)

    p = subparsers.add_parser("probe", parents=[operator, random_opts], help="open-question stress probes")
    p.add_argument("setting", choices=["A", "B", "C", "D"])
    p.add_argument("--family", default="random", choices=["random", "zero", "thm5", "thm6"])
    p.add_argument("--probe-step", type=float, default=0.05, help="sample spacing for settings A-C")
    p.set_defaults(handler=cmd_probe)

    p = subparsers.add_parser("check", parents=[operator], help="structural checks on one function")
    p.add_argument("function", nargs="?", default=None, help="function JSON file")
    p.add_argument("--list", action="store_true", help="print the registered checks as JSON and exit")
    p.add_argument("--checks", nargs="+", default=None, choices=check_registry.ids())
    p.set_defaults(handler=cmd_check)

    p = subparsers.add_parser("violations", help="list stored candidate violations")
    p.add_argument("--all", action="store_true", help="include reviewed ones")
    p.add_argument("--mark-reviewed", type=int, default=None, metavar="ID")
    p.set_defaults(handler=cmd_violations)
    return parser


def _open_session(args):
    if args.no_record:
        return None
    return open_session(args.db)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    config.configure_logging(args.log_level)
    session = None
    try:
        session = _open_session(args)
        return args.handler(args, RunExecutor(session))
    except ValidationError as e:
        print(f"error: invalid configuration: {e.errors()[0]['msg']}", file=sys.stderr)
        return 1
    except MaxlabError as e:
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    finally:
        if session is not None:
            session.close()
