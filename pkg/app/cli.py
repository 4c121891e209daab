"""
Command-line entry point: ``isoreduce <subcommand> ...``

Exit codes: 0 when every selected check passes, 1 on an unexpected
failure, 2 on a usage error.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, Optional, Sequence

import sympy

from .algebra import to_text
from .config import overridden, settings
from .exceptions import ExpressionSyntaxError, IsoreduceError, UnknownModel, UnknownSymbol
from .families import FAMILIES, expand_quasi, family, published_ode
from .lax_models import MODEL_NAMES, builtin_model, hamilton_vector_field, model_to_dict
from .models import SELECTORS
from .painleve import jet_flow, verify_solution
from .parser import parse_expression
from .reduction import (
    classical_limit_curve,
    eliminate_flow_system,
    expand_family,
    mirror_flow,
    relation_multiplier,
    singular_reduction,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

INTEGRATION_TARGETS = (
    "pIV", "gar92", "gar5232",
    "gar92-flow", "gar5232-flow",
    "gar92-ode", "gar5232-ode",
    "gar5232-mirror",
)


def _assignments(text: Optional[str]) -> Dict[str, str]:
    """Parse ``k=v,k=v`` into a dict of strings"""
    if not text:
        return {}
    pairs = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected name=value, got {item!r}")
        pairs[key.strip()] = value.strip()
    return pairs


def _number(text: str) -> float:
    return float(sympy.Rational(text)) if "/" in text else float(text)


def _emit(payload: dict, path: Optional[Path]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Report written to {path}")
    else:
        print(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .suite import run_suite

    report = run_suite(args.selector)
    if args.json:
        Path(args.json).write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    for check in report.checks:
        marker = "PASS" if check.passed else check.status.upper()
        negative = " (expected negative)" if check.expected_negative else ""
        print(f"{marker:12} {check.check_id}{negative}  [{check.wall_time:.1f}s] {check.detail}")
    passed = sum(c.passed for c in report.checks)
    print(f"{passed}/{len(report.checks)} checks passed")
    return report.exit_code


def _solution_payload(sol, flow) -> dict:
    return {
        "parameters": list(sol.parameters),
        "ansatz": sol.ansatz.describe(),
        "ledger": [
            {"order": e.order, "kernel_dimension": e.kernel_dimension, "consistent": e.consistent, "parameters": list(e.parameters)}
            for e in sol.ledger
        ],
        "series": {v: sol[v].to_text() for v in sol.ansatz.variables},
        "residual_valuations": {
            v: {"valuation": str(r.valuation), "required": str(r.required), "passed": r.passed}
            for v, r in verify_solution(flow, sol).items()
        },
    }


def cmd_painleve_test(args) -> int:
    if args.ramification > 1:
        name = "quasi"
        sol = expand_quasi(args.model, args.order)
        flow = jet_flow(published_ode(args.model))
    else:
        fam = family(args.model, args.family)
        name = fam.name
        sol = expand_family(fam, args.order)
        model = builtin_model(args.model)
        flow = hamilton_vector_field(model, model.time_index(fam.time))
    payload = {"model": args.model, "family": name, **_solution_payload(sol, flow)}
    _emit(payload, args.json)
    return EXIT_OK if all(v["passed"] for v in payload["residual_valuations"].values()) else EXIT_FAILURE


def cmd_reduce(args) -> int:
    fam = family(args.model, args.family)
    sol = expand_family(fam, args.order or settings.reduction_order)
    red = singular_reduction(builtin_model(args.model), sol, args.family)
    payload = {
        "model": red.model,
        "family": red.family,
        "parameters": list(red.parameters),
        "limit": to_text(red.limit),
        "R0": to_text(red.parts[0]),
        "R1": to_text(red.parts[1]),
        "R2": to_text(red.parts[2]),
        "deformation": {t: to_text(b) for t, b in red.deformation.items()},
        "apparent_locus": None if red.apparent_locus is None else to_text(red.apparent_locus),
    }
    if args.classical:
        curve = classical_limit_curve(red)
        payload["curve"] = {"f": to_text(curve.f), "cleared_power": curve.cleared_power, "degree": curve.degree}
    _emit(payload, args.json)
    return EXIT_OK


def cmd_eliminate(args) -> int:
    from .suite import golden_flow

    elimination = eliminate_flow_system(golden_flow(args.model), args.target)
    multiplier = relation_multiplier(elimination.relation, published_ode(args.model).relation)
    payload = {
        "model": args.model,
        "relation": to_text(elimination.relation),
        "substitutions": {k: to_text(v) for k, v in elimination.substitutions.items()},
        "divisions": list(elimination.divisors),
        "multiplier_against_published": None if multiplier is None else to_text(multiplier),
    }
    _emit(payload, args.json)
    return EXIT_OK if multiplier is not None else EXIT_FAILURE


def cmd_genus(args) -> int:
    from .reduction import genus_check
    from .suite import GENUS_SAMPLES, reduction

    sample = _assignments(args.sample) or GENUS_SAMPLES[args.model][0]
    curve = classical_limit_curve(reduction(args.model))
    genus = genus_check(curve, sample)
    _emit({"model": args.model, "sample": {k: str(v) for k, v in sample.items()}, "degree": curve.degree, "genus": genus}, args.json)
    return EXIT_OK


def _integration_system(target: str):
    """(flow, time) for an integration target"""
    from .suite import golden_flow

    if target in MODEL_NAMES:
        return hamilton_vector_field(builtin_model(target), 0), "t1"
    model, _, kind = target.partition("-")
    if kind == "flow":
        return golden_flow(model).rhs, "t2"
    if kind == "ode":
        return jet_flow(published_ode(model)), "t2"
    return mirror_flow(), "t1"


def cmd_integrate(args) -> int:
    from .numeric import detect_branch, export_trajectory_csv, integrate

    flow, time = _integration_system(args.target)
    if args.branch and args.branch not in flow:
        raise argparse.ArgumentTypeError(f"--branch must name a component of {args.target}")
    values = {k: _number(v) for k, v in _assignments(args.seed).items()}
    initial = {v: values.pop(v) for v in list(flow) if v in values}
    missing = [v for v in flow if v not in initial]
    if missing:
        raise argparse.ArgumentTypeError(f"--seed must give {', '.join(missing)}")
    start, end = (_number(x) for x in args.range.split(","))
    values.setdefault("hbar", settings.numeric_hbar)
    traj = integrate(flow, time, initial, (start, end), values, strict=args.strict)
    if args.csv:
        export_trajectory_csv(traj, args.csv)
    payload = {
        "target": args.target,
        "termination": traj.termination,
        "steps": len(traj.t) - 1,
        "end": float(traj.t[-1]),
        "state": dict(zip(traj.variables, map(float, traj.y[-1]))),
        "max_local_error": float(traj.errors.max()),
    }
    if args.branch:
        payload["branch"] = detect_branch(traj, args.branch).to_dict()
    _emit(payload, args.json)
    return EXIT_OK if traj.status == "success" else EXIT_FAILURE


def cmd_dump_model(args) -> int:
    _emit(model_to_dict(builtin_model(args.model)), args.json)
    return EXIT_OK


def cmd_parse(args) -> int:
    print(to_text(parse_expression(args.expression)))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("main:app", host=args.host, port=args.port, reload=False, log_level=settings.log_level.lower())
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", type=Path, help="write the JSON report to this path")
    common.add_argument("--order", type=int, help="series terms beyond the leading exponent")
    common.add_argument("--tol", type=float, help="integration tolerance")
    common.add_argument("--hbar", type=str, help="numeric hbar (rational or float)")
    common.add_argument("--golden", type=Path, help="golden-file directory")
    common.add_argument("--log-level", default=settings.log_level, help="logging level")

    parser = argparse.ArgumentParser(
        prog="isoreduce",
        description="Exact verification of singularity reductions of isomonodromy systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    family_names = sorted({name.split("/")[1] for name in FAMILIES})

    p = sub.add_parser("verify", parents=[common], help="run the verification matrix")
    p.add_argument("selector", choices=SELECTORS)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("painleve-test", parents=[common], help="expand a movable-singularity family")
    p.add_argument("model", choices=MODEL_NAMES)
    p.add_argument("--family", default="main", choices=family_names)
    p.add_argument("--ramification", type=int, default=1, choices=(1, 3))
    p.set_defaults(handler=cmd_painleve_test)

    p = sub.add_parser("reduce", parents=[common], help="singularity reduction along a family")
    p.add_argument("model", choices=MODEL_NAMES)
    p.add_argument("family", nargs="?", default="main", choices=family_names)
    p.add_argument("--classical", action="store_true", help="also clear the classical-limit curve")
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("eliminate", parents=[common], help="eliminate a secondary flow to one ODE")
    p.add_argument("model", choices=("gar92", "gar5232"))
    p.add_argument("--target", default="alpha")
    p.set_defaults(handler=cmd_eliminate)

    p = sub.add_parser("genus", parents=[common], help="genus of the classical-limit curve")
    p.add_argument("model", choices=MODEL_NAMES)
    p.add_argument("--sample", help="exact sample, e.g. alpha=1,beta=2/3")
    p.set_defaults(handler=cmd_genus)

    p = sub.add_parser("integrate", parents=[common], help="integrate a flow numerically")
    p.add_argument("target", choices=INTEGRATION_TARGETS)
    p.add_argument("--seed", required=True, help="initial state and constants, e.g. q=1,p=0,theta0=1")
    p.add_argument("--range", required=True, help="start,end")
    p.add_argument("--csv", type=Path, help="export the trajectory as CSV")
    p.add_argument("--strict", action="store_true", help="fail on step-size collapse")
    p.add_argument("--branch", help="fit the branch exponent of this component where the run stops")
    p.set_defaults(handler=cmd_integrate)

    p = sub.add_parser("dump-model", parents=[common], help="print a built-in model")
    p.add_argument("model", choices=MODEL_NAMES)
    p.set_defaults(handler=cmd_dump_model)

    p = sub.add_parser("parse", parents=[common], help="canonical form of an expression")
    p.add_argument("expression")
    p.set_defaults(handler=cmd_parse)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--host", default="0.0.0.0")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)
    return parser


def _overrides(args) -> dict:
    values = {}
    if args.order is not None:
        values.update(series_order=args.order, quasi_order=args.order)
    if args.tol is not None:
        values["numeric_tol"] = args.tol
    if args.hbar is not None:
        values["numeric_hbar"] = _number(args.hbar)
    if args.golden is not None:
        values["golden_dir"] = args.golden
    return values


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        with overridden(**_overrides(args)):
            return args.handler(args)
    except (
        UnknownModel, UnknownSymbol, ExpressionSyntaxError, argparse.ArgumentTypeError, FileNotFoundError, ValueError,
    ) as exc:
        logger.error(str(exc))
        return EXIT_USAGE
    except IsoreduceError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
