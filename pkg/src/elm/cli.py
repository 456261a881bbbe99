"""``elm`` command line: capacity queries, bounds, constructions, search.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import capacity as cap
from .codebook import ElmCodebook, ModelSpec, verify_elm_codebook
from .constructions import (ConstructionError, PhasePlan, build_construction1, build_construction2,
                            build_construction3, build_construction4, construction3_components,
                            optimal_partition)
from .memory import bits_to_str, replay_trace, str_to_bits
from .search import SearchInstance, search_optimal_elm
from .wom import InfeasibleComponent, SearchBudgetExceeded

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _prob(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a probability: {text!r}") from None


def _states(text: str):
    try:
        return [str_to_bits(s) for s in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _emit_json(obj: dict, out: str | None, args) -> None:
    if not args.no_meta:
        obj = dict(obj)
        obj["meta"] = {"tool": "elm", "command": args.command}
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_capacity(args) -> int:
    profile = cap.load_profile(Path(args.profile).read_text())
    table, rates = cap.region_rates(profile)
    print(f"model {profile.model} t={profile.t} ell={profile.ell}")
    print("R " + " ".join(_fmt(r) for r in rates.R))
    print(f"sum_rate={_fmt(rates.sum_rate)}")
    return EXIT_OK


def cmd_maxrate(args) -> int:
    model = cap.normalize_model(args.model)
    if args.closed_form:
        if model != "EIA":
            raise UsageError("--closed-form is only available for the EIA model")
        cf = cap.closed_form_max_sum_rate(args.t, args.ell)
        print(f"sum_rate={_fmt(cf.value)}")
        print(f"p={_fmt(float(cf.achiever_p))}")
        return EXIT_OK
    weights = [float(w) for w in args.weights.split(",")] if args.weights else None
    res = cap.optimize_sum_rate(model, args.t, args.ell, weights)
    print(f"sum_rate={_fmt(res.rates.sum_rate)}")
    print("R " + " ".join(_fmt(r) for r in res.rates.R))
    rows = res.profile.toggle_rows()
    print(f"p={_fmt(rows[0][0])}")
    if args.out:
        _emit_json({"profile": cap.profile_to_dict(res.profile), "rates": res.rates.to_dict()}, args.out, args)
    return EXIT_OK


def _t_range(args):
    if args.t_min > args.t_max:
        raise UsageError("--t-min must not exceed --t-max")
    if args.t_min < 1 or args.ell < 1:
        raise UsageError("t and ell must be >= 1")
    return range(args.t_min, args.t_max + 1)


def cmd_bounds(args) -> int:
    print("t lower upper gap")
    for t in _t_range(args):
        lo, hi = cap.eip_du_bounds(t, args.ell)
        print(f"{t} {_fmt(lo)} {_fmt(hi)} {_fmt(hi - lo)}")
    return EXIT_OK


def curve_csv(ell: int, ts) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "lower_bits", "upper_bits"])
    for t in ts:
        lo, hi = cap.eip_du_bounds(t, ell)
        w.writerow([t, _fmt(lo), _fmt(hi)])
    return buf.getvalue()


def cmd_curve(args) -> int:
    text = curve_csv(args.ell, _t_range(args))
    if args.out:
        Path(args.out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _build(args) -> ElmCodebook:
    kind = args.construction
    if kind == "phased":
        plan = PhasePlan(tuple(int(k) for k in args.plan.split(","))) if args.plan \
            else optimal_partition(args.t, args.ell)
        comps = construction3_components(args.n, plan)
        return build_construction3(plan.t, plan.ell, plan, comps, complement_even_phases=not args.literal)
    if kind == "eia32":
        return build_construction1(args.n, args.p10, args.p20, args.p21, realize=args.realize)
    if kind == "eip32":
        return build_construction4(args.n, args.p10, args.p20, args.p21)
    if kind == "general":
        if not args.profile:
            raise UsageError("--profile is required for the general construction")
        profile = cap.load_profile(Path(args.profile).read_text())
        if not isinstance(profile, cap.EiaProfile):
            raise UsageError("the general construction needs an EIA profile")
        return build_construction2(profile.t, profile.ell, profile, args.n)
    raise UsageError(f"unknown construction {kind!r}")


def _print_code(code: ElmCodebook) -> None:
    print(f"model {code.model.tag} n={code.n} t={code.t} ell={code.ell}")
    print("M " + " ".join(str(m) for m in code.M))
    print(f"sum_rate={_fmt(code.sum_rate)}")


def cmd_construct(args) -> int:
    try:
        code = _build(args)
    except (ConstructionError, InfeasibleComponent, SearchBudgetExceeded) as exc:
        print(f"elm: {exc}", file=sys.stderr)
        report = getattr(exc, "report", None)
        if report is not None and report.budget_violation_trace is not None:
            print(report.budget_violation_trace.to_json(), file=sys.stderr)
        return EXIT_FAIL
    _print_code(code)
    v = code.verified
    print(f"verified failures={v['failures']} saturation_events={v['saturation_events']} "
          f"max_attempted_changes={v['max_changes']}")
    if args.out:
        _emit_json(code.to_dict(), args.out, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    code = ElmCodebook.from_json(Path(args.codebook).read_text())
    report = verify_elm_codebook(code)
    print(report.summary())
    for j, f in enumerate(report.failures, 1):
        print(f"write {j} failure_rate={_fmt(float(f))}")
    if not report.passed and report.failure_trace is not None:
        print(report.failure_trace.to_json())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_search(args) -> int:
    inst = SearchInstance(args.n, args.t, args.ell, ModelSpec.parse(args.model), args.max_m, args.budget)
    res = search_optimal_elm(inst)
    print(f"model {inst.model.tag} n={inst.n} t={inst.t} ell={inst.ell}")
    print("M " + " ".join(str(m) for m in res.M))
    print(f"product={res.product} optimal={str(res.optimal).lower()}")
    if args.out:
        _emit_json(res.to_dict(), args.out, args)
    return EXIT_OK


def cmd_simulate(args) -> int:
    trace = replay_trace(args.ell, args.states)
    for k, w in enumerate(trace.writes, 1):
        print(f"write {k} state={bits_to_str(w.state)} counts={list(w.counts)}")
    print(f"final counts {list(trace.final_counts)}")
    print(f"saturation events {sum(w.saturation_events for w in trace.writes)}")
    if args.out:
        _emit_json(trace.to_dict(), args.out, args)
    return EXIT_OK


def cmd_compare(args) -> int:
    rep = cap.compare_models(args.t, args.ell)
    print(f"{'model':<8} {'sum_rate':>10} {'gap_to_eia':>10}")
    for name, value, gap in rep.rows():
        print(f"{name:<8} {_fmt(value):>10} {_fmt(gap):>10}")
    if args.out:
        _emit_json(rep.to_dict(), args.out, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="elm", description="Endurance-limited memory coding toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--no-meta", action="store_true", help="omit the meta block from JSON output")
        return sp

    sp = add("capacity", cmd_capacity, "rates of a probability profile (JSON file)")
    sp.add_argument("--profile", required=True)

    sp = add("maxrate", cmd_maxrate, "maximum sum-rate by closed form or optimizer")
    sp.add_argument("--model", default="eia")
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--closed-form", action="store_true")
    sp.add_argument("--weights", help="comma-separated per-write weights")
    sp.add_argument("--out")

    for name, func, help_ in (("bounds", cmd_bounds, "EIP:DU lower/upper bound table"),
                              ("curve", cmd_curve, "EIP:DU bounds as CSV")):
        sp = add(name, func, help_)
        sp.add_argument("--ell", type=int, required=True)
        sp.add_argument("--t-min", type=int, required=True)
        sp.add_argument("--t-max", type=int, required=True)
        if name == "curve":
            sp.add_argument("--out")

    sp = add("construct", cmd_construct, "build and verify a finite-length code")
    sp.add_argument("construction", choices=["phased", "eia32", "general", "eip32"])
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=int)
    sp.add_argument("--ell", type=int)
    sp.add_argument("--plan", help="phase lengths, e.g. 2,2")
    sp.add_argument("--literal", action="store_true", help="phased: skip complementing even phases")
    sp.add_argument("--p10", type=_prob, default=Fraction(3, 7))
    sp.add_argument("--p20", type=_prob, default=Fraction(1, 2))
    sp.add_argument("--p21", type=_prob, default=Fraction(1, 3))
    sp.add_argument("--realize", type=_states, help="eia32: pin three intended states")
    sp.add_argument("--profile")
    sp.add_argument("--out")

    sp = add("verify", cmd_verify, "exhaustively verify a codebook JSON file")
    sp.add_argument("--codebook", required=True)

    sp = add("search", cmd_search, "exhaustive optimal code search")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--max-m", type=int)
    sp.add_argument("--budget", type=int, help="node limit (default: ELM_SEARCH_BUDGET or built-in)")
    sp.add_argument("--out")

    sp = add("simulate", cmd_simulate, "replay intended states through the cell model")
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--states", type=_states, required=True, help="comma-separated bit strings")
    sp.add_argument("--out")

    sp = add("compare", cmd_compare, "compare EIA, EIP:DIA and EU:DIA maximum sum-rates")
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--out")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "construct" and args.construction == "phased" and not args.plan \
                and (args.t is None or args.ell is None):
            raise UsageError("phased construction needs --plan or both --t and --ell")
        return args.func(args)
    except UsageError as exc:
        print(f"elm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"elm: error: {' '.join(str(exc).split())}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
