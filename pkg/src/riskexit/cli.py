"""riskexit command line: eval | simulate | verify | invert.

Output is CSV on stdout (or JSON with ``--json`` for verify), diagnostics on
stderr.  Exit codes: 0 ok, 1 verification failed, 2 invalid input,
3 claim law not supported by the analytic formulas.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from typing import Iterable, Sequence

from . import exit as ex
from . import mc
from .errors import DomainError, RegimeError, RiskExitError, UnsupportedClaimLawError
from .laplace import InversionSpec, exit_time_cdf
from .model import ModelParams, regime
from .verify import SUITES, run_suite
from .wiener_hopf import (
    mean_passage_below,
    mean_passage_below_zero_drift,
    rho_minus_at_zero,
    rho_plus_at_zero,
    solve_factorization,
)

EVAL_QUANTITIES = ("q_upper", "q_lower", "q_total", "non_exit", "ruin", "density", "overshoot",
                   "roots", "undershoot", "mean_passage")
SIM_QUANTITIES = ("q_upper", "q_lower", "q_total", "ruin", "non_exit", "atom", "sup_tail",
                  "overshoot_mean", "overshoot_m2", "mean_passage")


class UsageError(Exception):
    pass


def fmt(value) -> str:
    """Shortest round-trip text of a float; integral values without a trailing '.0'."""
    if isinstance(value, int):
        return str(value)
    v = float(value)
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def parse_values(text: str | None) -> list[float] | None:
    """'1', '1,2,5' or an inclusive range 'start:stop:step'."""
    if text is None:
        return None
    out: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            try:
                start, stop, step = (float(v) for v in part.split(":"))
            except ValueError as exc:
                raise UsageError(f"bad range {part!r}; expected start:stop:step") from exc
            if step <= 0 or stop < start:
                raise UsageError(f"bad range {part!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            out.extend(start + i * step for i in range(count))
        else:
            try:
                out.append(float(part))
            except ValueError as exc:
                raise UsageError(f"not a number: {part!r}") from exc
    return out


def load_scenario(args) -> tuple[ModelParams, dict, dict]:
    path = args.scenario or args.model
    if path is None:
        raise UsageError("--model or --scenario is required")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if "model" in doc:
        model_doc, query, run = doc["model"], dict(doc.get("query", {})), dict(doc.get("run", {}))
    else:
        model_doc, query, run = doc, {}, {}
    return ModelParams.from_dict(model_doc), query, run


def _pick(flag: list[float] | None, query: dict, key: str, list_key: str | None = None,
          default: Sequence[float] | None = None) -> list[float]:
    if flag is not None:
        return flag
    if list_key and list_key in query:
        return [float(v) for v in query[list_key]]
    if key in query:
        return [float(query[key])]
    if default is not None:
        return list(default)
    raise UsageError(f"--{key} is required")


def _write_rows(header: Sequence[str], rows: Iterable[Sequence]) -> None:
    out = sys.stdout
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")


def _queries(args, query: dict) -> list[tuple[float, float, float]]:
    xs = _pick(parse_values(args.x), query, "x")
    Ts = _pick(parse_values(args.T), query, "T")
    ss = _pick(parse_values(args.s), query, "s", "s_list", default=[0.0])
    return list(itertools.product(xs, Ts, ss))


def cmd_eval(args) -> int:
    params, query, _ = load_scenario(args)
    qty = args.quantity
    if qty == "roots":
        ss = _pick(parse_values(args.s), query, "s", "s_list")
        rows = []
        for s in ss:
            if s == 0.0:
                rp = rho_plus_at_zero(params)
                rm = rho_minus_at_zero(params) if params.is_double_exponential else math.nan
            else:
                f = solve_factorization(params, s)
                rp = f.rho_plus
                rm = f.rho_minus if f.has_lower else math.nan
            b = params.claims.b if params.is_double_exponential else math.nan
            rows.append((s, rp, rp / params.c, 1 - rp / params.c, rm, rm / b, 1 - rm / b))
        _write_rows(("s", "rho_plus", "p_plus", "q_plus", "rho_minus", "p_minus", "q_minus"),
                    rows)
        return 0
    if qty == "mean_passage":
        levels = _pick(parse_values(args.level), query, "level")
        fn = mean_passage_below_zero_drift if regime(params) == "zero" else mean_passage_below
        _write_rows(("level", "mean_passage"), [(lv, fn(params, lv)) for lv in levels])
        return 0

    rows = []
    extra = {"density": ("z", args.z), "undershoot": ("z", args.z),
             "overshoot": ("alpha", args.alpha)}.get(qty)
    extras = [None]
    if extra:
        extras = _pick(parse_values(extra[1]), query, extra[0])
    for (x, T, s), e in itertools.product(_queries(args, query), extras):
        q = ex.ExitQuery(x, T, s)
        if qty in ("q_upper", "q_lower", "q_total", "non_exit"):
            rows.append((x, T, s, getattr(ex.exit_transforms(params, q), qty)))
        elif qty == "ruin":
            rows.append((x, T, s, ex.ruin_prob(params, x, T)))
        elif qty == "density":
            val = (ex.limit_pre_exit_density(params, x, T, e) if s == 0
                   else ex.pre_exit_density(params, q, e))
            rows.append((x, T, s, e, val))
        elif qty == "undershoot":
            rows.append((x, T, s, e, ex.undershoot_distribution(params, q, e)))
        elif qty == "overshoot":
            v_over, v_pos = ex.overshoot_transform(params, q, e)
            rows.append((x, T, s, e, v_over.real, v_over.imag, v_pos.real, v_pos.imag))
    header = {
        "density": ("x", "T", "s", "z", "density"),
        "undershoot": ("x", "T", "s", "z", "undershoot"),
        "overshoot": ("x", "T", "s", "alpha", "V_over_re", "V_over_im", "V_pos_re", "V_pos_im"),
    }.get(qty, ("x", "T", "s", qty))
    _write_rows(header, rows)
    return 0


def _run_settings(args, run: dict) -> tuple[int, int, float | None]:
    n = args.n_paths if args.n_paths is not None else int(run.get("n_paths", 100_000))
    seed = args.seed if args.seed is not None else int(run.get("seed", 0))
    t_max = args.t_max if args.t_max is not None else run.get("t_max")
    return n, seed, None if t_max is None else float(t_max)


def cmd_simulate(args) -> int:
    params, query, run = load_scenario(args)
    n, seed, t_max = _run_settings(args, run)
    qty = args.quantity
    if qty == "mean_passage":
        rows = []
        for lv in _pick(parse_values(args.level), query, "level"):
            est = mc.estimate_mean_passage(params, lv, n, seed, t_max,
                                           auxiliary=args.auxiliary, workers=args.workers)
            rows.append((lv, est.mean, est.stderr, est.n, 0.0))
        _write_rows(("level", "mean", "stderr", "n", "censored_frac"), rows)
        return 0
    rows = []
    for x, T, s in _queries(args, query):
        q = ex.ExitQuery(x, T, s)
        if qty in ("non_exit", "atom", "sup_tail"):
            if s == 0:
                raise UsageError(f"{qty} needs s > 0")
            levels = (x,) if args.level is None else tuple(parse_values(args.level))
            obs = mc.estimate_killed_observables(params, q, n, seed, sup_levels=levels,
                                                 workers=args.workers)
            if qty == "sup_tail":
                for lv in levels:
                    est = obs.sup_tail_at[lv]
                    rows.append((x, T, s, est.mean, est.stderr, est.n, 0.0))
                continue
            est = obs.non_exit if qty == "non_exit" else obs.atom_freq
            rows.append((x, T, s, est.mean, est.stderr, est.n, 0.0))
            continue
        if qty.startswith("overshoot"):
            batch = mc.simulate_exits(params, x, T, n, seed, t_max, workers=args.workers)
            g1, g2 = mc.overshoot_moments(batch)
            est = g1 if qty == "overshoot_mean" else g2
            rows.append((x, T, s, est.mean, est.stderr, est.n, batch.censored_frac))
            continue
        if qty == "ruin":
            q = ex.ExitQuery(x, T, 0.0)
        res = mc.estimate_exit_mgf(params, q, n, seed, t_max, workers=args.workers)
        est = {"q_upper": res.upper, "ruin": res.upper, "q_lower": res.lower,
               "q_total": res.total}[qty]
        rows.append((x, T, q.s, est.mean, est.stderr, est.n, res.censored_frac))
    _write_rows(("x", "T", "s", "mean", "stderr", "n", "censored_frac"), rows)
    return 0


def cmd_invert(args) -> int:
    params, query, _ = load_scenario(args)
    ts = parse_values(args.t)
    if not ts:
        raise UsageError("--t is required")
    spec = InversionSpec(terms=args.terms, t_grid=tuple(ts))
    rows = []
    for x, T, _ in _queries(args, query):
        cdf = exit_time_cdf(params, x, T, spec, side=args.side)
        rows.extend((x, T, t, v) for t, v in zip(ts, cdf))
    _write_rows(("x", "T", "t", "cdf"), rows)
    return 0


def cmd_verify(args) -> int:
    rep = run_suite(args.suite, mc_paths=args.mc)
    if args.json:
        json.dump({"suite": args.suite, "tolerance_scale": rep.scale, "passed": rep.passed,
                   "checks": [c.as_dict() for c in rep.checks]}, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        for c in rep.checks:
            mark = "PASS" if c.passed else "FAIL"
            sys.stdout.write(f"{mark} {c.name}: got={c.got!r} target={c.target!r} "
                             f"tol={c.tol:g}\n")
        sys.stdout.write(f"{len(rep.checks) - len(rep.failures())}/{len(rep.checks)} checks passed\n")
    if not rep.passed:
        for c in rep.failures():
            print(f"failed: {c.name}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riskexit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument("--model", help="model JSON (or a full scenario JSON)")
        p.add_argument("--scenario", help="scenario JSON with model/query/run sections")
        p.add_argument("--x", help="upper barrier; value, list a,b or range start:stop:step")
        p.add_argument("--T", help="interval width; same syntax as --x")
        p.add_argument("--s", help="transform argument; same syntax as --x")

    p = sub.add_parser("eval", help="evaluate closed-form quantities")
    scenario_args(p)
    p.add_argument("--quantity", required=True, choices=EVAL_QUANTITIES)
    p.add_argument("--z", help="position for density / undershoot")
    p.add_argument("--alpha", help="frequency for overshoot")
    p.add_argument("--level", help="negative level for mean_passage")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="Monte Carlo estimates")
    scenario_args(p)
    p.add_argument("--quantity", required=True, choices=SIM_QUANTITIES)
    p.add_argument("--n-paths", "--n", dest="n_paths", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--level", help="sup_tail levels or mean_passage level")
    p.add_argument("--auxiliary", action="store_true",
                   help="mean_passage for the auxiliary decreasing process (m = 0)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("invert", help="P{tau <= t} by Gaver-Stehfest inversion")
    scenario_args(p)
    p.add_argument("--t", required=True, help="times; same syntax as --x")
    p.add_argument("--terms", type=int, default=14)
    p.add_argument("--side", choices=("total", "upper", "lower"), default="total")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("verify", help="run the self-check suites")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--json", action="store_true")
    p.add_argument("--mc", type=int, default=0, metavar="N",
                   help="also run Monte Carlo checks with N paths")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnsupportedClaimLawError as exc:
        print(f"riskexit: {exc}", file=sys.stderr)
        return 3
    except (UsageError, DomainError, RegimeError, RiskExitError, ValueError, KeyError) as exc:
        print(f"riskexit: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
