"""Self-checks behind ``riskexit verify``.

Each check compares ``got`` against ``target`` and passes when
``|got - target| <= tol * RISKEXIT_TOL``.  One-sided properties (for example
a density being nonnegative) are encoded as a violation amount with target 0.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from . import exit as ex
from . import mc
from .model import ExponentialClaims, ModelParams, charfn_killed, cumulant_real, moments, reflect
from .wiener_hopf import (
    mean_passage_below,
    mean_passage_below_zero_drift,
    phi_minus,
    phi_plus,
    rho_minus_at_zero,
    rho_plus_at_zero,
    solve_factorization,
    sup_tail,
)


def double_exponential(lam: float, p: float, c: float, b: float) -> ModelParams:
    return ModelParams(lam, p, c, ExponentialClaims(b))


# name -> (model, (x, T)) used across the suites
REFERENCE_MODELS: dict[str, tuple[ModelParams, tuple[float, float]]] = {
    "symmetric": (double_exponential(1.0, 0.5, 1.0, 1.0), (1.0, 3.0)),
    "m_positive": (double_exponential(1.0, 0.6, 1.0, 2.0), (1.0, 2.0)),
    "m_zero": (double_exponential(1.0, 1.0 / 3.0, 1.0, 2.0), (1.0, 2.0)),
    "m_negative": (double_exponential(1.0, 0.4, 2.0, 1.0), (1.0, 2.0)),
}

SUITES = ("roots", "factorization", "exit", "densities", "limits", "mirror")


@dataclass
class Check:
    name: str
    target: float
    got: float
    tol: float
    passed: bool = False

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def tolerance_scale() -> float:
    return float(os.environ.get("RISKEXIT_TOL", "1.0"))


class Report:
    def __init__(self, scale: float | None = None):
        self.scale = tolerance_scale() if scale is None else scale
        self.checks: list[Check] = []

    def add(self, name: str, target: float, got: float, tol: float) -> Check:
        ok = bool(math.isfinite(got) and abs(got - target) <= tol * self.scale)
        check = Check(name, float(target), float(got), float(tol), ok)
        self.checks.append(check)
        return check

    def add_mc(self, name: str, target: float, est: mc.Estimate, k: float = 3.0) -> Check:
        return self.add(name, target, est.mean, k * est.stderr)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def _models():
    return REFERENCE_MODELS.items()


def check_roots(rep: Report) -> None:
    sym = REFERENCE_MODELS["symmetric"][0]
    for s in (0.1, 1.0, 3.0, 10.0):
        rep.add(f"roots/symmetric/rho_plus(s={s})", math.sqrt(s / (s + 1)),
                solve_factorization(sym, s).rho_plus, 1e-10)
    for name, (params, _) in _models():
        prev = 0.0
        for s in np.logspace(-6, 2, 9):
            f = solve_factorization(params, s)
            rep.add(f"roots/{name}/lundberg(s={s:.0e})", s,
                    cumulant_real(params, f.rho_plus), 1e-10 * max(1.0, s))
            rep.add(f"roots/{name}/p+p-(s={s:.0e})", s / (s + params.lam),
                    f.p_plus * f.p_minus, 1e-10)
            rep.add(f"roots/{name}/increasing(s={s:.0e})", 0.0, max(0.0, prev - f.rho_plus), 0.0)
            prev = f.rho_plus


def check_factorization(rep: Report) -> None:
    alphas = np.linspace(-25.0, 25.0, 100)
    for name, (params, _) in _models():
        for s in (0.5, 1.0):
            f = solve_factorization(params, s)
            err = np.max(np.abs(phi_plus(f, alphas) * phi_minus(f, alphas)
                                - charfn_killed(params, s, alphas)))
            rep.add(f"factorization/{name}/s={s}", 0.0, float(err), 1e-9)


RUIN_TARGETS = {
    "m_positive": 0.7831046559502533,
    "m_zero": 3.0 / 7.0,
    "m_negative": 0.2168953440497467,
}


def check_exit(rep: Report) -> None:
    sym = REFERENCE_MODELS["symmetric"][0]
    rep.add("exit/symmetric/ruin(1,3)", 0.6, ex.ruin_prob(sym, 1.0, 3.0), 1e-15)
    rep.add("exit/symmetric/lower(1,3)", 0.4, 1.0 - ex.ruin_prob(sym, 1.0, 3.0), 1e-15)
    for name, target in RUIN_TARGETS.items():
        params, (x, T) = REFERENCE_MODELS[name]
        rep.add(f"exit/{name}/ruin", target, ex.ruin_prob(params, x, T), 1e-12)
    for name, (params, (x, T)) in _models():
        for s in (0.1, 1.0):
            tr = ex.exit_transforms(params, ex.ExitQuery(x, T, s))
            rep.add(f"exit/{name}/sum(s={s})", 1.0, tr.q_upper + tr.q_lower + tr.non_exit, 1e-12)
        xs = np.linspace(0.05 * T, 0.95 * T, 19)
        vals = [ex.q_upper(params, ex.ExitQuery(xi, T, 1.0)) for xi in xs]
        rep.add(f"exit/{name}/decreasing_in_x", 0.0, max(0.0, float(np.max(np.diff(vals)))), 0.0)
        svals = [ex.q_upper(params, ex.ExitQuery(x, T, s)) for s in np.logspace(-3, 2, 11)]
        rep.add(f"exit/{name}/decreasing_in_s", 0.0, max(0.0, float(np.max(np.diff(svals)))), 0.0)
        rep.add(f"exit/{name}/in_unit_interval", 0.0,
                max(0.0, -min(vals + svals), max(vals + svals) - 1.0), 0.0)
        f = solve_factorization(params, 1.0)
        big_T = 100.0 / f.rho_minus
        rep.add(f"exit/{name}/T_to_infinity", sup_tail(f, x),
                ex.q_upper(params, ex.ExitQuery(x, big_T, 1.0)), 1e-10)
        rep.add(f"exit/{name}/s_to_zero", ex.ruin_prob(params, x, T),
                ex.q_upper(params, ex.ExitQuery(x, T, 1e-8)), 1e-4)


def _quad_mass(fn: Callable[[float], float], lo: float, hi: float) -> float:
    left = quad(fn, lo, 0.0, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    right = quad(fn, 0.0, hi, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    return left + right


def check_densities(rep: Report) -> None:
    for name, (params, (x, T)) in _models():
        for s in (0.3, 1.0):
            q = ex.ExitQuery(x, T, s)
            mass = _quad_mass(lambda z: ex.pre_exit_density(params, q, z), x - T, x)
            rep.add(f"densities/{name}/normalisation(s={s})", ex.non_exit_prob(params, q),
                    mass + ex.atom_at_zero(params, s), 1e-8)
            grid = [z for z in np.linspace(x - T, x, 203)[1:-1] if z != 0.0]
            low = min(ex.pre_exit_density(params, q, z) for z in grid)
            rep.add(f"densities/{name}/nonnegative(s={s})", 0.0, max(0.0, -low), 0.0)
            rep.add(f"densities/{name}/undershoot_boundary(s={s})",
                    s * ex.exit_transforms(params, q).q_lower,
                    ex.undershoot_distribution(params, q, x - T), 1e-8)
        q0 = ex.ExitQuery(x, T, 0.0)
        rep.add(f"densities/{name}/undershoot_mass(s=0)", 1.0 - ex.ruin_prob(params, x, T),
                ex.undershoot_distribution(params, q0, x - T), 1e-10)
        grid = [z for z in np.linspace(x - T, x, 203)[1:-1] if z != 0.0]
        low = min(ex.limit_pre_exit_density(params, x, T, z) for z in grid)
        rep.add(f"densities/{name}/limit_nonnegative", 0.0, max(0.0, -low), 0.0)


def check_limits(rep: Report) -> None:
    s = 1e-8
    m_pos, _ = REFERENCE_MODELS["m_positive"]
    m_zero, _ = REFERENCE_MODELS["m_zero"]
    m_neg, _ = REFERENCE_MODELS["m_negative"]
    mom = moments(m_pos)
    rep.add("limits/m_positive/rho_plus_over_s", 1.0,
            solve_factorization(m_pos, s).rho_plus / s * mom.m, 1e-3)
    mom = moments(m_zero)
    rep.add("limits/m_zero/rho_plus_over_sqrt_s", 1.0,
            solve_factorization(m_zero, s).rho_plus / math.sqrt(s)
            / (math.sqrt(2.0 / mom.sigma1_sq)), 1e-3)
    rep.add("limits/m_negative/rho_plus_to_root", 1.0,
            solve_factorization(m_neg, s).rho_plus / rho_plus_at_zero(m_neg), 1e-3)
    rep.add("limits/m_positive/rho_minus_to_root", 1.0,
            solve_factorization(m_pos, s).rho_minus / rho_minus_at_zero(m_pos), 1e-3)
    rep.add("limits/m_negative/mean_passage(-1)", 5.0, mean_passage_below(m_neg, -1.0), 1e-12)
    sym, _ = REFERENCE_MODELS["symmetric"]
    rep.add("limits/symmetric/mean_passage_aux(-1)", 2.0,
            mean_passage_below_zero_drift(sym, -1.0), 1e-12)
    for name, (params, (x, T)) in _models():
        small = 1e-6
        for z in (x - 0.75 * T, -0.25 * min(x, T - x), 0.5 * x):
            lim = ex.limit_pre_exit_density(params, x, T, z)
            got = ex.pre_exit_density(params, ex.ExitQuery(x, T, small), z) / small
            rep.add(f"limits/{name}/density(z={z:.3g})", 1.0, got / lim, 1e-3)


def check_mirror(rep: Report) -> None:
    for name, (params, (x, T)) in _models():
        for s in (0.2, 1.0, 5.0):
            q = ex.ExitQuery(x, T, s)
            mirrored = ex.q_lower_mirror(params, q)
            rep.add(f"mirror/{name}/reflected(s={s})",
                    ex.q_upper(reflect(params), ex.ExitQuery(T - x, T, s)), mirrored, 1e-10)
            rep.add(f"mirror/{name}/vs_nonexit(s={s})",
                    ex.exit_transforms(params, q).q_lower, mirrored, 1e-10)


def check_monte_carlo(rep: Report, n_paths: int, seed: int = 2005) -> None:
    """MC-oracle agreement, every comparison at 3 standard errors."""
    for i, (name, (params, (x, T))) in enumerate(_models()):
        batch = mc.simulate_exits(params, x, T, n_paths, seed + i)
        est0 = mc.mgf_from_batch(batch, 0.0)
        rep.add_mc(f"mc/{name}/ruin", ex.ruin_prob(params, x, T), est0.upper)
        tr = ex.exit_transforms(params, ex.ExitQuery(x, T, 1.0))
        est1 = mc.mgf_from_batch(batch, 1.0)
        rep.add_mc(f"mc/{name}/q_upper(s=1)", tr.q_upper, est1.upper)
        rep.add_mc(f"mc/{name}/q_lower(s=1)", tr.q_lower, est1.lower)
        g1, g2 = mc.overshoot_moments(batch)
        rep.add_mc(f"mc/{name}/overshoot_mean", 1.0 / params.c, g1)
        rep.add_mc(f"mc/{name}/overshoot_m2", 2.0 / params.c**2, g2)
        obs = mc.estimate_killed_observables(params, ex.ExitQuery(x, T, 1.0), n_paths,
                                             seed + 100 + i, sup_levels=(x,))
        rep.add_mc(f"mc/{name}/non_exit(s=1)", tr.non_exit, obs.non_exit)
        rep.add_mc(f"mc/{name}/atom(s=1)", ex.atom_at_zero(params, 1.0), obs.atom_freq)
        rep.add_mc(f"mc/{name}/sup_tail(s=1)", sup_tail(solve_factorization(params, 1.0), x),
                   obs.sup_tail_at[x])
    m_neg, _ = REFERENCE_MODELS["m_negative"]
    rep.add_mc("mc/m_negative/mean_passage(-1)", mean_passage_below(m_neg, -1.0),
               mc.estimate_mean_passage(m_neg, -1.0, n_paths, seed + 200))
    sym, _ = REFERENCE_MODELS["symmetric"]
    rep.add_mc("mc/symmetric/mean_passage_aux(-1)", mean_passage_below_zero_drift(sym, -1.0),
               mc.estimate_mean_passage(sym, -1.0, n_paths, seed + 201, auxiliary=True))


_SUITE_FUNCS = {
    "roots": check_roots,
    "factorization": check_factorization,
    "exit": check_exit,
    "densities": check_densities,
    "limits": check_limits,
    "mirror": check_mirror,
}


def run_suite(suite: str, mc_paths: int = 0, scale: float | None = None) -> Report:
    if suite != "all" and suite not in _SUITE_FUNCS:
        raise ValueError(f"unknown suite {suite!r}")
    rep = Report(scale)
    for name in (SUITES if suite == "all" else (suite,)):
        _SUITE_FUNCS[name](rep)
    if mc_paths:
        check_monte_carlo(rep, mc_paths)
    return rep
