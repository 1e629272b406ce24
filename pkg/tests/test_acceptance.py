"""The eleven acceptance criteria, each at its stated tolerance.

Every test appends one PASS/FAIL line to RESULTS; conftest prints them at
the end of the run.  ``python tests/test_acceptance.py`` runs them standalone.
Monte Carlo items use 10^6 paths and compare at 3 standard errors.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from conftest import MODELS
from oracles import lundberg_quadratic
from riskexit import exit as ex
from riskexit import mc
from riskexit.laplace import InversionInstabilityWarning, InversionSpec, exit_time_cdf
from riskexit.model import charfn_killed, moments, reflect
from riskexit.wiener_hopf import (
    mean_passage_below,
    mean_passage_below_zero_drift,
    phi_minus,
    phi_plus,
    rho_plus_at_zero,
    solve_factorization,
    sup_tail,
)

N_MC = 1_000_000
K = 3.0
RESULTS: list[str] = []

# exact plug-in values; the six printed digits 0.783099 / 0.216898 are off in the
# sixth place and are reported alongside
RUIN = {"m_positive": 0.7831046559502533, "m_zero": 3 / 7, "m_negative": 0.2168953440497467}
PRINTED = {"m_positive": 0.783099, "m_zero": 3 / 7, "m_negative": 0.216898}


class Criterion:
    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.items: list[tuple[str, bool]] = []

    def check(self, label: str, ok: bool) -> None:
        self.items.append((label, bool(ok)))

    def close(self) -> None:
        failed = [label for label, ok in self.items if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {self.number:2d} {status}: {self.title} ({len(self.items)} checks)"
        if failed:
            line += "; failed: " + "; ".join(failed)
        RESULTS.append(line)
        print(line)
        assert not failed, line


def mc_ok(est: mc.Estimate, target: float) -> bool:
    return abs(est.mean - target) <= K * est.stderr


def mc_label(name: str, est: mc.Estimate, target: float) -> str:
    return f"{name}: mc={est.mean:.6f} target={target:.6f} z={est.z_score(target):+.2f}"


@lru_cache(maxsize=None)
def exit_batch(name: str) -> mc.ExitBatch:
    params, (x, T), _ = MODELS[name]
    seed = 1000 + list(MODELS).index(name)
    # long horizon: e^{-t_max} is negligible for s = 1 and censoring is checked for s = 0
    return mc.simulate_exits(params, x, T, N_MC, seed, t_max=200.0)


def test_criterion_01_roots():
    cr = Criterion(1, "Lundberg roots, symmetric closed form and p+ p- = s/(s+lam)")
    sym = MODELS["symmetric"][0]
    for s in (0.1, 1.0, 3.0, 10.0):
        got = solve_factorization(sym, s).rho_plus
        want = math.sqrt(s / (s + 1))
        cr.check(f"rho_plus(s={s}) err={abs(got - want):.1e}", abs(got - want) <= 1e-10)
    for name, (params, _, raw) in MODELS.items():
        for s in (1e-6, 0.01, 0.1, 1.0, 3.0, 10.0, 100.0):
            f = solve_factorization(params, s)
            err = abs(f.p_plus * f.p_minus - s / (s + params.lam))
            cr.check(f"{name} p+p-(s={s}) err={err:.1e}", err <= 1e-10)
            # independent: roots of the quadratic Lundberg equation
            rp, rm = lundberg_quadratic(*raw, s)
            cr.check(f"{name} quadratic roots (s={s})",
                     abs(f.rho_plus - rp) <= 1e-10 and abs(f.rho_minus - rm) <= 1e-10)
    cr.close()


def test_criterion_02_factorization():
    cr = Criterion(2, "Wiener-Hopf factorization phi+ phi- = phi over 100 real alpha")
    alphas = np.linspace(-25.0, 25.0, 100)
    for name, (params, _, _) in MODELS.items():
        for s in (0.1, 1.0, 5.0):
            f = solve_factorization(params, s)
            err = float(np.max(np.abs(phi_plus(f, alphas) * phi_minus(f, alphas)
                                      - charfn_killed(params, s, alphas))))
            cr.check(f"{name} s={s} max err={err:.1e}", err <= 1e-9)
    cr.close()


def test_criterion_03_symmetric_exit():
    cr = Criterion(3, "symmetric ruin 0.6 / 0.4 and MC upper-exit frequency")
    params, (x, T), _ = MODELS["symmetric"]
    up = ex.ruin_prob(params, x, T)
    low = ex.exit_transforms(params, ex.ExitQuery(x, T, 0.0)).q_lower
    cr.check(f"ruin={up!r}", abs(up - 0.6) <= 1e-15)
    cr.check(f"Q_T={low!r}", abs(low - 0.4) <= 1e-15)
    batch = exit_batch("symmetric")
    cr.check(f"censored={batch.censored_frac}", batch.censored_frac < mc.ZERO_CENSOR_LIMIT)
    est = mc.mgf_from_batch(batch, 0.0).upper
    cr.check(mc_label("upper frequency", est, 0.6), mc_ok(est, 0.6))
    cr.check(f"stderr={est.stderr:.2e} ~ 5e-4", 4e-4 < est.stderr < 6e-4)
    cr.close()


def test_criterion_04_regimes():
    cr = Criterion(4, "ruin probability in the three drift regimes, closed form and MC")
    for name, target in RUIN.items():
        params, (x, T), _ = MODELS[name]
        got = ex.ruin_prob(params, x, T)
        cr.check(f"{name} closed form {got:.12f} vs {target:.12f}", abs(got - target) <= 1e-12)
        cr.check(f"{name} vs printed {PRINTED[name]:.6f} to 1e-5",
                 abs(got - PRINTED[name]) <= 1e-5)
        batch = exit_batch(name)
        cr.check(f"{name} censored={batch.censored_frac}",
                 batch.censored_frac < mc.ZERO_CENSOR_LIMIT)
        est = mc.mgf_from_batch(batch, 0.0).upper
        cr.check(mc_label(name, est, got), mc_ok(est, got))
    cr.close()


def test_criterion_05_transforms():
    cr = Criterion(5, "E[e^{-tau}; exit above] vs MC, and the three-way sum identity")
    for name, (params, (x, T), _) in MODELS.items():
        tr = ex.exit_transforms(params, ex.ExitQuery(x, T, 1.0))
        est = mc.mgf_from_batch(exit_batch(name), 1.0).upper
        cr.check(mc_label(f"{name} q_upper(s=1)", est, tr.q_upper), mc_ok(est, tr.q_upper))
        for s in (0.01, 0.5, 1.0, 10.0):
            t = ex.exit_transforms(params, ex.ExitQuery(x, T, s))
            err = abs(t.q_upper + t.q_lower + t.non_exit - 1.0)
            cr.check(f"{name} sum(s={s}) err={err:.1e}", err <= 1e-12)
    cr.close()


def test_criterion_06_density():
    cr = Criterion(6, "pre-exit density plus atom integrates to the non-exit probability")
    kw = dict(epsabs=1e-13, epsrel=1e-13, limit=200)
    for name, (params, (x, T), _) in MODELS.items():
        for s in (0.3, 1.0, 3.0):
            q = ex.ExitQuery(x, T, s)
            h = lambda z: ex.pre_exit_density(params, q, z)  # noqa: E731
            mass = quad(h, x - T, 0.0, **kw)[0] + quad(h, 0.0, x, **kw)[0]
            err = abs(mass + s / (s + params.lam) - ex.non_exit_prob(params, q))
            cr.check(f"{name} s={s} err={err:.1e}", err <= 1e-8)
        seed = 2000 + list(MODELS).index(name)
        obs = mc.estimate_killed_observables(params, ex.ExitQuery(x, T, 1.0), N_MC, seed)
        target = 1.0 / (1.0 + params.lam)
        cr.check(mc_label(f"{name} atom freq", obs.atom_freq, target),
                 mc_ok(obs.atom_freq, target))
    cr.close()


def test_criterion_07_overshoot():
    cr = Criterion(7, "overshoot given upward exit is Exp(c)")
    for name, (params, _, _) in MODELS.items():
        g1, g2 = mc.overshoot_moments(exit_batch(name))
        c = params.c
        cr.check(mc_label(f"{name} mean", g1, 1 / c), mc_ok(g1, 1 / c))
        cr.check(mc_label(f"{name} second moment", g2, 2 / c**2), mc_ok(g2, 2 / c**2))
    cr.close()


def test_criterion_08_limits():
    cr = Criterion(8, "small-s root asymptotics and the T -> infinity limit")
    s = 1e-8
    m_pos, m_zero, m_neg = (MODELS[k][0] for k in ("m_positive", "m_zero", "m_negative"))
    rel = solve_factorization(m_pos, s).rho_plus / s * moments(m_pos).m - 1
    cr.check(f"m>0 rho+/s vs 1/m rel={rel:.1e}", abs(rel) <= 1e-3)
    rel = (solve_factorization(m_zero, s).rho_plus / math.sqrt(s)
           / math.sqrt(2 / moments(m_zero).sigma1_sq) - 1)
    cr.check(f"m=0 rho+/sqrt(s) vs sqrt(2)/sigma rel={rel:.1e}", abs(rel) <= 1e-3)
    rel = solve_factorization(m_neg, s).rho_plus / rho_plus_at_zero(m_neg) - 1
    cr.check(f"m<0 rho+ vs root rel={rel:.1e}", abs(rel) <= 1e-3)
    for name, (params, (x, _), _) in MODELS.items():
        f = solve_factorization(params, 1.0)
        got = ex.q_upper(params, ex.ExitQuery(x, 100 / f.rho_minus, 1.0))
        err = abs(got - sup_tail(f, x))
        cr.check(f"{name} T=100/rho- err={err:.1e}", err <= 1e-10)
    cr.close()


def test_criterion_09_mean_passage():
    cr = Criterion(9, "mean first passage below -1 (m<0) and auxiliary process (m=0)")
    m_neg = MODELS["m_negative"][0]
    sym = MODELS["symmetric"][0]
    cr.check("closed form m<0 = 5", abs(mean_passage_below(m_neg, -1.0) - 5.0) <= 1e-12)
    cr.check("closed form aux = 2", abs(mean_passage_below_zero_drift(sym, -1.0) - 2.0) <= 1e-12)
    est = mc.estimate_mean_passage(m_neg, -1.0, N_MC, seed=3001)
    cr.check(mc_label("m<0 MC", est, 5.0), mc_ok(est, 5.0))
    est = mc.estimate_mean_passage(sym, -1.0, N_MC, seed=3002, auxiliary=True)
    cr.check(mc_label("auxiliary MC", est, 2.0), mc_ok(est, 2.0))
    cr.close()


def test_criterion_10_mirror():
    cr = Criterion(10, "lower exit from the supremum law equals the reflected upper exit")
    for name, (params, (x, T), _) in MODELS.items():
        for s in (0.1, 1.0, 5.0):
            q = ex.ExitQuery(x, T, s)
            mirrored = ex.q_lower_mirror(params, q)
            reflected = ex.q_upper(reflect(params), ex.ExitQuery(T - x, T, s))
            err = abs(mirrored - reflected)
            cr.check(f"{name} s={s} err={err:.1e}", err <= 1e-10)
    cr.close()


def test_criterion_11_inversion():
    cr = Criterion(11, "Gaver-Stehfest P{tau <= t} vs MC empirical CDF")
    params, (x, T), _ = MODELS["symmetric"]
    grid = (0.5, 1.0, 2.0, 3.0, 5.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InversionInstabilityWarning)
        cdf = exit_time_cdf(params, x, T, InversionSpec(terms=14), grid)
    tau = exit_batch("symmetric").tau
    n = tau.size
    for t, f in zip(grid, cdf):
        emp = float(np.mean(tau <= t))
        se = math.sqrt(f * (1 - f) / n)
        cr.check(f"t={t}: inverted={f:.5f} mc={emp:.5f} z={(emp - f) / se:+.2f}",
                 abs(emp - f) <= K * se)
    cr.close()


if __name__ == "__main__":
    import sys

    failures = 0
    for fn in [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]:
        try:
            fn()
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
