"""Lundberg roots, the Wiener-Hopf factors and the laws of the running extrema.

For a fixed killing rate s > 0 the upper factor depends only on the positive
root rho_plus of psi(-i r) = s.  With exponential claims the lower factor is
rational too, built from the negative root -rho_minus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import ConvergenceError, DomainError, RegimeError, UnsupportedClaimLawError
from .model import ExponentialClaims, ModelParams, cumulant_real, drift, regime

BRACKET_EPS = 1e-12
_RTOL = 1e-15  # tighter than the 1e-12 contract; brentq's floor is 4 * machine eps


@dataclass(frozen=True)
class Factorization:
    s: float
    c: float
    rho_plus: float
    p_plus: float
    q_plus: float
    b: float | None = None
    rho_minus: float | None = None
    p_minus: float | None = None
    q_minus: float | None = None

    @property
    def has_lower(self) -> bool:
        return self.rho_minus is not None


def _solve_increasing(f, lo: float, hi_limit: float, what: str) -> float:
    """Root of f on (lo, hi_limit) given f(lo) < 0 and f -> +inf at hi_limit."""
    hi = hi_limit * (1.0 - BRACKET_EPS)
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo < 0 < f_hi):
        raise ConvergenceError(
            f"{what}: no sign change on [{lo!r}, {hi!r}] (f={f_lo!r}, {f_hi!r})"
        )
    root, info = brentq(f, lo, hi, xtol=1e-300, rtol=_RTOL, maxiter=500, full_output=True)
    if not info.converged:
        raise ConvergenceError(f"{what}: brentq stopped after {info.iterations} iterations "
                               f"in [{lo!r}, {hi!r}]")
    return root


def _lower_cumulant(params: ModelParams, r: float) -> float:
    return cumulant_real(params, -r)


def _claim_rate(params: ModelParams) -> float:
    if not isinstance(params.claims, ExponentialClaims):
        raise UnsupportedClaimLawError("the lower factor needs exponential claims")
    return params.claims.b


def solve_factorization(params: ModelParams, s: float) -> Factorization:
    """Roots and atoms of both factors at killing rate s > 0.

    The lower-side fields stay None unless claims are exponential.
    """
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    # cumulant_real(0) == 0 < s, so r=0 is a valid lower bracket end
    rho_p = _solve_increasing(lambda r: cumulant_real(params, r) - s, 0.0, params.c,
                              "rho_plus")
    p_p = rho_p / params.c
    if not isinstance(params.claims, ExponentialClaims):
        return Factorization(s, params.c, rho_p, p_p, 1.0 - p_p)
    b = params.claims.b
    rho_m = _solve_increasing(lambda r: _lower_cumulant(params, r) - s, 0.0, b, "rho_minus")
    p_m = rho_m / b
    return Factorization(s, params.c, rho_p, p_p, 1.0 - p_p, b, rho_m, p_m, 1.0 - p_m)


def _nonzero_root(f, limit: float, what: str) -> float:
    """Positive root of a convex f with f(0)=0, f'(0)<0 and f -> +inf at ``limit``."""
    res = minimize_scalar(f, bounds=(0.0, limit * (1.0 - BRACKET_EPS)), method="bounded",
                          options={"xatol": 1e-12 * limit})
    if not res.fun < 0:
        raise ConvergenceError(f"{what}: cumulant has no negative minimum on (0, {limit})")
    return _solve_increasing(f, res.x, limit, what)


def rho_plus_at_zero(params: ModelParams) -> float:
    """lim_{s->0} rho_plus(s): the nonzero root of psi(-i r) = 0 when m < 0, else 0."""
    if regime(params) != "negative":
        return 0.0
    return _nonzero_root(lambda r: cumulant_real(params, r), params.c, "rho_plus(0)")


def rho_minus_at_zero(params: ModelParams) -> float:
    """lim_{s->0} rho_minus(s): positive when m > 0, else 0 (exponential claims)."""
    b = _claim_rate(params)
    if regime(params) != "positive":
        return 0.0
    return _nonzero_root(lambda r: _lower_cumulant(params, r), b, "rho_minus(0)")


def sup_tail(fact: Factorization, x: float) -> float:
    """P{sup of xi on [0, theta_s] > x} for x > 0."""
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    if math.isinf(x):
        return 0.0
    return fact.q_plus * math.exp(-fact.rho_plus * x)


def inf_distribution(fact: Factorization, x: float) -> float:
    """P{inf of xi on [0, theta_s] < x} for x < 0."""
    if not fact.has_lower:
        raise UnsupportedClaimLawError("the infimum law needs exponential claims")
    if not x < 0:
        raise DomainError(f"x must be negative, got {x}")
    if math.isinf(x):
        return 0.0
    return fact.q_minus * math.exp(fact.rho_minus * x)


def phi_plus(fact: Factorization, alpha):
    alpha = np.asarray(alpha, dtype=float)
    return fact.p_plus * (fact.c - 1j * alpha) / (fact.rho_plus - 1j * alpha)


def phi_minus(fact: Factorization, alpha):
    if not fact.has_lower:
        raise UnsupportedClaimLawError("phi_minus needs exponential claims")
    alpha = np.asarray(alpha, dtype=float)
    return fact.p_minus * (fact.b + 1j * alpha) / (fact.rho_minus + 1j * alpha)


def mean_passage_below(params: ModelParams, x: float) -> float:
    """E tau^-(x) = (1 - b x) / (lam p_plus) for x < 0 under negative drift."""
    b = _claim_rate(params)
    if not x < 0:
        raise DomainError(f"level must be negative, got {x}")
    if regime(params) != "negative":
        raise RegimeError(f"needs m < 0, got m={drift(params)!r}")
    p_plus = rho_plus_at_zero(params) / params.c
    return (1.0 - b * x) / (params.lam * p_plus)


def zero_drift_rate(params: ModelParams) -> float:
    """Jump rate lam_0 = lam q (c + b) / b of the auxiliary decreasing process."""
    b = _claim_rate(params)
    return params.lam * params.q * (params.c + b) / b


def mean_passage_below_zero_drift(params: ModelParams, x: float) -> float:
    """E tau_0(x) = (1 - b x) / lam_0 for the auxiliary process when m = 0."""
    b = _claim_rate(params)
    if not x < 0:
        raise DomainError(f"level must be negative, got {x}")
    if regime(params) != "zero":
        raise RegimeError(f"needs m = 0, got m={drift(params)!r}")
    return (1.0 - b * x) / zero_drift_rate(params)
