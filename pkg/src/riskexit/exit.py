"""Two-sided exit from the interval (x - T, x) for double-exponential models.

Every integral against the infimum law dP-(s, .) is done in closed form.
That law is an atom at 0 plus an exponential density on (-inf, 0), and the
atom always counts, so integrals over [a, 0] are closed on the right.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ConsistencyError, DomainError, UnsupportedClaimLawError
from .model import ExponentialClaims, ModelParams, drift, regime
from .wiener_hopf import (
    Factorization,
    rho_minus_at_zero,
    rho_plus_at_zero,
    solve_factorization,
    zero_drift_rate,
)


@dataclass(frozen=True)
class ExitQuery:
    """Interval (x - T, x) around the start point 0, transform argument s."""

    x: float
    T: float
    s: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.x < self.T) or not math.isfinite(self.T):
            raise DomainError(f"need 0 < x < T, got x={self.x}, T={self.T}")
        if not (self.s >= 0.0) or not math.isfinite(self.s):
            raise DomainError(f"s must be finite and >= 0, got {self.s}")

    @property
    def lower(self) -> float:
        return self.x - self.T


@dataclass(frozen=True)
class ExitTransforms:
    q_upper: float
    q_lower: float
    q_total: float
    non_exit: float


# -- closed-form integrals ---------------------------------------------------

def _int_exp(k: float, lo: float, hi: float) -> float:
    """Integral of exp(k z) over [lo, hi]."""
    if k == 0.0:
        return hi - lo
    return math.exp(k * lo) * math.expm1(k * (hi - lo)) / k


def _int_zexp(k: float, lo: float, hi: float) -> float:
    """Integral of z exp(k z) over [lo, hi]."""
    if abs(k) * max(abs(lo), abs(hi)) < 1e-6:
        return ((hi**2 - lo**2) / 2 + k * (hi**3 - lo**3) / 3
                + k * k * (hi**4 - lo**4) / 8)
    return (math.exp(k * hi) * (hi / k - 1 / k**2)
            - math.exp(k * lo) * (lo / k - 1 / k**2))


@dataclass(frozen=True)
class _LowerMeasure:
    """atom at 0 plus density coef * exp(rate * y) on y < 0."""

    atom: float
    coef: float
    rate: float

    def integral(self, lo: float, k: float) -> float:
        """Integral of exp(k y) over [lo, 0], atom included."""
        return self.atom + self.coef * _int_exp(k + self.rate, lo, 0.0)

    def beyond(self, level: float, c: float) -> float:
        """Integral of exp(c (y - level)) over (-inf, level], level < 0."""
        return self.coef * math.exp(self.rate * level) / (c + self.rate)

    def kernel_terms(self, rho: float) -> list[tuple[float, int, float]]:
        """u -> integral over [u, 0] of exp(rho (y - u)) as (coef, power, rate) terms."""
        k = rho + self.rate
        if k == 0.0:
            return [(self.atom, 0, -rho), (-self.coef, 1, -rho)]
        return [(self.atom + self.coef / k, 0, -rho), (-self.coef / k, 0, self.rate)]


Terms = list[tuple[float, int, float]]


def _shift(terms: Terms, x: float) -> Terms:
    """Rewrite f(z - x) as terms in z."""
    out: Terms = []
    for a, n, k in terms:
        scale = a * math.exp(-k * x)
        if n == 0:
            out.append((scale, 0, k))
        else:
            out.append((scale, 1, k))
            out.append((-scale * x, 0, k))
    return out


def _eval(terms: Terms, z: float) -> float:
    return sum(a * (z if n else 1.0) * math.exp(k * z) for a, n, k in terms)


def _integrate(terms: Terms, lo: float, hi: float, w: float = 0.0) -> float:
    """Integral of exp(w z) * terms(z) over [lo, hi]."""
    return sum(a * (_int_zexp(k + w, lo, hi) if n else _int_exp(k + w, lo, hi))
               for a, n, k in terms)


@dataclass(frozen=True)
class _DensityForm:
    """h(z) = [A mu'(z) - B J(z)] 1{z<0} + C J(z - x), J(u) = int_u^0 e^{rho(y-u)} dmu(y).

    Covers the pre-exit density at s > 0 and its s -> 0 limits, which only
    differ in the coefficients and in the measure mu.
    """

    x: float
    T: float
    neg: Terms
    pos: Terms

    @classmethod
    def build(cls, x, T, mu: _LowerMeasure, rho, A, B, C):
        kernel = mu.kernel_terms(rho)
        upper = [(C * a, n, k) for a, n, k in _shift(kernel, x)]
        lower = [(A * mu.coef, 0, mu.rate)] + [(-B * a, n, k) for a, n, k in kernel]
        return cls(x, T, lower + upper, upper)

    def __call__(self, z: float) -> float:
        if not (self.x - self.T < z < self.x) or z == 0.0:
            raise DomainError(f"z={z} outside (x-T, x) minus {{0}}")
        return _eval(self.neg if z < 0 else self.pos, z)

    def integral(self, w: float = 0.0) -> float:
        """Integral of exp(w z) h(z) over (x - T, x)."""
        return (_integrate(self.neg, self.x - self.T, 0.0, w)
                + _integrate(self.pos, 0.0, self.x, w))


# -- helpers ---------------------------------------------------------------

def _require_exp(params: ModelParams) -> float:
    if not isinstance(params.claims, ExponentialClaims):
        raise UnsupportedClaimLawError("closed-form exit functionals need exponential claims")
    return params.claims.b


def _infimum_measure(fact: Factorization) -> _LowerMeasure:
    return _LowerMeasure(fact.p_minus, fact.q_minus * fact.rho_minus, fact.rho_minus)


def _upper_exit(q_plus, rho, mu: _LowerMeasure, c, x, T) -> float:
    """Upper-exit formula written against a generic lower measure mu."""
    num = mu.integral(x - T, rho)
    den = math.exp(-rho * T) * mu.beyond(-T, c) + mu.integral(-T, rho)
    return q_plus * math.exp(-rho * x) * num / den


def _factor(params: ModelParams, s: float) -> Factorization:
    _require_exp(params)
    fact = solve_factorization(params, s)
    if not (fact.rho_plus > 0 and fact.rho_minus > 0):
        raise ConsistencyError(f"non-positive Lundberg roots at s={s}")
    return fact


# -- public API ------------------------------------------------------------

def q_upper(params: ModelParams, query: ExitQuery) -> float:
    """E[exp(-s tau); exit above]; s = 0 gives the ruin probability."""
    _require_exp(params)
    if query.s == 0.0:
        return ruin_prob(params, query.x, query.T)
    fact = _factor(params, query.s)
    return _upper_exit(fact.q_plus, fact.rho_plus, _infimum_measure(fact), params.c,
                       query.x, query.T)


def ruin_prob(params: ModelParams, x: float, T: float) -> float:
    """Probability that the first exit from (x - T, x) is upward."""
    b = _require_exp(params)
    ExitQuery(x, T)
    c = params.c
    reg = regime(params)
    if reg == "zero":
        return c * (1 + b * (T - x)) / (b + c + b * c * T)
    if reg == "positive":
        rm = rho_minus_at_zero(params)
        qm = 1 - rm / b
        return (1 - qm * math.exp(rm * (x - T))) / (1 - qm * c / (c + rm) * math.exp(-rm * T))
    rp = rho_plus_at_zero(params)
    qp = 1 - rp / c
    ratio = b / (rp + b)
    return (qp * math.exp(-rp * x) * (1 - ratio * math.exp(rp * (x - T)))
            / (1 - ratio * qp * math.exp(-rp * T)))


def _limit_setup(params: ModelParams) -> tuple[_LowerMeasure, float, float, float, float]:
    """(mu, rho, A, B, C/Q) of the s -> 0 limit density, by drift regime.

    m > 0: mu is the law of the all-time infimum and rho_plus(s) ~ s/m.
    m < 0: mu = -d E tau^-(y) with E tau^-(y) = (1 - b y)/(lam p_plus).
    m = 0: mu = -d E tau_0(y)/k0 with E tau_0(y) = (1 - b y)/lam_0; k0 cancels.
    """
    b = _require_exp(params)
    lam, c = params.lam, params.c
    reg = regime(params)
    if reg == "positive":
        m = drift(params)
        rm = rho_minus_at_zero(params)
        mu = _LowerMeasure(rm / b, (1 - rm / b) * rm, rm)
        return mu, 0.0, 1 / (m * c), 1 / m, 1 / m
    if reg == "negative":
        rp = rho_plus_at_zero(params)
        pp = rp / c
        mu = _LowerMeasure(1 / (lam * pp), b / (lam * pp), 0.0)
        return mu, rp, pp, (1 - pp) * rp, rp
    mu = _LowerMeasure(1 / lam, b / zero_drift_rate(params), 0.0)
    return mu, 0.0, 1.0, c, c


def _pre_exit_form(params: ModelParams, query: ExitQuery) -> _DensityForm:
    fact = _factor(params, query.s)
    qt = _upper_exit(fact.q_plus, fact.rho_plus, _infimum_measure(fact), params.c,
                     query.x, query.T)
    return _DensityForm.build(query.x, query.T, _infimum_measure(fact), fact.rho_plus,
                              fact.p_plus, fact.q_plus * fact.rho_plus, fact.rho_plus * qt)


def _limit_form(params: ModelParams, x: float, T: float) -> _DensityForm:
    mu, rho, A, B, c_over_q = _limit_setup(params)
    return _DensityForm.build(x, T, mu, rho, A, B, c_over_q * ruin_prob(params, x, T))


def pre_exit_density(params: ModelParams, query: ExitQuery, z: float) -> float:
    """Density of xi(theta_s) at z on {tau > theta_s}, z in (x - T, x), z != 0."""
    if query.s == 0.0:
        raise DomainError("pre-exit density needs s > 0; see limit_pre_exit_density")
    return _pre_exit_form(params, query)(z)


def atom_at_zero(params: ModelParams, s: float) -> float:
    """P{xi(theta_s) = 0, tau > theta_s}: no jump before theta_s."""
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    return s / (s + params.lam)


def limit_pre_exit_density(params: ModelParams, x: float, T: float, z: float) -> float:
    """lim_{s->0} h_s(T, x, z) / s for the drift regime of ``params``."""
    ExitQuery(x, T)
    return _limit_form(params, x, T)(z)


def non_exit_prob(params: ModelParams, query: ExitQuery) -> float:
    """P{tau > theta_s}."""
    if query.s == 0.0:
        _require_exp(params)
        return 0.0
    fact = _factor(params, query.s)
    qt = _upper_exit(fact.q_plus, fact.rho_plus, _infimum_measure(fact), params.c,
                     query.x, query.T)
    rm, qm = fact.rho_minus, fact.q_minus
    above_lower = 1 - qm * math.exp(rm * query.lower)
    after_upper = 1 - qm * params.c / (params.c + rm) * math.exp(-rm * query.T)
    return above_lower - qt * after_upper


def exit_transforms(params: ModelParams, query: ExitQuery) -> ExitTransforms:
    up = q_upper(params, query)
    if query.s == 0.0:
        return ExitTransforms(up, 1.0 - up, 1.0, 0.0)
    stay = non_exit_prob(params, query)
    total = 1.0 - stay
    low = total - up
    if not (-1e-12 <= low <= 1.0):
        raise ConsistencyError(f"lower-exit transform {low!r} outside [0, 1]")
    return ExitTransforms(up, low, total, stay)


def overshoot_transform(params: ModelParams, query: ExitQuery, alpha: float) -> tuple[complex, complex]:
    """(E[e^{i alpha overshoot - s tau}; up], E[e^{i alpha xi(tau) - s tau}; up])."""
    qt = q_upper(params, query)
    v_over = params.c / (params.c - 1j * alpha) * qt
    return v_over, cmath.exp(1j * alpha * query.x) * v_over


def undershoot_distribution(params: ModelParams, query: ExitQuery, z: float) -> float:
    """s E[e^{-s tau}; xi(tau) < z, exit below] for z <= x - T.

    At s = 0 returns P{xi(tau) < z, exit below} instead (the s -> 0 limit
    of the transform divided by s).
    """
    b = _require_exp(params)
    if z > query.lower:
        raise DomainError(f"z={z} above the lower barrier {query.lower}")
    if math.isinf(z):
        return 0.0
    lam_q = params.lam * params.q
    if query.s == 0.0:
        form = _limit_form(params, query.x, query.T)
        atom = 1.0 / params.lam
    else:
        form = _pre_exit_form(params, query)
        atom = atom_at_zero(params, query.s)
    # Pi_-(u) = lam q e^{b u} for u < 0
    return lam_q * math.exp(b * z) * (atom + form.integral(-b))


def q_lower_mirror(params: ModelParams, query: ExitQuery) -> float:
    """E[exp(-s tau); exit below] from the supremum law dP+(s, .)."""
    b = _require_exp(params)
    if query.s == 0.0:
        return 1.0 - ruin_prob(params, query.x, query.T)
    fact = _factor(params, query.s)
    rp, pp, qp = fact.rho_plus, fact.p_plus, fact.q_plus
    rm, qm = fact.rho_minus, fact.q_minus
    k = rp + rm
    x, T = query.x, query.T
    # both sides scaled by exp(-rho_minus T)
    num = qm * (pp + qp * rp * _int_exp(-k, 0.0, x)) * math.exp(rm * (x - T))
    den = (qp * rp * math.exp(-k * T) / (b + rp)
           + pp + qp * rp * _int_exp(-k, 0.0, T))
    return num / den
