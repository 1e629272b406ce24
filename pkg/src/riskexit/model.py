"""The surplus process xi(t) = C(t) - S(t): parameters, cumulant and moments.

Jumps arrive at rate ``lam``.  With probability ``p`` a jump is an upward
premium of size Exp(c); otherwise it is a downward claim drawn from
``claims``.  Everything downstream reads its parameters from
:class:`ModelParams`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Literal, Union

import numpy as np

from .errors import DomainError, UnsupportedClaimLawError

QUANTILE_NODES = 4097  # 2**12 + 1 trapezoid nodes for generic-claim transforms
ZERO_DRIFT_RTOL = 1e-12

Regime = Literal["positive", "negative", "zero"]


@dataclass(frozen=True)
class ExponentialClaims:
    """Claims ~ Exp(b), mean 1/b."""

    b: float

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.b)):
            raise DomainError(f"claim rate b must be positive and finite, got {self.b}")

    @property
    def mean(self) -> float:
        return 1.0 / self.b

    @property
    def second_moment(self) -> float:
        return 2.0 / self.b**2

    def laplace(self, r: float) -> float:
        """E[exp(-r * claim)], defined for r > -b."""
        if r <= -self.b:
            raise DomainError(f"r={r} outside (-b, inf) for Exp(b={self.b}) claims")
        return self.b / (self.b + r)

    def charfn(self, alpha):
        """E[exp(-i alpha claim)]; the jump itself is -claim."""
        return self.b / (self.b + 1j * np.asarray(alpha))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.exponential(1.0 / self.b, n)

    def to_dict(self) -> dict:
        return {"type": "exp", "b": self.b}


@dataclass(frozen=True, eq=False)
class GenericClaims:
    """Claims given by an inverse-CDF table or an empirical sample.

    ``kind="table"``: ``levels`` are probability levels from 0 to 1 and
    ``values`` the matching quantiles; the quantile function is linear
    between nodes.  ``kind="sample"``: ``values`` are equally weighted
    observations and ``levels`` is unused.
    """

    kind: Literal["table", "sample"]
    values: np.ndarray
    levels: np.ndarray | None = None
    mean: float = field(init=False)
    second_moment: float = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 2:
            raise DomainError("generic claims need at least two values")
        if not np.all(np.isfinite(values)):
            raise DomainError("claim values must be finite")
        if self.kind == "table":
            levels = np.asarray(self.levels, dtype=float)
            object.__setattr__(self, "levels", levels)
            if levels.shape != values.shape:
                raise DomainError("table q and x must have equal length")
            if levels[0] != 0.0 or levels[-1] != 1.0 or np.any(np.diff(levels) <= 0):
                raise DomainError("table q must increase strictly from 0 to 1")
            if np.any(np.diff(values) < 0):
                raise DomainError("table x must be non-decreasing")
            if values[0] < 0 or values[1] <= 0:
                raise DomainError("claims must be strictly positive")
            # exact moments of the piecewise-linear quantile function
            dq = np.diff(levels)
            lo, hi = values[:-1], values[1:]
            mean = float(np.sum(dq * (lo + hi) / 2))
            m2 = float(np.sum(dq * (lo * lo + lo * hi + hi * hi) / 3))
        elif self.kind == "sample":
            if np.any(values <= 0):
                raise DomainError("claims must be strictly positive")
            mean = float(values.mean())
            m2 = float(np.mean(values * values))
        else:
            raise DomainError(f"unknown generic claim kind {self.kind!r}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "second_moment", max(m2, mean * mean))

    @property
    def upper(self) -> float:
        return float(self.values.max())

    def _quantile_grid(self) -> tuple[np.ndarray, np.ndarray]:
        u = np.linspace(0.0, 1.0, QUANTILE_NODES)
        return u, np.interp(u, self.levels, self.values)

    def _expect(self, fn) -> complex | float:
        if self.kind == "sample":
            return np.mean(fn(self.values))
        u, xq = self._quantile_grid()
        return np.trapezoid(fn(xq), u)

    def laplace(self, r: float) -> float:
        if r < 0:
            raise DomainError(f"r={r} < 0: generic claims only support r >= 0")
        return float(self._expect(lambda v: np.exp(-r * v)))

    def charfn(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        return np.vectorize(lambda a: complex(self._expect(lambda v: np.exp(-1j * a * v))))(alpha)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "sample":
            return self.values[rng.integers(0, self.values.size, n)]
        return np.interp(rng.random(n), self.levels, self.values)

    def to_dict(self) -> dict:
        if self.kind == "sample":
            return {"type": "sample", "values": self.values.tolist()}
        return {"type": "table", "q": self.levels.tolist(), "x": self.values.tolist()}


ClaimDistribution = Union[ExponentialClaims, GenericClaims]


def claims_from_dict(spec: dict[str, Any]) -> ClaimDistribution:
    kind = spec.get("type")
    if kind == "exp":
        return ExponentialClaims(float(spec["b"]))
    if kind == "table":
        return GenericClaims("table", spec["x"], spec["q"])
    if kind == "sample":
        return GenericClaims("sample", spec["values"])
    raise DomainError(f"unknown claim type {kind!r}")


@dataclass(frozen=True)
class ModelParams:
    """Jump rate ``lam``, up-jump probability ``p``, premium rate ``c``, claim law."""

    lam: float
    p: float
    c: float
    claims: ClaimDistribution

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if not (0.0 < self.p < 1.0):
            raise DomainError(f"p must lie in (0, 1), got {self.p}")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise DomainError(f"c must be positive, got {self.c}")

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def is_double_exponential(self) -> bool:
        return isinstance(self.claims, ExponentialClaims)

    @classmethod
    def from_dict(cls, spec: dict[str, Any]) -> "ModelParams":
        try:
            lam, p, c = float(spec["lambda"]), float(spec["p"]), float(spec["c"])
            claims = claims_from_dict(spec["claims"])
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed model spec: {exc}") from exc
        if "q" in spec and abs(float(spec["q"]) + p - 1.0) > 1e-12:
            raise DomainError("p + q must equal 1")
        return cls(lam, p, c, claims)

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "p": self.p, "c": self.c, "claims": self.claims.to_dict()}


@dataclass(frozen=True)
class Moments:
    m: float
    sigma1_sq: float


def drift(params: ModelParams) -> float:
    return params.lam * (params.p / params.c - params.q * params.claims.mean)


def variance(params: ModelParams) -> float:
    return params.lam * (2 * params.p / params.c**2 + params.q * params.claims.second_moment)


def moments(params: ModelParams) -> Moments:
    return Moments(drift(params), variance(params))


def regime(params: ModelParams) -> Regime:
    """Sign of the drift, with a relative tolerance around zero."""
    m = drift(params)
    scale = params.lam * (params.p / params.c + params.q * params.claims.mean)
    if abs(m) <= ZERO_DRIFT_RTOL * scale:
        return "zero"
    return "positive" if m > 0 else "negative"


def cumulant_real(params: ModelParams, r: float) -> float:
    """psi(-i r) = lam p r/(c-r) + lam q (E exp(-r claim) - 1).

    Valid for r in (-b, c) with exponential claims and [0, c) otherwise.
    """
    if not r < params.c:
        raise DomainError(f"r={r} >= c={params.c}: premium moment generating function diverges")
    if r == 0.0:
        return 0.0
    lam, p, q, c = params.lam, params.p, params.q, params.c
    claims = params.claims
    if isinstance(claims, ExponentialClaims):
        if r <= -claims.b:
            raise DomainError(f"r={r} <= -b={-claims.b}")
        # lam q (b/(b+r) - 1) written without cancellation
        return lam * p * r / (c - r) - lam * q * r / (claims.b + r)
    return lam * p * r / (c - r) + lam * q * (claims.laplace(r) - 1.0)


def cumulant(params: ModelParams, alpha):
    """psi(alpha) on the real axis (complex valued)."""
    alpha = np.asarray(alpha, dtype=float)
    c = params.c
    up = params.lam * params.p * (c / (c - 1j * alpha) - 1.0)
    down = params.lam * params.q * (params.claims.charfn(alpha) - 1.0)
    return up + down


def charfn_killed(params: ModelParams, s: float, alpha):
    """E exp(i alpha xi(theta_s)) = s / (s - psi(alpha)) for an Exp(s) time theta_s."""
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    return s / (s - cumulant(params, alpha))


def reflect(params: ModelParams) -> ModelParams:
    """The model for -xi(t): swaps p<->q and c<->b (double-exponential only)."""
    if not isinstance(params.claims, ExponentialClaims):
        raise UnsupportedClaimLawError("reflection needs exponential claims")
    return ModelParams(params.lam, params.q, params.claims.b, ExponentialClaims(params.c))
