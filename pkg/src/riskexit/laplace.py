"""Gaver-Stehfest inversion of real Laplace transforms.

Used to turn E exp(-s tau) into P{tau <= t}: invert E exp(-s tau) / s.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

STABILITY_RTOL = 1e-4


class InversionInstabilityWarning(UserWarning):
    """Results for N and N - 2 terms disagree."""


@dataclass(frozen=True)
class InversionSpec:
    method: str = "gaver-stehfest"
    terms: int = 14
    t_grid: tuple[float, ...] = ()

    def __post_init__(self):
        if self.method != "gaver-stehfest":
            raise DomainError(f"unknown inversion method {self.method!r}")
        if self.terms % 2 or not 8 <= self.terms <= 20:
            raise DomainError(f"terms must be even and in [8, 20], got {self.terms}")


@lru_cache(maxsize=None)
def stehfest_weights(n: int) -> tuple[float, ...]:
    """Stehfest weights V_1..V_n, computed exactly then rounded."""
    half = n // 2
    out = []
    for k in range(1, n + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            acc += Fraction(j**half * math.factorial(2 * j),
                            math.factorial(half - j) * math.factorial(j) * math.factorial(j - 1)
                            * math.factorial(k - j) * math.factorial(2 * j - k))
        out.append(float((-1) ** (k + half) * acc))
    return tuple(out)


def _stehfest(transform: Callable[[float], float], t: float, n: int) -> float:
    a = math.log(2.0) / t
    return a * sum(v * transform(k * a) for k, v in enumerate(stehfest_weights(n), start=1))


def invert(transform: Callable[[float], float], spec: InversionSpec, t: float) -> float:
    """Approximate f(t) from its Laplace transform F(s), s > 0."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    value = _stehfest(transform, t, spec.terms)
    check = _stehfest(transform, t, spec.terms - 2)
    if abs(value - check) > STABILITY_RTOL * max(abs(value), abs(check)):
        warnings.warn(f"Gaver-Stehfest unstable at t={t}: {spec.terms} terms give {value!r}, "
                      f"{spec.terms - 2} give {check!r}", InversionInstabilityWarning,
                      stacklevel=2)
    return value


def invert_grid(transform: Callable[[float], float], spec: InversionSpec,
                t_grid: Sequence[float] | None = None) -> np.ndarray:
    grid = spec.t_grid if t_grid is None else t_grid
    return np.array([invert(transform, spec, t) for t in grid])


def cdf_from_mgf(mgf: Callable[[float], float], spec: InversionSpec,
                 t_grid: Sequence[float] | None = None) -> np.ndarray:
    """P{tau <= t} from s -> E exp(-s tau)."""
    return invert_grid(lambda s: mgf(s) / s, spec, t_grid)


def exit_time_cdf(params, x: float, T: float, spec: InversionSpec,
                  t_grid: Sequence[float] | None = None, side: str = "total") -> np.ndarray:
    """P{tau <= t} (or P{tau <= t, exit on ``side``}) for the interval (x - T, x)."""
    from .exit import ExitQuery, exit_transforms

    field = {"total": "q_total", "upper": "q_upper", "lower": "q_lower"}[side]
    return cdf_from_mgf(lambda s: getattr(exit_transforms(params, ExitQuery(x, T, s)), field),
                        spec, t_grid)
