"""Exact event-driven Monte Carlo for the surplus process.

Paths are piecewise constant, so they are advanced jump by jump with no time
grid.  All paths of a chunk move together as numpy arrays.  Each chunk draws
from its own child stream ``SeedSequence(seed, spawn_key=(chunk,))``, so an
estimate depends only on ``(params, query, n_paths, seed)`` and never on how
chunks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .errors import CensoringError, DomainError, RegimeError
from .exit import ExitQuery
from .model import ExponentialClaims, GenericClaims, ModelParams, drift, regime, variance

CHUNK_SIZE = 1 << 16
MIN_PATHS = 1000
ZERO_CENSOR_LIMIT = 1e-4
PASSAGE_CENSOR_LIMIT = 1e-3

UPPER, LOWER, CENSORED = 1, -1, 0
_SIDE_NAMES = {UPPER: "upper", LOWER: "lower", CENSORED: "censored"}


@dataclass(frozen=True)
class ExitSample:
    tau: float
    side: str
    overshoot: float
    position: float
    jumps: int


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n: int

    @classmethod
    def from_samples(cls, values) -> "Estimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        if n < 2:
            raise ValueError("an estimate needs at least two samples")
        return cls(float(values.mean()), float(values.std(ddof=1) / math.sqrt(n)), n)

    def z_score(self, target: float) -> float:
        if self.stderr == 0.0:
            return 0.0 if self.mean == target else math.inf
        return (self.mean - target) / self.stderr


@dataclass(frozen=True)
class ExitBatch:
    """Raw outcomes of many exit simulations, in chunk order."""

    tau: np.ndarray
    side: np.ndarray
    position: np.ndarray
    jumps: np.ndarray
    x: float
    T: float
    t_max: float

    @property
    def n(self) -> int:
        return self.tau.size

    @property
    def censored_frac(self) -> float:
        return float(np.mean(self.side == CENSORED))

    def overshoots(self) -> np.ndarray:
        up = self.side == UPPER
        return self.position[up] - self.x


@dataclass(frozen=True)
class ExitMgfEstimate:
    upper: Estimate
    lower: Estimate
    total: Estimate
    censored_frac: float
    t_max: float


def child_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _chunks(n_paths: int) -> list[tuple[int, int]]:
    return [(i, min(CHUNK_SIZE, n_paths - start))
            for i, start in enumerate(range(0, n_paths, CHUNK_SIZE))]


def _run_chunks(fn, n_paths: int, seed: int, workers: int) -> list:
    jobs = _chunks(n_paths)
    if workers <= 1 or len(jobs) == 1:
        return [fn(child_rng(seed, i), n) for i, n in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call_chunk, [(fn, seed, i, n) for i, n in jobs]))


def _call_chunk(job):
    fn, seed, i, n = job
    return fn(child_rng(seed, i), n)


def _draw_jumps(params: ModelParams, rng: np.random.Generator, n: int) -> np.ndarray:
    up = rng.random(n) < params.p
    out = np.empty(n)
    n_up = int(up.sum())
    out[up] = rng.exponential(1.0 / params.c, n_up)
    out[~up] = -params.claims.sample(rng, n - n_up)
    return out


def default_t_max(params: ModelParams, T: float) -> float:
    """50/|m|, or the diffusive scale 50 T^2 lam / sigma^2 when m = 0."""
    if regime(params) == "zero":
        return 50.0 * T * T * params.lam / variance(params)
    return 50.0 / abs(drift(params))


def _exit_chunk(params: ModelParams, x: float, T: float, t_max: float,
                rng: np.random.Generator, n: int):
    tau = np.full(n, t_max)
    side = np.zeros(n, dtype=np.int8)
    position = np.zeros(n)
    jumps = np.zeros(n, dtype=np.int64)
    idx = np.arange(n)
    t = np.zeros(n)
    pos = np.zeros(n)
    lo = x - T
    while idx.size:
        m = idx.size
        t_next = t + rng.exponential(1.0 / params.lam, m)
        alive = t_next <= t_max
        # censored paths keep their last position
        dead = idx[~alive]
        position[dead] = pos[~alive]
        idx, t, pos = idx[alive], t_next[alive], pos[alive]
        pos = pos + _draw_jumps(params, rng, idx.size)
        jumps[idx] += 1
        up = pos >= x
        down = pos <= lo
        done = up | down
        hit = idx[done]
        tau[hit] = t[done]
        position[hit] = pos[done]
        side[idx[up]] = UPPER
        side[idx[down]] = LOWER
        keep = ~done
        idx, t, pos = idx[keep], t[keep], pos[keep]
    return tau, side, position, jumps


def simulate_exits(params: ModelParams, x: float, T: float, n_paths: int, seed: int,
                   t_max: float | None = None, workers: int = 1) -> ExitBatch:
    """Simulate ``n_paths`` first exits from (x - T, x), censored at ``t_max``."""
    if not 0 < x < T:
        raise DomainError(f"need 0 < x < T, got x={x}, T={T}")
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    t_max = default_t_max(params, T) if t_max is None else float(t_max)
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    parts = _run_chunks(partial(_exit_chunk, params, x, T, t_max), n_paths, seed, workers)
    tau, side, position, jumps = (np.concatenate(col) for col in zip(*parts))
    return ExitBatch(tau, side, position, jumps, x, T, t_max)


def simulate_exit(params: ModelParams, x: float, T: float, rng: np.random.Generator,
                  t_max: float) -> ExitSample:
    """One path until it leaves (x - T, x) or reaches ``t_max``."""
    if not 0 < x < T:
        raise DomainError(f"need 0 < x < T, got x={x}, T={T}")
    tau, side, position, jumps = _exit_chunk(params, x, T, t_max, rng, 1)
    s = int(side[0])
    overshoot = float(position[0] - x) if s == UPPER else 0.0
    return ExitSample(float(tau[0]), _SIDE_NAMES[s], overshoot, float(position[0]), int(jumps[0]))


def _check_paths(n_paths: int) -> None:
    if n_paths < MIN_PATHS:
        raise ValueError(f"n_paths must be at least {MIN_PATHS}, got {n_paths}")


def mgf_from_batch(batch: ExitBatch, s: float) -> ExitMgfEstimate:
    weight = np.exp(-s * batch.tau) if s > 0 else np.ones(batch.n)
    up = np.where(batch.side == UPPER, weight, 0.0)
    low = np.where(batch.side == LOWER, weight, 0.0)
    return ExitMgfEstimate(Estimate.from_samples(up), Estimate.from_samples(low),
                           Estimate.from_samples(up + low), batch.censored_frac, batch.t_max)


def estimate_exit_mgf(params: ModelParams, query: ExitQuery, n_paths: int, seed: int,
                      t_max: float | None = None, workers: int = 1) -> ExitMgfEstimate:
    """MC estimates of E[e^{-s tau}; A+], E[e^{-s tau}; A-] and E[e^{-s tau}]."""
    _check_paths(n_paths)
    x, T, s = query.x, query.T, query.s
    if t_max is None:
        t_max = default_t_max(params, T)
        if s > 0:
            t_max = max(t_max, 28.0 / s)  # e^{-s t_max} < 1e-12
    batch = simulate_exits(params, x, T, n_paths, seed, t_max, workers)
    if s == 0 and batch.censored_frac >= ZERO_CENSOR_LIMIT:
        raise CensoringError(f"censored fraction {batch.censored_frac:.2e} >= "
                             f"{ZERO_CENSOR_LIMIT} at t_max={t_max}")
    return mgf_from_batch(batch, s)


def overshoot_moments(batch: ExitBatch) -> tuple[Estimate, Estimate]:
    """Conditional first and second moments of the overshoot given upward exit."""
    g = batch.overshoots()
    return Estimate.from_samples(g), Estimate.from_samples(g * g)


# -- killed process ----------------------------------------------------------

@dataclass(frozen=True)
class KilledBatch:
    """Per path: xi(theta_s), running sup / inf on [0, theta_s], jumps before theta_s."""

    position: np.ndarray
    sup: np.ndarray
    inf: np.ndarray
    jumps: np.ndarray


def _killed_chunk(params: ModelParams, s: float, rng: np.random.Generator, n: int):
    theta = rng.exponential(1.0 / s, n)
    position = np.zeros(n)
    sup = np.zeros(n)
    inf = np.zeros(n)
    jumps = np.zeros(n, dtype=np.int64)
    idx = np.arange(n)
    t = np.zeros(n)
    pos = np.zeros(n)
    while idx.size:
        t = t + rng.exponential(1.0 / params.lam, idx.size)
        alive = t <= theta[idx]
        idx, t, pos = idx[alive], t[alive], pos[alive]
        pos = pos + _draw_jumps(params, rng, idx.size)
        position[idx] = pos
        jumps[idx] += 1
        sup[idx] = np.maximum(sup[idx], pos)
        inf[idx] = np.minimum(inf[idx], pos)
    return position, sup, inf, jumps


def simulate_killed(params: ModelParams, s: float, n_paths: int, seed: int,
                    workers: int = 1) -> KilledBatch:
    """Run each path up to an independent Exp(s) time, ignoring any barrier."""
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    parts = _run_chunks(partial(_killed_chunk, params, s), n_paths, seed, workers)
    return KilledBatch(*(np.concatenate(col) for col in zip(*parts)))


@dataclass(frozen=True)
class KilledObservables:
    non_exit: Estimate
    atom_freq: Estimate
    sup_tail_at: dict[float, Estimate]
    inf_cdf_at: dict[float, Estimate]
    bin_edges: np.ndarray
    bin_mass: list[Estimate]  # P{xi(theta) in bin, tau > theta}, atom excluded


def killed_observables(batch: KilledBatch, x: float, T: float, sup_levels=(), inf_levels=(),
                       bins: int = 20) -> KilledObservables:
    inside = (batch.sup < x) & (batch.inf > x - T)
    atom = batch.jumps == 0
    edges = np.linspace(x - T, x, bins + 1)
    off_atom = inside & ~atom
    which = np.digitize(batch.position, edges) - 1
    masses = [Estimate.from_samples(off_atom & (which == k)) for k in range(bins)]
    return KilledObservables(
        non_exit=Estimate.from_samples(inside),
        atom_freq=Estimate.from_samples(atom),
        sup_tail_at={lv: Estimate.from_samples(batch.sup > lv) for lv in sup_levels},
        inf_cdf_at={lv: Estimate.from_samples(batch.inf < lv) for lv in inf_levels},
        bin_edges=edges,
        bin_mass=masses,
    )


def estimate_killed_observables(params: ModelParams, query: ExitQuery, n_paths: int,
                                seed: int, sup_levels=(), inf_levels=(), bins: int = 20,
                                workers: int = 1) -> KilledObservables:
    """Non-exit, atom, extrema-tail and pre-exit histogram estimates at theta_s."""
    _check_paths(n_paths)
    batch = simulate_killed(params, query.s, n_paths, seed, workers)
    return killed_observables(batch, query.x, query.T, sup_levels, inf_levels, bins)


# -- first passage below a level ---------------------------------------------

def _auxiliary_jumps(params: ModelParams, rng: np.random.Generator, n: int) -> np.ndarray:
    """Downward jumps with law Pi_0 / Pi_0(total): claim law mixed with its equilibrium law."""
    claims = params.claims
    w_eq = params.c * claims.mean  # mass of lam q c F(x) dx relative to lam q dF(x)
    eq = rng.random(n) < w_eq / (1.0 + w_eq)
    out = np.empty(n)
    n_eq = int(eq.sum())
    out[~eq] = claims.sample(rng, n - n_eq)
    if isinstance(claims, ExponentialClaims):
        out[eq] = claims.sample(rng, n_eq)
    else:
        out[eq] = _equilibrium_sample(claims, rng, n_eq)
    return -out


def _equilibrium_sample(claims: GenericClaims, rng: np.random.Generator, n: int) -> np.ndarray:
    # size-biased draw by rejection, times an independent uniform
    top = claims.upper
    out = np.empty(0)
    while out.size < n:
        y = claims.sample(rng, 2 * (n - out.size) + 16)
        out = np.concatenate([out, y[rng.random(y.size) * top < y]])
    return out[:n] * rng.random(n)


def auxiliary_rate(params: ModelParams) -> float:
    """Total mass of Pi_0: lam q (1 + c E[claim])."""
    return params.lam * params.q * (1.0 + params.c * params.claims.mean)


def _passage_chunk(params: ModelParams, level: float, t_max: float, auxiliary: bool,
                   rng: np.random.Generator, n: int):
    tau = np.full(n, np.inf)
    idx = np.arange(n)
    t = np.zeros(n)
    pos = np.zeros(n)
    rate = auxiliary_rate(params) if auxiliary else params.lam
    while idx.size:
        t = t + rng.exponential(1.0 / rate, idx.size)
        alive = t <= t_max
        idx, t, pos = idx[alive], t[alive], pos[alive]
        step = _auxiliary_jumps(params, rng, idx.size) if auxiliary else \
            _draw_jumps(params, rng, idx.size)
        pos = pos + step
        below = pos < level
        tau[idx[below]] = t[below]
        keep = ~below
        idx, t, pos = idx[keep], t[keep], pos[keep]
    return (tau,)


def estimate_mean_passage(params: ModelParams, level: float, n_paths: int, seed: int,
                          t_max: float | None = None, auxiliary: bool = False,
                          workers: int = 1) -> Estimate:
    """Mean first time below ``level`` < 0.

    With ``auxiliary=False`` the process itself (needs m < 0).  With
    ``auxiliary=True`` the decreasing process with jump measure
    Pi_0(dx) = lam q (c F(x) dx + dF(x)) (needs m = 0).
    """
    _check_paths(n_paths)
    if not level < 0:
        raise DomainError(f"level must be negative, got {level}")
    reg = regime(params)
    if auxiliary and reg != "zero":
        raise RegimeError(f"auxiliary process is defined for m = 0, got m={drift(params)!r}")
    if not auxiliary and reg != "negative":
        raise RegimeError(f"passage below a level needs m < 0, got m={drift(params)!r}")
    if t_max is None:
        if auxiliary:
            mean_jump = (params.claims.mean + params.c * params.claims.second_moment / 2) \
                / (1.0 + params.c * params.claims.mean)
            t_max = 50.0 * (1.0 + abs(level) / mean_jump) / auxiliary_rate(params)
        else:
            t_max = 50.0 * (1.0 + abs(level)) / abs(drift(params))
    parts = _run_chunks(partial(_passage_chunk, params, level, t_max, auxiliary),
                        n_paths, seed, workers)
    tau = np.concatenate([p[0] for p in parts])
    censored = float(np.mean(np.isinf(tau)))
    if censored > PASSAGE_CENSOR_LIMIT:
        raise CensoringError(f"{censored:.2e} of paths censored at t_max={t_max}")
    return Estimate.from_samples(tau[np.isfinite(tau)])
