"""Monte Carlo sampling of the system lifetime.

Two exact samplers share the counter-based streams of :mod:`coldstandby.rng`.

``event``
    Event-by-event simulation.  Every event consumes one Philox block: the
    first uniform gives the holding time ``-log(u)/rate`` and the second
    decides the jump (up iff ``u < lam/(lam+mu)``; unused in state 0).

``visits``
    Samples the number of visits ``V_j`` to each state and then the total
    time spent there as ``Gamma(V_j, rate_j)``.  This is valid because the
    holding times are independent of the jump chain.  The counts are drawn
    from the top down: with ``U_j`` up-exits from state ``j`` (``U_{n-1} = 1``),
    the down-exits are ``D_{j-1} ~ NegBin(U_j, p)`` with ``p = lam/(lam+mu)``,
    ``V_j = U_j + D_{j-1}`` and ``U_{j-1} = D_{j-1} + 1``.  The cost per trial
    is O(n) regardless of how many events the chain would make, which is what
    makes large ``mu/lam`` ratios tractable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .errors import EventBudgetExceeded, InvalidTrials, ParameterError
from .model import SystemParams
from .rng import MASK32, TAG_EVENT, TAG_VISITS, TrialStream, uniform_pair

EVENT_BUDGET = 10**9
METHODS = ("event", "visits")

# numba falls back to another threading layer by itself; the notice is noise
warnings.filterwarnings("ignore", message="The TBB threading layer", category=numba.NumbaWarning)


@dataclass(frozen=True)
class SimulationConfig:
    params: SystemParams
    trials: int
    seed: int
    method: str = "event"

    def __post_init__(self):
        if isinstance(self.trials, bool) or not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise InvalidTrials(f"trials must be a positive integer, got {self.trials!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}, got {self.method!r}")


@dataclass(frozen=True)
class SimulationResult:
    """Lifetime samples ordered by trial index, with summary statistics."""

    samples: np.ndarray
    seed: int
    trials: int
    method: str
    sample_mean: float
    sample_variance: float
    is_sorted: bool = False

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.sample_variance / self.trials)

    def sorted_samples(self) -> np.ndarray:
        return np.sort(self.samples)


def simulate_one(params: SystemParams, stream: TrialStream) -> float:
    """One lifetime by plain event-driven simulation, in pure Python."""
    lam, mu = params.lam, params.mu
    rate = lam + mu
    p_up = lam / rate
    state = 0
    t = 0.0
    events = 0
    while state < params.n:
        if events >= EVENT_BUDGET:
            raise EventBudgetExceeded(f"no absorption after {EVENT_BUDGET} events")
        u_wait, u_jump = stream.next_block()
        events += 1
        if state == 0:
            t += -math.log(u_wait) / lam
            state = 1
        else:
            t += -math.log(u_wait) / rate
            state += 1 if u_jump < p_up else -1
    return t


@numba.njit(cache=True, parallel=True)
def _event_kernel(n, lam, mu, seed, trials, budget):
    k0 = np.uint64(seed) & np.uint64(MASK32)
    k1 = np.uint64(seed) >> np.uint64(32)
    tag = np.uint64(TAG_EVENT)
    rate = lam + mu
    p_up = lam / rate
    out = np.empty(trials)
    status = np.zeros(trials, dtype=np.int8)
    for i in numba.prange(trials):
        t_lo = np.uint64(i) & np.uint64(MASK32)
        t_hi = np.uint64(i) >> np.uint64(32)
        state = 0
        t = 0.0
        events = 0
        while state < n:
            if events >= budget:
                status[i] = 1
                break
            u_wait, u_jump = uniform_pair(events, t_lo, t_hi, tag, k0, k1)
            events += 1
            if state == 0:
                t += -math.log(u_wait) / lam
                state = 1
            else:
                t += -math.log(u_wait) / rate
                if u_jump < p_up:
                    state += 1
                else:
                    state -= 1
        out[i] = t
    return out, status


# --- variates for the visits sampler ----------------------------------------
# ``st`` holds (next block index, has buffered uniform); ``buf`` the buffer.


@numba.njit(cache=True, inline="always")
def _next_uniform(st, buf, t_lo, t_hi, tag, k0, k1):
    if st[1] == 1:
        st[1] = 0
        return buf[0]
    a, b = uniform_pair(st[0], t_lo, t_hi, tag, k0, k1)
    st[0] += 1
    st[1] = 1
    buf[0] = b
    return a


@numba.njit(cache=True)
def _std_normal(st, buf, t_lo, t_hi, tag, k0, k1):
    u1 = _next_uniform(st, buf, t_lo, t_hi, tag, k0, k1)
    u2 = _next_uniform(st, buf, t_lo, t_hi, tag, k0, k1)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@numba.njit(cache=True)
def _std_gamma(shape, st, buf, t_lo, t_hi, tag, k0, k1):
    # Marsaglia & Tsang (2000); shape >= 1 here since visit counts are >= 1
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = _std_normal(st, buf, t_lo, t_hi, tag, k0, k1)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = _next_uniform(st, buf, t_lo, t_hi, tag, k0, k1)
        if u < 1.0 - 0.0331 * x * x * x * x:
            return d * v
        if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return d * v


@numba.njit(cache=True)
def _poisson(mean, st, buf, t_lo, t_hi, tag, k0, k1):
    if mean <= 0.0:
        return 0.0
    if mean < 10.0:
        limit = math.exp(-mean)
        k = 0.0
        prod = _next_uniform(st, buf, t_lo, t_hi, tag, k0, k1)
        while prod > limit:
            k += 1.0
            prod *= _next_uniform(st, buf, t_lo, t_hi, tag, k0, k1)
        return k
    # PTRS, Hormann (1993)
    slam = math.sqrt(mean)
    loglam = math.log(mean)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = _next_uniform(st, buf, t_lo, t_hi, tag, k0, k1) - 0.5
        v = _next_uniform(st, buf, t_lo, t_hi, tag, k0, k1)
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mean + 0.43)
        if us >= 0.07 and v <= vr:
            return k
        if k < 0.0 or (us < 0.013 and v > us):
            continue
        if math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b) <= -mean + k * loglam - math.lgamma(k + 1.0):
            return k


@numba.njit(cache=True)
def _negative_binomial(successes, p, st, buf, t_lo, t_hi, tag, k0, k1):
    """Failures before the ``successes``-th success, via the gamma-Poisson mixture."""
    if p >= 1.0:
        return 0.0
    g = _std_gamma(successes, st, buf, t_lo, t_hi, tag, k0, k1) * (1.0 - p) / p
    return _poisson(g, st, buf, t_lo, t_hi, tag, k0, k1)


@numba.njit(cache=True, parallel=True)
def _visits_kernel(n, lam, mu, seed, trials):
    k0 = np.uint64(seed) & np.uint64(MASK32)
    k1 = np.uint64(seed) >> np.uint64(32)
    tag = np.uint64(TAG_VISITS)
    rate = lam + mu
    p_up = lam / rate
    out = np.empty(trials)
    for i in numba.prange(trials):
        t_lo = np.uint64(i) & np.uint64(MASK32)
        t_hi = np.uint64(i) >> np.uint64(32)
        st = np.zeros(2, dtype=np.int64)
        buf = np.zeros(1)
        ups = 1.0
        t = 0.0
        for _ in range(n - 1):
            downs = _negative_binomial(ups, p_up, st, buf, t_lo, t_hi, tag, k0, k1)
            t += _std_gamma(ups + downs, st, buf, t_lo, t_hi, tag, k0, k1) / rate
            ups = downs + 1.0
        t += _std_gamma(ups, st, buf, t_lo, t_hi, tag, k0, k1) / lam
        out[i] = t
    return out


@numba.njit(cache=True)
def _variate_batch(kind, a, b, seed, count):
    # test hook: one variate per substream; kind 0 gamma(a), 1 poisson(a), 2 negbin(a, b)
    k0 = np.uint64(seed) & np.uint64(MASK32)
    k1 = np.uint64(seed) >> np.uint64(32)
    tag = np.uint64(TAG_VISITS)
    out = np.empty(count)
    for i in range(count):
        st = np.zeros(2, dtype=np.int64)
        buf = np.zeros(1)
        t_lo = np.uint64(i) & np.uint64(MASK32)
        t_hi = np.uint64(i) >> np.uint64(32)
        if kind == 0:
            out[i] = _std_gamma(a, st, buf, t_lo, t_hi, tag, k0, k1)
        elif kind == 1:
            out[i] = _poisson(a, st, buf, t_lo, t_hi, tag, k0, k1)
        else:
            out[i] = _negative_binomial(a, b, st, buf, t_lo, t_hi, tag, k0, k1)
    return out


def run_trials(config: SimulationConfig, threads: Optional[int] = None) -> SimulationResult:
    """Run ``config.trials`` independent lifetimes.

    Trial ``i`` draws only from substream ``(config.seed, i)``, so the output
    is bitwise identical for every ``threads`` setting.
    """
    p = config.params
    previous = numba.get_num_threads()
    if threads is not None:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    try:
        if config.method == "event":
            samples, status = _event_kernel(p.n, p.lam, p.mu, np.uint64(config.seed), config.trials, EVENT_BUDGET)
            if status.any():
                bad = int(np.flatnonzero(status)[0])
                raise EventBudgetExceeded(f"trial {bad}: no absorption after {EVENT_BUDGET} events")
        else:
            samples = _visits_kernel(p.n, p.lam, p.mu, np.uint64(config.seed), config.trials)
    finally:
        numba.set_num_threads(previous)
    samples.flags.writeable = False
    mean = math.fsum(samples) / samples.size
    var = math.fsum((samples - mean) ** 2) / (samples.size - 1) if samples.size > 1 else 0.0
    return SimulationResult(
        samples=samples,
        seed=int(config.seed),
        trials=int(config.trials),
        method=config.method,
        sample_mean=mean,
        sample_variance=var,
    )


def empirical_cdf(result: SimulationResult, t):
    """Fraction of samples ``<= t`` (right-continuous)."""
    ordered = result.sorted_samples()
    counts = np.searchsorted(ordered, t, side="right")
    out = counts / ordered.size
    return float(out) if np.ndim(out) == 0 else out
