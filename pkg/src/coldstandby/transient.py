"""Transient state probabilities, lifetime distribution and mean lifetime.

The state probabilities ``P_j(t) = P(q(t) = j, tau > t)`` are computed by
uniformization.  With ``Lam = lam + mu`` the uniformized kernel
``K = I + Q/Lam`` is stochastic and

    exp(Q dt) = sum_k  Poisson(k; Lam*dt) * K**k,

a sum of nonnegative terms whose truncated tail is bounded by the Poisson tail
mass.  The horizons that matter for fast repair are long (the mean lifetime
grows like ``mu**(n-2)``), so ``Lam*dt`` can reach 1e10.  Instead of summing
that many terms, the step matrix is built for ``dt / 2**m`` with
``Lam*dt / 2**m <= 1`` and squared ``m`` times.  Every squaring renormalizes
the rows to sum to one, which removes the drift of total probability that
would otherwise grow like ``2**m`` times the unit roundoff.  The absorbed mass
is carried as its own column, so conservation is checked, not imposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import (
    ConsistencyError,
    GridEmpty,
    ParameterError,
    ResolutionTooSmall,
    TimeNotOnGrid,
    ToleranceOutOfRange,
)
from .model import SystemParams, build_generator

DEFAULT_TOL = 1e-12
CLAMP_SLACK = 1e-12
CONSERVATION_TOL = 1e-10
SURVIVAL_THRESHOLD = 1e-6


@dataclass(frozen=True)
class TimeGrid:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 1 or pts.size == 0:
            raise GridEmpty("time grid must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("time grid points must be finite")
        if pts[0] < 0:
            raise ParameterError("time grid must start at t >= 0")
        if np.any(np.diff(pts) <= 0):
            raise ParameterError("time grid must be strictly increasing")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class TransientSolution:
    """``probs[k, j]`` is ``P_j`` at ``grid.points[k]``; ``absorbed`` is the CDF."""

    params: SystemParams
    grid: TimeGrid
    probs: np.ndarray
    absorbed: np.ndarray
    density: np.ndarray

    @property
    def survival(self) -> np.ndarray:
        return self.probs.sum(axis=1)


def _step_kernel(unif: np.ndarray, rate: float, dt: float, tol: float) -> np.ndarray:
    """``exp(Q dt)`` as a stochastic matrix, truncation error at most ``tol``."""
    x = rate * dt
    squarings = max(0, math.ceil(math.log2(x))) if x > 1.0 else 0
    h = x / 2.0**squarings
    # a truncation defect d in the base kernel grows to at most 2**m * d
    base_tol = tol / 2.0**squarings
    weight = math.exp(-h)
    term = np.eye(unif.shape[0]) * weight
    kernel = term.copy()
    k = 0
    while True:
        k += 1
        weight *= h / k
        term = (term @ unif) * (h / k)
        kernel += term
        # Poisson tail beyond k is at most weight * r / (1 - r')
        r = h / (k + 1)
        if weight * r / (1.0 - h / (k + 2)) < base_tol or weight == 0.0:
            break
    for _ in range(squarings):
        kernel = kernel @ kernel
        kernel /= kernel.sum(axis=1, keepdims=True)
    return kernel


def _uniformized(params: SystemParams) -> tuple[np.ndarray, float]:
    q = build_generator(params).matrix()
    rate = params.lam + params.mu
    return np.eye(q.shape[0]) + q / rate, rate


def _propagate(params: SystemParams, points: np.ndarray, tol: float) -> np.ndarray:
    """Distribution over states ``0..n`` at each time point, starting in state 0."""
    unif, rate = _uniformized(params)
    steps = np.diff(points, prepend=0.0)
    nonzero = int(np.count_nonzero(steps))
    step_tol = tol / max(nonzero, 1)
    cache: dict[float, np.ndarray] = {}
    out = np.empty((points.size, params.n + 1))
    v = np.zeros(params.n + 1)
    v[0] = 1.0
    for k, dt in enumerate(steps):
        if dt > 0.0:
            kernel = cache.get(dt)
            if kernel is None:
                kernel = cache[dt] = _step_kernel(unif, rate, float(dt), step_tol)
            v = v @ kernel
        out[k] = v
    return out


def _check_and_clamp(values: np.ndarray, what: str) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if lo < -CLAMP_SLACK or hi > 1.0 + CLAMP_SLACK:
        raise ConsistencyError(f"{what} left [0, 1] beyond round-off: range [{lo!r}, {hi!r}]")
    return np.clip(values, 0.0, 1.0)


def solve_transient(params: SystemParams, grid: TimeGrid, tol: float = DEFAULT_TOL) -> TransientSolution:
    """Solve the Kolmogorov system on ``grid`` with ``P_0(0) = 1``.

    Parameters
    ----------
    params : SystemParams
        Validated parameters; ``mu == 0`` is allowed.
    grid : TimeGrid
        Evaluation times.
    tol : float
        Bound on the total Poisson truncation error, in (0, 1e-6].

    Returns
    -------
    TransientSolution
        State probabilities, lifetime CDF and density ``lam * P_{n-1}(t)``.
    """
    if not isinstance(grid, TimeGrid):
        grid = TimeGrid(grid)
    if not (0.0 < tol <= 1e-6):
        raise ToleranceOutOfRange(f"tol must lie in (0, 1e-6], got {tol!r}")
    dist = _propagate(params, grid.points, tol)
    total = dist.sum(axis=1)
    worst = float(np.max(np.abs(total - 1.0)))
    if worst > CONSERVATION_TOL:
        raise ConsistencyError(f"probability conservation violated by {worst:.3e}")
    probs = _check_and_clamp(dist[:, :-1], "state probabilities")
    absorbed = _check_and_clamp(dist[:, -1], "lifetime CDF")
    probs.flags.writeable = False
    absorbed.flags.writeable = False
    density = params.lam * probs[:, -1]
    density.flags.writeable = False
    return TransientSolution(params=params, grid=grid, probs=probs, absorbed=absorbed, density=density)


def lifetime_cdf(solution: TransientSolution, t: float) -> float:
    """``P(tau <= t)`` at a grid time ``t``.

    Returns the absorbed-mass column, which equals ``1 - sum_j P_j(t)`` to
    within the conservation tolerance and is monotone by construction.
    """
    pts = solution.grid.points
    idx = int(np.searchsorted(pts, t))
    if idx >= pts.size or pts[idx] != t:
        raise TimeNotOnGrid(f"t={t!r} is not a grid point")
    return float(solution.absorbed[idx])


def survival_at(params: SystemParams, t: float, tol: float = DEFAULT_TOL) -> float:
    """``P(tau > t)`` from a single-point solve."""
    dist = _propagate(params, np.array([float(t)]), tol)
    return float(dist[0, :-1].sum())


def mean_lifetime(params: SystemParams) -> float:
    """Expected lifetime ``E tau`` from the first-passage equations.

    The equations ``lam*(m_0 - m_1) = 1`` and
    ``mu*(m_j - m_{j-1}) + lam*(m_j - m_{j+1}) = 1`` (with ``m_n = 0``) are
    eliminated from the top in terms of the level-crossing times
    ``d_j = m_j - m_{j+1}``: ``d_0 = 1/lam``, ``d_j = (1 + mu*d_{j-1})/lam``.
    Every step adds positive terms, so the result keeps full relative accuracy
    even when ``mu >> lam``.
    """
    d = 1.0 / params.lam
    total = d
    for _ in range(1, params.n):
        d = (1.0 + params.mu * d) / params.lam
        total += d
    return total


def default_grid(params: SystemParams, resolution: int = 401, tol: float = DEFAULT_TOL) -> TimeGrid:
    """Uniform grid on ``[0, T]`` with ``P(tau > T) < 1e-6``.

    ``T`` starts at the mean lifetime and doubles until the survival
    probability drops below the threshold.
    """
    if resolution < 2:
        raise ResolutionTooSmall(f"resolution must be >= 2, got {resolution}")
    horizon = mean_lifetime(params)
    while survival_at(params, horizon, tol) >= SURVIVAL_THRESHOLD:
        horizon *= 2.0
    return TimeGrid(np.linspace(0.0, horizon, resolution))


def cdf_interpolant(solution: TransientSolution):
    """Cubic Hermite interpolant of the CDF through the grid values.

    Uses the exact density as the derivative data.  Beyond the last grid
    point the CDF is held at its final value.
    """
    pts = solution.grid.points
    if pts[0] != 0.0:
        raise ParameterError("CDF interpolation needs a grid starting at t = 0")
    spline = CubicHermiteSpline(pts, solution.absorbed, solution.density)
    last = float(solution.absorbed[-1])

    def cdf(t):
        t = np.asarray(t, dtype=float)
        out = np.where(t >= pts[-1], last, spline(np.clip(t, pts[0], pts[-1])))
        out = np.where(t < 0.0, 0.0, out)
        return np.clip(out, 0.0, 1.0)

    return cdf
