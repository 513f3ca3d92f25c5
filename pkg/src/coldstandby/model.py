"""System parameters and the absorbing birth-death rate structure.

States are the number of failed elements, ``0 .. n``.  From every state below
``n`` a failure moves the chain up at rate ``lam``; from ``1 .. n-1`` the repair
device moves it down at rate ``mu``.  State ``n`` (all elements failed) is
absorbing and the lifetime is the first hitting time of ``n``.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

import numpy as np

from .errors import (
    ElementCountTooLarge,
    ElementCountTooSmall,
    NegativeMu,
    NonFiniteInput,
    NonPositiveLambda,
    ParameterError,
    ZeroMu,
)

DEFAULT_MAX_N = 64


@dataclass(frozen=True)
class SystemParams:
    """Element count ``n``, failure rate ``lam`` and repair rate ``mu``.

    Build instances through :func:`validate_params`; the constructor itself
    does not check anything.
    """

    n: int
    lam: float
    mu: float


def validate_params(n, lam, mu, *, max_n: int = DEFAULT_MAX_N) -> SystemParams:
    """Check a candidate ``(n, lam, mu)`` triple and return it as SystemParams.

    Nothing is clamped: any violation raises a :class:`ParameterError`
    subclass naming the offending field.
    """
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        if isinstance(n, numbers.Real) and not math.isfinite(n):
            raise NonFiniteInput(f"n must be finite, got {n!r}")
        raise ParameterError(f"n must be an integer, got {n!r}")
    for name, value in (("lambda", lam), ("mu", mu)):
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise ParameterError(f"{name} must be a real number, got {value!r}")
        if not math.isfinite(value):
            raise NonFiniteInput(f"{name} must be finite, got {value!r}")
    n = int(n)
    if n < 2:
        raise ElementCountTooSmall(f"n must be >= 2, got {n}")
    if n > max_n:
        raise ElementCountTooLarge(f"n must be <= {max_n}, got {n}")
    if lam <= 0:
        raise NonPositiveLambda(f"lambda must be > 0, got {lam!r}")
    if mu < 0:
        raise NegativeMu(f"mu must be >= 0, got {mu!r}")
    return SystemParams(n=n, lam=float(lam), mu=float(mu))


@dataclass(frozen=True)
class GeneratorDescription:
    """Tridiagonal rate structure of the chain on states ``0 .. n``."""

    n: int
    lam: float
    mu: float

    def up_rate(self, j: int) -> float:
        if not 0 <= j <= self.n - 1:
            raise IndexError(f"no upward transition from state {j}")
        return self.lam

    def down_rate(self, j: int) -> float:
        if not 1 <= j <= self.n - 1:
            raise IndexError(f"no downward transition from state {j}")
        return self.mu

    def exit_rate(self, j: int) -> float:
        """Total outgoing rate of state ``j`` (zero for the absorbing state)."""
        if j == self.n:
            return 0.0
        return self.lam + (self.mu if j >= 1 else 0.0)

    @property
    def upward_transitions(self) -> list[tuple[int, int, float]]:
        return [(j, j + 1, self.lam) for j in range(self.n)]

    @property
    def downward_transitions(self) -> list[tuple[int, int, float]]:
        if self.mu == 0:
            return []
        return [(j, j - 1, self.mu) for j in range(1, self.n)]

    def matrix(self) -> np.ndarray:
        """Full ``(n+1) x (n+1)`` generator; the last row is identically zero."""
        q = np.zeros((self.n + 1, self.n + 1))
        for i, j, rate in self.upward_transitions + self.downward_transitions:
            q[i, j] = rate
        q[np.diag_indices_from(q)] = -q.sum(axis=1)
        return q

    def transient_block(self) -> np.ndarray:
        """Generator restricted to the transient states ``0 .. n-1``."""
        return self.matrix()[:-1, :-1]


def build_generator(params: SystemParams) -> GeneratorDescription:
    return GeneratorDescription(n=params.n, lam=params.lam, mu=params.mu)


@dataclass(frozen=True)
class EpsilonScale:
    """Small parameter ``epsilon = lam/mu`` and the lifetime scale ``epsilon**(n-1)``."""

    epsilon: float
    exponent: int
    scale: float


def epsilon_scale(params: SystemParams) -> EpsilonScale:
    if params.mu == 0:
        raise ZeroMu("epsilon = lambda/mu needs mu > 0")
    eps = params.lam / params.mu
    return EpsilonScale(epsilon=eps, exponent=params.n - 1, scale=eps ** (params.n - 1))
