"""Laplace transforms of the state probabilities.

``phi_j(s) = int_0^inf exp(-s t) P_j(t) dt`` solves the boundary-value system

    (lam + s) phi_0 - mu phi_1                     = 1
    -lam phi_{j-1} + (lam + mu + s) phi_j - mu phi_{j+1} = 0,   0 < j < n-1
    -lam phi_{n-2} + (lam + mu + s) phi_{n-1}       = 0

and the lifetime transform is ``E exp(-s tau) = lam * phi_{n-1}(s)``.

Two evaluation paths are provided.  :func:`phi_tridiagonal` eliminates the
system directly and is the one everything else uses.  :func:`phi_closed_form`
goes through the characteristic roots ``q1 >= q2`` of
``mu q**2 - (lam + mu + s) q + lam = 0`` and the coefficients ``A, B`` of the
general term ``phi_j = A q1**j + B q2**j``; it serves as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DegenerateRoots,
    ElementCountTooLargeForClosedForm,
    NegativeS,
    NonFiniteInput,
    ZeroMu,
)
from .model import SystemParams

CLOSED_FORM_MAX_N = 20
DEGENERACY_RATIO = 1e-12


@dataclass(frozen=True)
class CharRoots:
    s: float
    q1: float
    q2: float
    discriminant: float


@dataclass(frozen=True)
class LaplaceEvaluation:
    s: float
    phi: np.ndarray
    roots: Optional[CharRoots] = None
    coeff_a: Optional[float] = None
    coeff_b: Optional[float] = None


def _check_s(s) -> float:
    s = float(s)
    if not math.isfinite(s):
        raise NonFiniteInput(f"s must be finite, got {s!r}")
    if s < 0:
        raise NegativeS(f"s must be >= 0, got {s!r}")
    return s


def _need_mu(mu: float) -> None:
    if mu == 0:
        raise ZeroMu("the transform relations divide by mu; mu must be > 0")


def discriminant(lam: float, mu: float, s: float) -> float:
    """``(lam + mu + s)**2 - 4 lam mu``, expanded so that no terms cancel."""
    return (lam - mu) ** 2 + s * (s + 2.0 * (lam + mu))


def char_roots(params: SystemParams, s: float) -> CharRoots:
    """Roots of the characteristic polynomial of the interior recurrence.

    The larger root uses the ``+`` branch of the quadratic formula; the smaller
    one is recovered from ``q1 * q2 = lam/mu`` to avoid cancellation.
    """
    _need_mu(params.mu)
    s = _check_s(s)
    lam, mu = params.lam, params.mu
    disc = discriminant(lam, mu, s)
    q1 = (lam + mu + s + math.sqrt(disc)) / (2.0 * mu)
    q2 = (lam / mu) / q1
    return CharRoots(s=s, q1=q1, q2=q2, discriminant=disc)


def _solve_system(n: int, lam: float, mu: float, s: float) -> np.ndarray:
    # Eliminating states from 0 upwards keeps every pivot a sum of positive
    # rates: pivot_j = lam + kill_j with kill_0 = s and
    # kill_j = s + mu * kill_{j-1} / pivot_{j-1}.  At s = 0 all pivots equal
    # lam exactly, so lam * phi_{n-1}(0) = 1 holds to the last bit.
    kill = s
    pivots = np.empty(n)
    for j in range(n):
        if j:
            kill = s + mu * kill / pivots[j - 1]
        pivots[j] = lam + kill
    w = np.empty(n)
    w[0] = 1.0 / pivots[0]
    for j in range(1, n):
        w[j] = lam * w[j - 1] / pivots[j]
    phi = np.empty(n)
    phi[-1] = w[-1]
    for j in range(n - 2, -1, -1):
        phi[j] = w[j] + mu * phi[j + 1] / pivots[j]
    return phi


def phi_tridiagonal(params: SystemParams, s: float) -> LaplaceEvaluation:
    """All ``phi_j(s)`` by direct elimination of the tridiagonal system."""
    _need_mu(params.mu)
    s = _check_s(s)
    phi = _solve_system(params.n, params.lam, params.mu, s)
    phi.flags.writeable = False
    return LaplaceEvaluation(s=s, phi=phi)


def phi_closed_form(params: SystemParams, s: float) -> LaplaceEvaluation:
    """All ``phi_j(s)`` from the roots and the coefficients ``A(s)``, ``B(s)``.

    ``A`` and ``B`` are evaluated as the explicit quotients obtained from the two
    boundary relations, with the shared denominator

        q2**(n-2) (lam - q2 c)(mu q1 - (lam+s)) + q1**(n-2) (mu q2 - (lam+s))(q1 c - lam)

    where ``c = lam + mu + s``.

    Raises
    ------
    DegenerateRoots
        If the discriminant is below ``1e-12 * c**2`` (repeated root); fall back
        to :func:`phi_tridiagonal`.
    ElementCountTooLargeForClosedForm
        If ``n > 20``; ``q1**(n-2)`` ruins the conditioning beyond that.
    """
    _need_mu(params.mu)
    s = _check_s(s)
    n, lam, mu = params.n, params.lam, params.mu
    if n > CLOSED_FORM_MAX_N:
        raise ElementCountTooLargeForClosedForm(
            f"closed form is limited to n <= {CLOSED_FORM_MAX_N}, got n={n}"
        )
    c = lam + mu + s
    roots = char_roots(params, s)
    if roots.discriminant < DEGENERACY_RATIO * c * c:
        raise DegenerateRoots(
            f"repeated characteristic root (discriminant {roots.discriminant:.3e}); "
            "use the tridiagonal path"
        )
    q1, q2 = roots.q1, roots.q2
    q1p, q2p = q1 ** (n - 2), q2 ** (n - 2)
    denom = q2p * (lam - q2 * c) * (mu * q1 - (lam + s)) + q1p * (mu * q2 - (lam + s)) * (q1 * c - lam)
    a = q2p * (q2 * c - lam) / denom
    b = q1p * (lam - q1 * c) / denom
    j = np.arange(n)
    phi = a * q1**j + b * q2**j
    phi.flags.writeable = False
    return LaplaceEvaluation(s=s, phi=phi, roots=roots, coeff_a=float(a), coeff_b=float(b))


def lst_tau(params: SystemParams, s: float) -> float:
    """Laplace-Stieltjes transform of the lifetime, ``E exp(-s tau)``."""
    return params.lam * float(phi_tridiagonal(params, s).phi[-1])


def mean_from_transform(params: SystemParams, h: Optional[float] = None) -> float:
    """``E tau`` as ``-d/ds E exp(-s tau)`` at 0 by a central difference.

    The backward point ``s = -h`` lies outside the public domain but the
    transform is finite there as long as ``h`` is below the slowest decay
    rate of the survival function, roughly ``1 / E tau``; the caller is
    responsible for that.  Default step is ``1e-5 / lam``.
    """
    _need_mu(params.mu)
    if h is None:
        h = 1e-5 / params.lam
    n, lam, mu = params.n, params.lam, params.mu
    plus = lam * _solve_system(n, lam, mu, h)[-1]
    minus = lam * _solve_system(n, lam, mu, -h)[-1]
    return (minus - plus) / (2.0 * h)


def phi_special_n2(lam: float, mu: float, s: float) -> float:
    """``phi_1(s) = lam / (s**2 + s(2 lam + mu) + lam**2)`` for two elements."""
    _need_mu(mu)
    s = _check_s(s)
    return lam / (s * s + s * (2.0 * lam + mu) + lam * lam)


def phi_special_n3(lam: float, mu: float, s: float) -> float:
    """``phi_2(s) = lam**2 / ((s+lam)**3 + 2 mu s**2 + 2 mu lam s + mu**2 s)`` for three elements."""
    _need_mu(mu)
    s = _check_s(s)
    return lam * lam / ((s + lam) ** 3 + 2.0 * mu * s * s + 2.0 * mu * lam * s + mu * mu * s)
