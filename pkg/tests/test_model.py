import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coldstandby.errors import (
    ElementCountTooLarge,
    ElementCountTooSmall,
    NegativeMu,
    NonFiniteInput,
    NonPositiveLambda,
    ParameterError,
    ZeroMu,
)
from coldstandby.model import SystemParams, build_generator, epsilon_scale, validate_params

rates = st.floats(min_value=1e-3, max_value=1e3)
counts = st.integers(min_value=2, max_value=64)


def test_valid_triple():
    assert validate_params(2, 1.0, 10.0) == SystemParams(2, 1.0, 10.0)


@pytest.mark.parametrize(
    "raw, error",
    [
        ((1, 1.0, 1.0), ElementCountTooSmall),
        ((3, 0.0, 1.0), NonPositiveLambda),
        ((3, -1.0, 1.0), NonPositiveLambda),
        ((3, 1.0, -0.5), NegativeMu),
        ((3, math.inf, 1.0), NonFiniteInput),
        ((3, 1.0, math.nan), NonFiniteInput),
        ((math.inf, 1.0, 1.0), NonFiniteInput),
        ((65, 1.0, 1.0), ElementCountTooLarge),
        ((2.5, 1.0, 1.0), ParameterError),
        ((True, 1.0, 1.0), ParameterError),
        ((3, "1", 1.0), ParameterError),
    ],
)
def test_invalid_triples(raw, error):
    with pytest.raises(error):
        validate_params(*raw)


def test_cap_is_configurable():
    assert validate_params(100, 1.0, 1.0, max_n=128).n == 100


def test_mu_zero_is_accepted():
    assert validate_params(3, 2.0, 0.0).mu == 0.0


def test_generator_two_elements():
    gen = build_generator(validate_params(2, 1.0, 10.0))
    q = gen.matrix()
    expected = np.array([[-1.0, 1.0, 0.0], [10.0, -11.0, 1.0], [0.0, 0.0, 0.0]])
    np.testing.assert_array_equal(q, expected)


def test_generator_without_repair():
    gen = build_generator(validate_params(3, 2.0, 0.0))
    assert gen.upward_transitions == [(0, 1, 2.0), (1, 2, 2.0), (2, 3, 2.0)]
    assert gen.downward_transitions == []
    assert np.all(np.diag(gen.matrix(), -1) == 0)


def test_rates_outside_range():
    gen = build_generator(validate_params(3, 1.0, 2.0))
    with pytest.raises(IndexError):
        gen.up_rate(3)
    with pytest.raises(IndexError):
        gen.down_rate(0)
    assert gen.exit_rate(0) == 1.0 and gen.exit_rate(1) == 3.0 and gen.exit_rate(3) == 0.0


@given(counts, rates, st.one_of(st.just(0.0), rates))
def test_generator_structure(n, lam, mu):
    gen = build_generator(validate_params(n, lam, mu))
    q = gen.matrix()
    np.testing.assert_allclose(q[:-1].sum(axis=1), 0.0, atol=1e-12 * (lam + mu))
    assert np.all(q[-1] == 0)
    off = q - np.diag(np.diag(q))
    assert np.all(off >= 0)
    assert len(gen.upward_transitions) == n
    assert len(gen.downward_transitions) == (n - 1 if mu > 0 else 0)


@pytest.mark.parametrize(
    "n, lam, mu, eps, scale",
    [(2, 1.0, 10.0, 0.1, 0.1), (3, 1.0, 10.0, 0.1, 0.01), (4, 2.0, 8.0, 0.25, 0.015625)],
)
def test_epsilon_scale(n, lam, mu, eps, scale):
    es = epsilon_scale(validate_params(n, lam, mu))
    assert es.epsilon == pytest.approx(eps, rel=1e-15)
    assert es.scale == pytest.approx(scale, rel=1e-14)
    assert es.exponent == n - 1


def test_epsilon_needs_repair():
    with pytest.raises(ZeroMu):
        epsilon_scale(validate_params(3, 1.0, 0.0))


@given(st.integers(min_value=2, max_value=20), rates, rates)
def test_scale_times_mu_power(n, lam, mu):
    es = epsilon_scale(validate_params(n, lam, mu))
    assert es.scale * mu ** (n - 1) == pytest.approx(lam ** (n - 1), rel=1e-12)
