import numpy as np
import pytest

from nehari_nodal.nonlinearity import Nonlinearity, validate_hypotheses

FAMILIES = [Nonlinearity(3, 4, 0, 1), Nonlinearity(3, 4, 1, 1), Nonlinearity(2.5, 5, -2, 0.5),
            Nonlinearity(4, 6.5, 3, 2)]


def test_values_pure_power():
    nl = Nonlinearity(3, 4, 0, 1)
    assert nl.f(2.0) == 8.0
    assert nl.F(2.0) == 4.0
    assert nl.f(0.0) == 0.0


def test_p_must_exceed_two():
    with pytest.raises(ValueError):
        Nonlinearity(2.0, 4.0)


@pytest.mark.parametrize("nl", FAMILIES)
def test_derivative_consistency(nl, rng):
    t = rng.uniform(-10, 10, 10_000)
    t = t[np.abs(t) > 1e-3]
    h = 1e-5 * np.maximum(1.0, np.abs(t))
    dF = (nl.F(t + h) - nl.F(t - h)) / (2 * h)
    np.testing.assert_allclose(dF, nl.f(t), rtol=1e-8, atol=1e-8 * np.max(np.abs(nl.f(t))) * 1e-3)
    df = (nl.f(t + h) - nl.f(t - h)) / (2 * h)
    np.testing.assert_allclose(df, nl.fprime(t), rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("nl", FAMILIES)
def test_odd_and_gap(nl, rng):
    t = rng.uniform(-10, 10, 10_000)
    t = t[t != 0]
    np.testing.assert_array_equal(nl.f(-t), -nl.f(t))
    gap = nl.fprime(t) - (nl.p - 1) * nl.f(t) / t
    expected = nl.kappa * (nl.q - nl.p) * np.abs(t) ** (nl.q - 2)
    np.testing.assert_allclose(gap, expected, rtol=1e-9, atol=1e-9 * np.max(np.abs(nl.fprime(t))))
    assert np.all(expected > 0)


def test_mu_nonpositive_identity(rng):
    nl = Nonlinearity(3, 4.5, -1.5, 2)
    t = rng.uniform(-10, 10, 10_000)
    lhs = nl.f(t) * t - nl.q * nl.F(t)
    rhs = nl.mu * (1 - nl.q / nl.p) * np.abs(t) ** nl.p
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * np.max(np.abs(rhs)))
    assert np.all(rhs >= 0)


def test_validate_pure_power():
    rep = validate_hypotheses(Nonlinearity(3, 4, 0, 1), 10.0)
    assert rep.passed and rep.m == 4


def test_validate_mu_too_large():
    rep = validate_hypotheses(Nonlinearity(3, 4, 11.0, 1), 10.0)
    assert not rep.f3
    assert rep.f1 and rep.f4


def test_validate_positive_mu_threshold():
    nl = Nonlinearity(3, 4, 1, 1)
    rep = validate_hypotheses(nl, 1e6)
    assert rep.m == 3.5
    assert rep.T == pytest.approx(4 / 3, rel=1e-14)
    # dense sampling of the superlinearity inequality on [T, 10T]
    t = np.linspace(rep.T, 10 * rep.T, 200_001)
    assert np.all(nl.f(t) * t - rep.m * nl.F(t) >= -1e-12)
    assert rep.f2 and rep.passed


def test_validate_f4_failure():
    rep = validate_hypotheses(Nonlinearity(3, 2.5, 0, 1), 10.0)
    assert not rep.f4 and not rep.f1 and not rep.passed


def test_critical_exponent_in_2d_is_infinite_for_p_above_2():
    rep = validate_hypotheses(Nonlinearity(2.5, 40, 0, 1), 10.0, dim=2)
    assert rep.p_star == np.inf and rep.f1


def test_negative_mu_threshold_makes_F_positive():
    nl = Nonlinearity(3, 4, -2, 1)
    assert nl.F(nl.T) > 0
    assert validate_hypotheses(nl, 10.0).f2
