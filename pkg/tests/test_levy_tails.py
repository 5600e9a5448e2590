"""Unit tests for the Lévy tail bijections and their numerical inverses."""

import math

import mpmath as mp
import numpy as np
import pytest
import scipy.optimize

from nbpriors import (
    DomainError,
    LevyTail,
    NumericError,
    log_tail_inverse,
    log_tail_value,
    tail_inverse,
    tail_support_bound,
    tail_value,
)


def rel_err(got, expected):
    return abs(got - expected) / abs(expected)


ALL_TAILS = [
    LevyTail.stable(0.3),
    LevyTail.stable(0.5),
    LevyTail.stable(0.9),
    LevyTail.gamma(3.0),
    LevyTail.generalized_gamma(0.1),
    LevyTail.generalized_gamma(0.5),
    LevyTail.generalized_gamma(0.9),
]


class TestConstruction:
    def test_bad_kind(self):
        with pytest.raises(DomainError):
            LevyTail(kind="cauchy", alpha=0.5)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, None])
    def test_bad_alpha(self, alpha):
        with pytest.raises(DomainError):
            LevyTail(kind="stable", alpha=alpha)

    def test_bad_theta(self):
        with pytest.raises(DomainError):
            LevyTail(kind="gamma", theta=0.0)
        with pytest.raises(DomainError):
            LevyTail(kind="gamma", theta=None)

    def test_cross_parameter_rejected(self):
        with pytest.raises(DomainError):
            LevyTail(kind="stable", alpha=0.5, theta=1.0)
        with pytest.raises(DomainError):
            LevyTail(kind="gamma", theta=1.0, alpha=0.5)


class TestValues:
    def test_stable_closed_form(self):
        assert tail_value(LevyTail.stable(0.5), 4.0) == pytest.approx(0.5, rel=1e-14)

    def test_gamma_value(self):
        # 3 * E1(1), frozen from the quadrature oracle
        assert rel_err(tail_value(LevyTail.gamma(3.0), 1.0), 0.65815180318656082) < 1e-12

    def test_generalized_gamma_value(self):
        # (0.5/sqrt(pi)) * Gamma(-0.5, 1): recurrence plus quadrature oracle
        assert rel_err(tail_value(LevyTail.generalized_gamma(0.5), 1.0), 0.050254541660012221) < 1e-11

    def test_domain(self):
        for tail in ALL_TAILS:
            with pytest.raises(DomainError):
                tail_value(tail, 0.0)
            with pytest.raises(DomainError):
                tail_inverse(tail, -1.0)

    @pytest.mark.parametrize("tail", ALL_TAILS, ids=lambda t: f"{t.kind}-{t.alpha or t.theta}")
    def test_strictly_decreasing(self, tail):
        grid = np.geomspace(1e-5, 30.0, 50)
        vals = np.exp(log_tail_value(tail, grid))
        assert np.all(np.diff(vals) < 0)


class TestInversion:
    def test_stable_closed_form(self):
        assert tail_inverse(LevyTail.stable(0.5), 4.0) == pytest.approx(0.0625, rel=1e-14)

    def test_gamma_known_point(self):
        theta = 1.0
        y = tail_value(LevyTail.gamma(theta), 1.0)  # E1(1)
        assert tail_inverse(LevyTail.gamma(theta), y) == pytest.approx(1.0, rel=1e-11)

    def test_generalized_gamma_known_point(self):
        assert tail_inverse(LevyTail.generalized_gamma(0.5), 0.050254541660012221) == pytest.approx(
            1.0, rel=1e-9
        )

    @pytest.mark.parametrize("tail", ALL_TAILS, ids=lambda t: f"{t.kind}-{t.alpha or t.theta}")
    def test_roundtrip_log_grid(self, tail):
        ys = np.geomspace(1e-6, 1e3, 41)
        xs = np.exp(log_tail_inverse(tail, ys))
        back = np.exp(log_tail_value(tail, xs))
        assert np.max(np.abs(back - ys) / ys) <= 1e-9

    @pytest.mark.parametrize("tail", ALL_TAILS, ids=lambda t: f"{t.kind}-{t.alpha or t.theta}")
    def test_inverse_strictly_decreasing(self, tail):
        ys = np.geomspace(1e-5, 1e2, 40)
        ts = log_tail_inverse(tail, ys)
        assert np.all(np.diff(ts) < 0)

    def test_stable_numeric_cross_check(self):
        # closed form against an independent bracketed root-finder
        tail = LevyTail.stable(0.5)
        for y in (0.2, 1.0, 5.0, 40.0):
            numeric = scipy.optimize.brentq(
                lambda x: tail_value(tail, x) - y, 1e-12, 1e8, xtol=1e-300, rtol=1e-15
            )
            assert rel_err(tail_inverse(tail, y), numeric) < 1e-10

    def test_deep_gamma_inverse_stays_log_accurate(self):
        # the linear inverse underflows here; the log inverse must not
        tail = LevyTail.gamma(3.0)
        t = log_tail_inverse(tail, np.array([3000.0]))[0]
        assert t < math.log(1e-300)
        with pytest.raises(NumericError):
            tail_inverse(tail, 3000.0)
        with mp.workdps(40):
            back = 3.0 * mp.e1(mp.e ** mp.mpf(float(t)))
        assert abs(float(back) - 3000.0) / 3000.0 < 1e-11


class TestSupportBound:
    def test_stable(self):
        assert tail_support_bound(LevyTail.stable(0.5)) == pytest.approx(1.0, rel=1e-14)

    def test_gamma(self):
        # root of 3 E1(x) = 1, frozen from the root-finding oracle
        assert tail_support_bound(LevyTail.gamma(3.0)) == pytest.approx(0.76127267343337411, rel=1e-10)

    def test_generalized_gamma_roundtrip(self):
        tail = LevyTail.generalized_gamma(0.9)
        bound = tail_support_bound(tail)
        assert tail_value(tail, bound) == pytest.approx(1.0, rel=1e-10)


class TestSerialization:
    @pytest.mark.parametrize("tail", ALL_TAILS, ids=lambda t: f"{t.kind}-{t.alpha or t.theta}")
    def test_json_roundtrip(self, tail):
        assert LevyTail.from_json(tail.to_json()) == tail

    def test_dict_shape(self):
        assert LevyTail.gamma(3.0).to_dict() == {"kind": "gamma", "theta": 3.0}
        assert LevyTail.stable(0.5).to_dict() == {"kind": "stable", "alpha": 0.5}

    def test_from_dict_rejects_unknown_fields(self):
        with pytest.raises(DomainError):
            LevyTail.from_dict({"kind": "stable", "alpha": 0.5, "beta": 1})
        with pytest.raises(DomainError):
            LevyTail.from_dict({"alpha": 0.5})
