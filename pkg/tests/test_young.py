import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orlicz_hopf.errors import AdmissibilityError, DomainError, InvalidYoungError
from orlicz_hopf.young import (Conjugate, Power, PowerLog, Scaled, SumOfPowers, YoungFunction,
                               check_delta2, check_increment_bounds, check_young_inequality,
                               complementary, estimate_indices, evaluate, fractional_modular,
                               from_config, index_record, luxemburg_norm, modular,
                               sandwich_check, xi_bounds)

FAMILIES = [Power(3), Power(4), SumOfPowers(1, 3, 1, 5), PowerLog(3)]
positive = st.floats(1e-3, 1e3, allow_nan=False)


class Wiggle(YoungFunction):
    """a(t) = t + sin(5t): not monotone, so not a Young function."""

    name = "wiggle"

    def _A(self, t):
        return 0.5 * t ** 2 + (1 - np.cos(5 * t)) / 5

    def _a(self, t):
        return t + np.sin(5 * t)

    def _da(self, t):
        return 1 + 5 * np.cos(5 * t)


def test_eval_examples():
    assert evaluate(Power(4), "a", 2.0) == 32.0
    assert evaluate(Power(3), "A", -2.0) == -8.0
    assert evaluate(SumOfPowers(1, 3, 1, 5), "A", 1.0) == 2.0


def test_eval_rejects_bad_input():
    with pytest.raises(DomainError):
        evaluate(Power(3), "A", math.inf)
    with pytest.raises(DomainError):
        evaluate(Power(3), "a'", 0.0)


@pytest.mark.parametrize("yf", FAMILIES)
def test_A_is_integral_of_a(yf):
    from scipy.integrate import quad
    for t in (0.3, 1.0, 2.5):
        val, _ = quad(lambda x: float(yf.a(x)), 0, t, epsabs=1e-13, epsrel=1e-12)
        assert yf.A(t) == pytest.approx(val, rel=1e-10)


@pytest.mark.parametrize("yf", FAMILIES)
def test_a_prime_matches_difference_quotient(yf):
    t = np.array([0.2, 1.0, 3.0])
    e = 1e-6 * t
    fd = (yf.a(t + e) - yf.a(t - e)) / (2 * e)
    np.testing.assert_allclose(yf.da(t), fd, rtol=1e-7)


def test_power_indices_exact():
    ind = estimate_indices(Power(4), 1e-3, 1e3, 256)
    for v in (ind.p_fn, ind.q_fn):
        assert abs(v - 4) < 1e-10


def test_sum_of_powers_indices_against_dense_oracle():
    t = np.geomspace(1e-4, 1e4, 100_001)
    ratio = (3 * t ** 3 + 5 * t ** 5) / (t ** 3 + t ** 5)
    ind = SumOfPowers(1, 3, 1, 5).indices
    assert ind.p_fn == pytest.approx(ratio.min(), abs=1e-6)
    assert ind.q_fn == pytest.approx(ratio.max(), abs=1e-6)
    assert abs(ind.p_fn - 3) < 1e-6 and abs(ind.q_fn - 5) < 1e-6


def test_power_log_indices_against_dense_oracle():
    t = np.geomspace(1e-4, 1e4, 100_001)
    ratio = 3 + t / ((1 + t) * np.log1p(t))
    ind = PowerLog(3).indices
    assert ind.p_fn >= 3 and ind.q_fn <= 4 + 1e-6
    assert ind.p_fn == pytest.approx(ratio.min(), rel=1e-6)
    assert ind.q_fn == pytest.approx(ratio.max(), rel=1e-6)


def test_index_estimation_is_deterministic_and_validates():
    assert estimate_indices(PowerLog(3)) == estimate_indices(PowerLog(3))
    with pytest.raises(InvalidYoungError):
        estimate_indices(Wiggle())
    with pytest.raises(DomainError):
        estimate_indices(Power(3), 1.0, 0.5)
    with pytest.raises(DomainError):
        estimate_indices(Power(3), 1e-2, 1e2, 8)


def test_admissibility_messages():
    Power(4).indices.check_admissible(0.5)
    with pytest.raises(AdmissibilityError, match=r"p > 1/\(1-s\)"):
        Power(2.5).indices.check_admissible(0.7)
    with pytest.raises(AdmissibilityError, match="p > 2"):
        Power(1.8).indices.check_admissible(0.1)
    with pytest.raises(DomainError, match=r"s must lie in \(0,1\)"):
        Power(4).indices.check_admissible(1.5)


def test_complementary_examples():
    assert complementary(Power(2), 2.0) == pytest.approx(1.0, abs=1e-10)
    assert complementary(PowerLog(3), 0.0) == 0.0
    assert complementary(Power(4), 4.0) == pytest.approx(3.0, abs=1e-9)


def test_complementary_against_grid_maximization():
    t = np.linspace(0, 10, 2_000_001)
    yf = PowerLog(3)
    for s in (0.5, 3.0, 40.0):
        oracle = np.max(s * t - yf.A(t))
        assert complementary(yf, s) == pytest.approx(oracle, rel=1e-7)


def test_young_inequality_examples():
    r = check_young_inequality(Power(2), 2.0, 1.0)
    assert r["lhs"] == 2.0 and r["rhs"] == pytest.approx(2.0) and r["holds"] and r["equality"]
    r = check_young_inequality(Power(3), 0.0, 0.0)
    assert r["lhs"] == 0 and r["holds"]
    r = check_young_inequality(Power(4), 1.0, 2.0)
    assert r["lhs"] == 2.0 and r["holds"]
    assert r["rhs"] == pytest.approx(16 + complementary(Power(4), 1.0))


@settings(max_examples=60, deadline=None)
@given(s=st.floats(0, 1e3), t=st.floats(0, 50))
def test_young_inequality_property(s, t):
    for yf in FAMILIES:
        assert check_young_inequality(yf, s, t)["holds"]


def test_delta2():
    assert check_delta2(Power(3))["C_estimate"] == pytest.approx(8.0, rel=1e-12)
    C = check_delta2(SumOfPowers(1, 3, 1, 5))["C_estimate"]
    assert C <= 32.0
    r = check_delta2(PowerLog(3))
    assert r["holds"] and math.isfinite(r["C_estimate"]) and r["consistent"]
    for yf in FAMILIES:
        assert check_delta2(yf)["holds"] == math.isfinite(yf.indices.q_fn)


def test_sandwich_examples():
    r = sandwich_check(Power(4), np.geomspace(1e-3, 1e3, 50))
    assert r["ok_A"] and r["ok_a"] and r["ok_da"]
    assert abs(r["margin_A"]) < 1e-10
    assert not sandwich_check(SumOfPowers(1, 3, 1, 5), 1.0)["ok_A"]
    assert all(sandwich_check(SumOfPowers(1, 3, 1, 5).normalized(), 1.0)[k]
               for k in ("ok_A", "ok_a", "ok_da"))
    r = sandwich_check(PowerLog(3).normalized(), 0.5)
    assert r["ok_A"] and r["ok_a"] and r["ok_da"]


def test_increment_bound_examples():
    r = check_increment_bounds(Power(3), [(1.0, 2.0)])
    assert r["C_increment"] == pytest.approx(3.0)
    r = check_increment_bounds(Power(3), [(1.5, 1.5)])
    assert r["C_increment"] == math.inf
    r = check_increment_bounds(Power(4), [(1.0, 2.0)])
    assert r["worst_margin_derivative"] == pytest.approx(48 - 28)


def test_modular_examples():
    assert modular(Power(4), np.zeros(10), np.full(10, 0.1)) == 0
    assert modular(Power(4), np.full(10, 2.0), np.full(10, 0.1)) == pytest.approx(16.0)
    x = np.linspace(0, 1, 20)
    assert fractional_modular(Power(4), np.full(20, 3.0), x, np.full(20, 0.05), 0.5) == 0


def test_fractional_modular_against_double_loop():
    rng = np.random.default_rng(1)
    x = np.sort(rng.random(15))
    u = rng.normal(size=15)
    w = rng.random(15)
    yf = Power(3)
    ref = sum(w[i] * w[j] * abs(u[i] - u[j]) ** 3 / abs(x[i] - x[j]) ** (1.5 + 1)
              for i in range(15) for j in range(15) if i != j)
    assert fractional_modular(yf, u, x, w, 0.5) == pytest.approx(ref, rel=1e-12)


def test_luxemburg_examples():
    yf = Power(4)
    w = np.full(10, 0.1)
    lam = luxemburg_norm(yf, lambda l: modular(yf, np.full(10, 2.0) / l, w))
    assert lam == pytest.approx(2.0, rel=1e-9)
    assert luxemburg_norm(yf, lambda l: modular(yf, np.zeros(10) / l, w)) == 0.0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_modular_norm_sandwich(seed):
    rng = np.random.default_rng(seed)
    w = np.full(50, 1 / 50)
    if seed % 2:
        u = np.full(50, rng.uniform(-5, 5))
    else:
        u = np.interp(np.linspace(0, 1, 50), np.linspace(0, 1, 6), rng.normal(0, 3, 6))
    for yf in FAMILIES:
        lam = luxemburg_norm(yf, lambda l: modular(yf, u / l, w))
        phi = modular(yf, u, w)
        lo, hi = xi_bounds(lam, yf.indices.p_fn, yf.indices.q_fn)
        assert lo * (1 - 1e-8) <= phi <= hi * (1 + 1e-8)


def test_scaled_family():
    yf = Power(4)
    t = np.linspace(-3, 3, 13)
    np.testing.assert_array_equal(Scaled(yf, 1.0, 0.5).a(t), yf.a(t))
    R, s = 0.3, 0.5
    np.testing.assert_allclose(Scaled(yf, R, s).a(t), 4 * t ** 3 / R ** (3 * s), rtol=1e-14)
    # t a_R(t) / A_R(t) at t equals the base ratio at t / R^s, so the grids map by R^s
    k = 0.4 ** 0.5
    for base in FAMILIES:
        a = base.indices
        b = estimate_indices(Scaled(base, 0.4, 0.5), 1e-4 * k, 1e4 * k, 512)
        assert a.p_fn == pytest.approx(b.p_fn, rel=1e-9)
        assert a.q_fn == pytest.approx(b.q_fn, rel=1e-9)


def test_scaled_A_is_consistent_with_a():
    from scipy.integrate import quad
    sc = Scaled(PowerLog(3), 0.5, 0.4)
    val, _ = quad(lambda x: float(sc.a(x)), 0, 1.7, epsrel=1e-12)
    assert sc.A(1.7) == pytest.approx(val, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(t=positive)
def test_odd_symmetry_exact(t):
    for yf in FAMILIES:
        assert yf.a(-t) == -yf.a(t)
        assert yf.A(-t) == -yf.A(t)


@settings(max_examples=100, deadline=None)
@given(t1=positive, t2=positive)
def test_convexity(t1, t2):
    for yf in FAMILIES:
        mid = yf.A(0.5 * (t1 + t2))
        avg = 0.5 * (yf.A(t1) + yf.A(t2))
        assert mid <= avg + 1e-12 * max(1.0, abs(avg))


def test_duality_round_trip():
    t = np.linspace(0.1, 10, 60)
    twice = Conjugate(Conjugate(Power(2)))
    np.testing.assert_allclose(twice.A(t), t ** 2, rtol=1e-6)
    np.testing.assert_allclose(Conjugate(Power(2)).A(t), t ** 2 / 4, rtol=1e-9)


def test_config_and_record():
    yf = from_config({"family": "sum_of_powers", "c_p": 1, "p": 3, "c_q": 1, "q": 5,
                      "normalize": True})
    assert yf.A(1.0) == pytest.approx(1.0)
    rec = index_record(Power(4))
    assert set(rec) == {"family", "p_fn", "q_fn", "p_dd", "q_dd", "delta2_C"}
    with pytest.raises(InvalidYoungError):
        from_config({"family": "nope"})
