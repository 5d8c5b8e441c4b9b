import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orlicz_hopf import hopf
from orlicz_hopf.errors import DomainError
from orlicz_hopf.fields import Ball, Field, Grid, distance_function
from orlicz_hopf.solver import solve_torsion
from orlicz_hopf.young import Power

P4 = Power(4)
UNIT1 = Ball((0.0,), 1.0)
UNIT2 = Ball((0.0, 0.0), 1.0)
D1 = distance_function(UNIT1)
D2 = distance_function(UNIT2)


@pytest.fixture(scope="module")
def torsion_1d():
    return solve_torsion(1.0, UNIT1, P4, 0.5, Grid(UNIT1, 0.01))


def test_ray_quotients_of_distance_are_one():
    ray = hopf.boundary_quotient_ray(D1, [-1.0], [1.0], 0.5, 10)
    np.testing.assert_allclose(ray.q, 1.0, rtol=1e-14)
    assert ray.passed and not ray.truncated
    ray2 = hopf.boundary_quotient_ray(D2, [0.0, -1.0], [0.0, 1.0], 0.5, 10)
    np.testing.assert_allclose(ray2.q, 1.0, rtol=1e-14)


def test_ray_quotients_of_power_distance_diverge():
    s = 0.5
    u = Field(lambda p: D1(p) ** s, UNIT1)
    ray = hopf.boundary_quotient_ray(u, [-1.0], [1.0], 0.5, 10)
    np.testing.assert_allclose(ray.q, ray.t ** (s - 1), rtol=1e-12)
    assert np.all(np.diff(ray.q) > 0) and ray.passed


def test_ray_quotients_reject_decay():
    u = Field(lambda p: D1(p) ** 2, UNIT1)
    assert not hopf.boundary_quotient_ray(u, [-1.0], [1.0], 0.5, 10).passed


def test_ray_quotients_double_with_the_field(torsion_1d):
    u = torsion_1d.field()
    a = hopf.boundary_quotient_ray(u, [-1.0], [1.0], 0.5, 6)
    b = hopf.boundary_quotient_ray(u.scaled(2.0), [-1.0], [1.0], 0.5, 6)
    np.testing.assert_array_equal(b.q, 2 * a.q)


def test_ray_truncation_warns():
    with pytest.warns(UserWarning):
        ray = hopf.boundary_quotient_ray(D1, [-1.0], [1.0], 0.5, 12, h=0.01)
    assert ray.truncated and ray.t.min() >= 0.04


def test_torsion_ray_quotients_positive(torsion_1d):
    with pytest.warns(UserWarning):
        ray = hopf.boundary_quotient_ray(torsion_1d.field(), [-1.0], [1.0], 0.5, h=0.01)
    assert ray.passed and ray.running_min[-1] > 0


@pytest.mark.parametrize("angle", [0.3, math.pi / 4, 1.2])
def test_cone_quotients_of_distance(angle):
    cone = hopf.boundary_quotient_cone(D2, [-1.0, 0.0], [1.0, 0.0], angle, 400, radius=0.5)
    assert cone.c_beta == pytest.approx(math.sin(angle))
    r = np.linalg.norm(cone.points - [-1.0, 0.0], axis=-1)
    np.testing.assert_allclose(cone.quotients, (1 - np.linalg.norm(cone.points, axis=-1)) / r,
                               rtol=1e-12)
    # d(x0 + r w) >= r (w . eta) - r^2 / 2 on the unit ball
    assert np.all(cone.quotients >= cone.c_beta - r / 2 - 1e-12)
    assert cone.minimum > 0
    flipped = hopf.boundary_quotient_cone(D2.scaled(-1.0), [-1.0, 0.0], [1.0, 0.0], angle, 400,
                                          radius=0.5)
    np.testing.assert_array_equal(flipped.quotients, -cone.quotients)


def test_narrow_cone_matches_the_ray():
    cone = hopf.boundary_quotient_cone(D2, [-1.0, 0.0], [1.0, 0.0], math.pi / 2 - 1e-6, 64,
                                       radius=0.5)
    np.testing.assert_allclose(cone.quotients, 1.0, atol=1e-6)


def test_cone_rejects_bad_input():
    with pytest.raises(DomainError):
        hopf.boundary_quotient_cone(D2, [-1.0, 0.0], [1.0, 0.0], math.pi / 2, 10)
    with pytest.raises(DomainError):
        hopf.boundary_quotient_cone(D2, [-1.0, 0.0], [-1.0, 0.0], math.pi / 4, 10, radius=0.5)


@settings(max_examples=20, deadline=None)
@given(sigma=st.floats(0.1, 10.0))
def test_growth_is_homogeneous(sigma):
    radii = [0.4, 0.2, 0.1, 0.05]
    a = hopf.compute_growth_Phi(D1, [-1.0], [1.0], radii, 4.0, 0.5)
    b = hopf.compute_growth_Phi(D1.scaled(sigma), [-1.0], [1.0], radii, 4.0, 0.5)
    np.testing.assert_allclose(b.values, sigma ** 3 * a.values, rtol=1e-12)


def test_growth_examples():
    radii = 0.5 ** np.arange(1, 9)
    u = Field(lambda p: D1(p) ** 0.5, UNIT1)
    rep = hopf.compute_growth_Phi(u, [-1.0], [1.0], radii, 4.0, 0.5)
    # inf over the half ball is (r/2)^s, so Phi(r) = 2^{-3/2} r^{-1/2}
    np.testing.assert_allclose(rep.values, 2 ** -1.5 * radii ** -0.5, rtol=1e-12)
    assert rep.diverges
    # d: Phi ~ r^{p-1-ps} diverges iff p - 1 < p s
    lip = hopf.compute_growth_Phi(D1, [-1.0], [1.0], radii, 4.0, 0.5)
    assert not lip.diverges
    lip = hopf.compute_growth_Phi(D1, [-1.0], [1.0], radii, 4.0, 0.9)
    np.testing.assert_allclose(lip.values, 0.5 ** 3 * radii ** (3 - 3.6), rtol=1e-12)
    assert lip.diverges
    zero = Field(lambda p: np.zeros(len(p)), UNIT1)
    rep = hopf.compute_growth_Phi(zero, [-1.0], [1.0], radii, 4.0, 0.5)
    assert rep.rejected == list(radii) and not rep.diverges
    with pytest.raises(DomainError):
        hopf.compute_growth_Phi(D1, [-1.0], [1.0], [0.1, 0.2], 4.0, 0.5)


def test_bump_profile():
    x = np.linspace(-1, 1, 201)[:, None]
    b = hopf.bump(x, 0.25)
    assert b.max() == 1.0 and np.all(b >= 0)
    assert np.all(b[np.abs(x[:, 0]) >= 0.5] == 0)


def test_barrier_side_conditions_and_sign():
    rep = hopf.verify_barrier(P4, 0.5, 0.25, 0.25, 0.01)
    c = rep.constants
    assert all(c["side_conditions"].values())
    assert c["side_margins"]["outside"] == 0.0
    assert c["psi_center"] >= c["alpha"] / 4
    assert rep.verdict == hopf.PASS
    assert c["max_value"] + c["max_error_bound"] <= 0


def test_barrier_rejects_bad_rho():
    with pytest.raises(DomainError):
        hopf.BarrierConfig(0.6, 0.25)


def test_two_sided_small():
    rep = hopf.verify_two_sided(P4, 0.5, 1.0, 0.02, R_values=[0.5], refine=True)
    fit = rep.constants["per_R"]["0.5"]
    assert fit["C1"] > 0 and math.isfinite(fit["C2"])
    assert rep.stability["R=0.5"]["C1_change"] < 0.2
    assert rep.verdict == hopf.PASS
    with pytest.raises(DomainError):
        hopf.verify_two_sided(P4, 0.5, 0.0, 0.02)


def test_torsion_hopf_small():
    rep = hopf.verify_torsion_hopf(P4, 0.5, [0.5, 1.0, 2.0], UNIT1, 0.2, 0.02, refine=False)
    C = rep.constants["C_eps"]
    assert all(c > 0 for c in C) and C[0] <= C[1] + 1e-8 <= C[2] + 2e-8
    assert rep.verdict == hopf.PASS
    smaller = hopf.verify_torsion_hopf(P4, 0.5, [1.0], UNIT1, 0.1, 0.02, refine=False)
    assert smaller.constants["C_eps"][0] >= C[1] - 1e-12
    with pytest.raises(DomainError):
        hopf.verify_torsion_hopf(P4, 0.5, [1.0], UNIT1, 0.6, 0.02)


@pytest.mark.parametrize("c", [0.0, -1.0, -1e6])
def test_potential_experiment_passes_for_nonpositive_c(c):
    rep = hopf.potential_experiment(P4, 0.5, c, 1.0, UNIT1, 0.02)
    assert rep.verdict == hopf.PASS
    assert rep.constants["min_quotient"] > 0


def test_potential_experiment_rejects_positive_c():
    with pytest.raises(DomainError):
        hopf.potential_experiment(P4, 0.5, 1.0, 1.0, UNIT1, 0.05)


def test_boundary_experiment(torsion_1d):
    rep = hopf.boundary_experiment(P4, 0.5, 1.0, 0.01, solution=torsion_1d)
    assert rep.verdict == hopf.PASS
    assert rep.constants["flipped_max"] < 0 < rep.constants["cone_min"]


def test_continuity_experiment_small():
    rep = hopf.continuity_experiment(P4, 0.5, 0.05, k_max=6)
    assert rep.verdict == hopf.PASS
    assert len(rep.trace_rows) == 7


def test_continuity_rate_band_for_non_homogeneous_family():
    from orlicz_hopf.young import PowerLog
    rep = hopf.continuity_experiment(PowerLog(3), 0.5, 0.05, k_max=8)
    ratio, ratio_q = rep.constants["rate_ratio"], rep.constants["rate_ratio_q"]
    # near zero PowerLog(3) behaves like t^4, so the c^(p-1) ratio decays
    assert ratio[-1] < 0.25 and 0.25 <= ratio_q[-1] <= 4
    assert rep.verdict == hopf.PASS


def test_scaling_experiment_small():
    rep = hopf.scaling_experiment(P4, 0.5, 1.0, 0.05, R_values=[0.5])
    assert rep.verdict == hopf.PASS
    assert rep.constants["per_R"]["0.5"]["max_diff"] < 5 * 0.05


def test_principles_experiment_small():
    rep = hopf.principles_experiment(P4, 0.5, 0.05, n_single=4, n_pairs=2)
    assert rep.verdict == hopf.PASS


def test_report_is_json_serialisable():
    rep = hopf.compute_growth_Phi(D1, [-1.0], [1.0], [0.4, 0.2], 4.0, 0.5)
    json.dumps(rep.to_dict())
    r = hopf.HopfReport("x", hopf.PASS, {"a": np.float64(math.inf), "b": np.arange(3)})
    assert json.loads(json.dumps(r.to_dict()))["constants"] == {"a": "inf", "b": [0, 1, 2]}
