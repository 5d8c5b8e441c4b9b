"""Acceptance suite: one test per criterion, each reporting a pass/fail line.

Run alone with ``pytest tests/test_acceptance.py -v``; the terminal summary
lists every criterion with its measured quantities.
"""
import json
import math
import time

import numpy as np
import pytest

from orlicz_hopf import cli, hopf
from orlicz_hopf.fields import Ball, Grid
from orlicz_hopf.solver import assemble, energy, energy_gradient, solve_torsion
from orlicz_hopf.young import (Power, PowerLog, SumOfPowers, check_increment_bounds,
                               check_young_inequality, luxemburg_norm, modular, sandwich_check,
                               xi_bounds)

P4 = Power(4)
S = 0.5
UNIT1 = Ball((0.0,), 1.0)
FAMILIES = [Power(3), Power(4), SumOfPowers(1, 3, 1, 5), PowerLog(3)]


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def test_ac1_young_toolbox(record):
    rng = np.random.default_rng(2024)
    checks = {}
    with Timer() as tm:
        for yf in FAMILIES:
            name = "/".join(str(v) for v in yf.to_dict().values())
            t = np.exp(rng.uniform(-5, 5, 1000))
            odd = np.all(yf.a(-t) == -yf.a(t)) and np.all(yf.A(-t) == -yf.A(t))
            t1, t2 = np.exp(rng.uniform(-5, 5, (2, 1000)))
            mid = yf.A(0.5 * (t1 + t2))
            convex = np.all(mid <= 0.5 * (yf.A(t1) + yf.A(t2)) * (1 + 1e-12))
            s_, t_ = np.exp(rng.uniform(-4, 4, (2, 1000)))
            young = np.all(check_young_inequality(yf, s_, t_)["holds"])
            sw = sandwich_check(yf.normalized(), np.exp(rng.uniform(-6, 6, 1000)))
            sandwich = sw["ok_A"] and sw["ok_a"] and sw["ok_da"]
            pairs = np.sort(rng.uniform(-10, 10, (1000, 2)), axis=1)
            # the derivative bound uses the power sandwich, i.e. A(1) = 1
            inc = check_increment_bounds(yf.normalized(), pairs)
            w = np.full(40, 1 / 40)
            lux_ok = True
            for _ in range(100):
                u = rng.normal(0, rng.uniform(0.1, 5), 40)
                lam = luxemburg_norm(yf, lambda l: modular(yf, u / l, w))
                lo, hi = xi_bounds(lam, yf.indices.p, yf.indices.q)
                phi = modular(yf, u, w)
                lux_ok &= bool(lo * (1 - 1e-8) <= phi <= hi * (1 + 1e-8))
            checks[name] = bool(odd and convex and young and sandwich and inc["positive"]
                                and inc["worst_margin_derivative"] >= -1e-12 and lux_ok)
    ok = all(checks.values()) and tm.seconds < 5
    record("AC1", ok, f"{checks} in {tm.seconds:.2f}s")
    assert ok


def test_ac2_gradient_against_finite_differences(record):
    from orlicz_hopf.fields import Interval
    with Timer() as tm:
        dom = Interval(0, 1)
        prob = assemble(dom, Grid(dom, 0.05), P4, S)
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(10):
            u = rng.normal(size=prob.size)
            f = rng.normal(size=prob.size)
            g = energy_gradient(prob, u, f)
            step = 1e-6 * max(1.0, float(np.max(np.abs(u))))
            fd = np.array([(energy(prob, u + step * e, f) - energy(prob, u - step * e, f))
                           / (2 * step) for e in np.eye(prob.size)])
            worst = max(worst, float(np.max(np.abs(fd - g)) / np.max(np.abs(g))))
    ok = prob.size == 19 and worst < 1e-6 and tm.seconds < 2
    record("AC2", ok, f"nodes={prob.size} max rel err={worst:.2e} in {tm.seconds:.2f}s")
    assert ok


def test_ac3_continuity_at_zero(record):
    with Timer() as tm:
        rep = hopf.continuity_experiment(P4, S, 0.005, 1, 10)
    c = rep.constants
    ok = rep.passed and c["decay_ok"] and c["majorant_monotone"] and c["rate_ok"] \
        and tm.seconds < 30
    record("AC3", ok, f"S0={c['S0']:.4g} S10={c['S_last']:.3g} "
                      f"rate ratios in [{np.min(c['rate_ratio']):.3f}, "
                      f"{np.max(c['rate_ratio']):.3f}] in {tm.seconds:.2f}s")
    assert ok


def test_ac4_two_sided_bound(record):
    with Timer() as tm:
        rep = hopf.verify_two_sided(P4, S, 1.0, 0.005, 1, (0.25, 0.5, 0.9), refine=True)
    per = rep.constants["per_R"]
    C1 = [v["C1"] for v in per.values()]
    C2 = [v["C2"] for v in per.values()]
    mesh = max(v["C1_change"] for v in rep.stability.values())
    cross = rep.constants["C1_cross_R_variation"]
    ok = (min(C1) > 0 and all(map(math.isfinite, C2)) and cross < 0.5 and mesh < 0.2
          and tm.seconds < 120)
    record("AC4", ok, f"C1={np.round(C1, 4).tolist()} C2={np.round(C2, 4).tolist()} "
                      f"cross-R={cross:.3f} mesh={mesh:.3f} in {tm.seconds:.1f}s")
    assert ok


def test_ac5_torsion_surrogate(record):
    with Timer() as tm:
        rep = hopf.verify_torsion_hopf(P4, S, [0.5, 1.0, 2.0], UNIT1, 0.2, 0.005)
    C = rep.constants["C_eps"]
    ok = min(C) > 0 and rep.constants["monotone_in_eps"] and tm.seconds < 120
    record("AC5", ok, f"C_eps={np.round(C, 5).tolist()} monotone="
                      f"{rep.constants['monotone_in_eps']} in {tm.seconds:.1f}s")
    assert ok


def test_ac6_scaling_identity(record):
    h = 0.005
    with Timer() as tm:
        rep = hopf.scaling_experiment(P4, S, 1.0, h, 1, (0.25, 0.5, 0.9))
    diffs = {R: v["max_diff"] for R, v in rep.constants["per_R"].items()}
    ok = all(d < 5 * h for d in diffs.values()) and tm.seconds < 120
    record("AC6", ok, f"max diffs {({k: round(v, 5) for k, v in diffs.items()})} "
                      f"vs 5h={5 * h} in {tm.seconds:.1f}s")
    assert ok


def test_ac7_maximum_and_comparison_principles(record):
    with Timer() as tm:
        rep = hopf.principles_experiment(P4, S, 0.01, 1, seed=11, n_single=20, n_pairs=10)
    c = rep.constants
    ok = c["min_solution"] >= -1e-8 and c["max_order_violation"] <= 1e-8 and tm.seconds < 180
    record("AC7", ok, f"min u={c['min_solution']:.3g} max(u1-u2)="
                      f"{c['max_order_violation']:.3g} in {tm.seconds:.1f}s")
    assert ok


def test_ac8_boundary_quotients(record):
    sol1 = solve_torsion(1.0, UNIT1, P4, S, Grid(UNIT1, 0.005))
    unit2 = Ball((0.0, 0.0), 1.0)
    sol2 = solve_torsion(1.0, unit2, P4, S, Grid(unit2, 0.05))
    with Timer() as tm:
        r1 = hopf.boundary_experiment(P4, S, 1.0, 0.005, 1, math.pi / 4, 0.5, solution=sol1)
        r2 = hopf.boundary_experiment(P4, S, 1.0, 0.05, 2, math.pi / 4, 0.8, solution=sol2)
    ok = r1.passed and r2.passed and tm.seconds < 60
    record("AC8", ok, f"1D ray min={r1.constants['ray_min']:.4f}; 2D cone min="
                      f"{r2.constants['cone_min']:.4f} flipped max="
                      f"{r2.constants['flipped_max']:.4f} in {tm.seconds:.2f}s")
    assert ok


def test_ac9_barrier_inequality(record):
    with Timer() as tm:
        rep = hopf.verify_barrier(P4, S, 0.25, 0.25, 0.005, 1)
    c = rep.constants
    sides = all(c["side_conditions"].values())
    ok = rep.verdict == hopf.PASS and sides and tm.seconds < 180
    record("AC9", ok, f"verdict={rep.verdict} base={rep.stability['base']} max value="
                      f"{c['max_value']:.4g} error bound={c['max_error_bound']:.2e} "
                      f"sides={sides} in {tm.seconds:.2f}s")
    assert ok


def test_ac10_determinism(record, tmp_path):
    cfg = {"young": {"family": "power", "p": 4}, "s": S,
           "domain": {"kind": "ball", "center": [0.0], "R": 1.0}, "h": 0.02, "seed": 5,
           "experiments": list(cli.KINDS)}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    a = cli.run(str(path), str(tmp_path / "a"), quiet=True)
    cli.run(str(path), str(tmp_path / "b"), quiet=True)
    names = sorted(p.name for p in (tmp_path / "a").glob("*.trace.csv"))
    same = [n for n in names
            if (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()]
    ok = len(names) == len(cli.KINDS) and same == names
    record("AC10", ok, f"{len(same)}/{len(names)} CSVs identical; exit code {a.exit_code}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
