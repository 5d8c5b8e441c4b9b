"""Quantitative boundary-behaviour experiments.

Each experiment returns a :class:`HopfReport` whose verdict is ``pass``,
``fail`` or ``inconclusive``.  The last one is reserved for cases where the
quadrature error bound is larger than the margin of the checked inequality.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .fields import Ball, Domain, Field, Grid, as_points, distance_function, inner_region
from .operator import QuadratureScheme, eval_pointwise_batch, find_small_multiplier
from .solver import SolveOptions, assemble, solve, solve_torsion
from .young import YoungFunction, check_increment_bounds

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class HopfReport:
    experiment: str
    verdict: str
    constants: dict = field(default_factory=dict)
    sequences: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    stability: dict = field(default_factory=dict)
    trace_header: list = field(default_factory=list)
    trace_rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "verdict": self.verdict,
                "constants": _jsonable(self.constants), "sequences": _jsonable(self.sequences),
                "tolerances": _jsonable(self.tolerances), "stability": _jsonable(self.stability)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


def _ball(n: int, R: float) -> Ball:
    return Ball(tuple([0.0] * n), R)


def _fit_constants(sol, domain: Domain, s: float, nodes_mask=None) -> dict:
    d = domain.distance(sol.nodes)
    sel = d > 0 if nodes_mask is None else nodes_mask
    r1 = sol.values[sel] / d[sel]
    r2 = sol.values[sel] / d[sel] ** s
    i = int(np.argmin(r1))
    return {"C1": float(r1[i]), "C1_node": sol.nodes[sel][i].tolist(),
            "C2": float(np.max(r2)), "min_u_over_ds": float(np.min(r2))}


def _rel_change(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), 1e-300)


def verify_two_sided(yf: YoungFunction, s: float, beta: float, h: float, n: int = 1,
                     R_values: Sequence[float] = (0.25, 0.5, 0.9), refine: bool = True,
                     cross_tol: float = 0.5, mesh_tol: float = 0.2,
                     options: SolveOptions | None = None) -> HopfReport:
    """C1 d <= u_R <= C2 d^s on B_R for several R, with R- and mesh-stability."""
    if not beta > 0:
        raise DomainError("beta must be positive; beta = 0 gives u = 0")
    rows, per_R, stab = [], {}, {}
    ok = True
    for R in R_values:
        dom = _ball(n, R)
        sol = solve_torsion(beta, dom, yf, s, Grid(dom, h), options)
        fit = _fit_constants(sol, dom, s)
        fit["converged"] = sol.converged
        ok &= sol.converged and fit["C1"] > 0 and math.isfinite(fit["C2"])
        d = dom.distance(sol.nodes)
        for x, u, dd in zip(sol.nodes, sol.values, d):
            rows.append([R, h, *x.tolist(), u, u / dd, u / dd ** s])
        if refine:
            fine = solve_torsion(beta, dom, yf, s, Grid(dom, h / 2), options)
            ffit = _fit_constants(fine, dom, s)
            change = _rel_change(fit["C1"], ffit["C1"])
            fit["C1_refined"] = ffit["C1"]
            fit["C2_refined"] = ffit["C2"]
            stab[f"R={R}"] = {"C1_change": change, "stable": change < mesh_tol}
            ok &= change < mesh_tol and ffit["C1"] > 0
        per_R[str(R)] = fit
    C1 = np.array([v["C1"] for v in per_R.values()])
    C2 = np.array([v["C2"] for v in per_R.values()])
    cross = float((C1.max() - C1.min()) / C1.max())
    cross2 = float((C2.max() - C2.min()) / C2.max())
    ok &= cross < cross_tol and cross2 < cross_tol
    return HopfReport(
        "two_sided", _verdict(bool(ok)),
        {"per_R": per_R, "C1_cross_R_variation": cross, "C2_cross_R_variation": cross2},
        {}, {"cross_R": cross_tol, "mesh": mesh_tol}, stab,
        ["R", "h"] + [f"x{k}" for k in range(n)] + ["u", "u_over_d", "u_over_ds"], rows)


def verify_torsion_hopf(yf: YoungFunction, s: float, eps_values: Sequence[float], domain: Domain,
                        rho: float, h: float, refine: bool = True, mesh_tol: float = 0.2,
                        slack: float = 1e-8, options: SolveOptions | None = None) -> HopfReport:
    """C_eps = min over the inner region of u/d for the solution of (-Delta_a)^s u = eps."""
    eps_values = [float(e) for e in eps_values]
    if not all(e > 0 for e in eps_values):
        raise DomainError("eps must be positive")
    if not 0 < rho < 0.5:
        raise DomainError("rho must lie in (0, 1/2)")
    if not isinstance(domain, Ball):
        raise DomainError("the interior ball condition is exercised on balls")

    def run(hh):
        grid = Grid(domain, hh)
        problem = assemble(domain, grid, yf, s)
        near = inner_region(domain, rho, grid)
        d_all = domain.distance(problem.nodes)
        mask = (d_all > 0) & (d_all < rho - 1e-9 * hh)
        out, sols = [], []
        for e in eps_values:
            sol = solve(problem, e, options)
            fit = _fit_constants(sol, domain, s, mask)
            fit["converged"] = sol.converged
            fit["inner_nodes"] = int(near.shape[0])
            out.append(fit)
            sols.append(sol)
        return out, sols

    base, sols = run(h)
    C = [f["C1"] for f in base]
    order = np.argsort(eps_values)
    Cs = np.asarray(C)[order]
    monotone = bool(np.all(np.diff(Cs) >= -slack))
    ok = all(c > 0 for c in C) and monotone and all(f["converged"] for f in base)
    stab = {}
    if refine:
        fine, _ = run(h / 2)
        changes = [_rel_change(a["C1"], b["C1"]) for a, b in zip(base, fine)]
        stab = {"C_eps_refined": [f["C1"] for f in fine], "changes": changes,
                "stable": all(c < mesh_tol for c in changes)}
        ok &= stab["stable"] and all(f["C1"] > 0 for f in fine)
    rows = []
    for e, sol in zip(eps_values, sols):
        d = domain.distance(sol.nodes)
        for x, u, dd in zip(sol.nodes, sol.values, d):
            rows.append([e, *x.tolist(), u, u / dd, u / dd ** s])
    return HopfReport(
        "torsion_hopf", _verdict(bool(ok)),
        {"eps": eps_values, "C_eps": C, "fits": base, "monotone_in_eps": monotone},
        {}, {"monotone_slack": slack, "mesh": mesh_tol, "rho": rho}, stab,
        ["eps"] + [f"x{k}" for k in range(domain.n)] + ["u", "u_over_d", "u_over_ds"], rows)


@dataclass
class RayQuotients:
    t: np.ndarray
    q: np.ndarray
    running_min: np.ndarray
    truncated: bool

    @property
    def passed(self) -> bool:
        if self.q.size < 3:
            return False
        tail = self.q[-3:]
        return bool(self.running_min[-1] > 0 and np.all(tail[1:] / tail[:-1] > 0.5))


def _eval(u, x) -> np.ndarray:
    if isinstance(u, Field):
        return u(x)
    return np.asarray(u(x), dtype=float).reshape(-1)


def boundary_quotient_ray(u, x0, eta, t0: float = 0.5, n_terms: int = 12,
                          h: float | None = None) -> RayQuotients:
    """q_k = u(x0 + t_k eta) / t_k with t_k = 2^-k t0, stopping at 4h."""
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    eta = np.asarray(eta, dtype=float).reshape(-1)
    eta = eta / np.linalg.norm(eta)
    t = t0 * 0.5 ** np.arange(n_terms)
    truncated = False
    if h is not None and np.any(t < 4 * h):
        truncated = True
        t = t[t >= 4 * h]
        warnings.warn(f"ray quotients truncated at t = {t[-1] if t.size else t0:.3g} (4h)")
    pts = x0[None, :] + t[:, None] * eta[None, :]
    q = _eval(u, pts) / t
    return RayQuotients(t, q, np.minimum.accumulate(q), truncated)


@dataclass
class ConeQuotients:
    c_beta: float
    points: np.ndarray
    quotients: np.ndarray

    @property
    def minimum(self) -> float:
        return float(self.quotients.min())

    @property
    def maximum(self) -> float:
        return float(self.quotients.max())

    @property
    def passed(self) -> bool:
        return self.minimum > 0

    def barrier_fit(self, r: float) -> float:
        """Largest alpha with q >= alpha c_beta / (2 r^2) on the samples."""
        return self.minimum * 2 * r * r / self.c_beta


def boundary_quotient_cone(u, x0, eta, beta_angle: float, n_samples: int = 256,
                           radius: float = 0.25, r_min: float = 0.0, seed: int = 0,
                           domain: Domain | None = None) -> ConeQuotients:
    """(u(x) - u(x0)) / |x - x0| over samples of the cone (x-x0)/|x-x0| . eta > c_beta."""
    if not 0 < beta_angle < math.pi / 2:
        raise DomainError("beta_angle must lie in (0, pi/2)")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    eta = np.asarray(eta, dtype=float).reshape(-1)
    eta = eta / np.linalg.norm(eta)
    n = x0.size
    c_beta = math.cos(math.pi / 2 - beta_angle)
    domain = domain or (u.domain if isinstance(u, Field) else None)
    rng = np.random.default_rng(seed)
    lo = max(r_min, 1e-12)
    r = lo + (radius - lo) * rng.random(n_samples)
    if n == 1:
        omega = np.repeat(eta[None, :], n_samples, axis=0)
    else:
        half = math.acos(c_beta)
        phi = (2 * rng.random(n_samples) - 1) * half * (1 - 1e-12)
        base = math.atan2(eta[1], eta[0])
        omega = np.stack([np.cos(base + phi), np.sin(base + phi)], axis=-1)
    pts = x0[None, :] + r[:, None] * omega
    if domain is not None:
        pts = pts[domain.contains(pts)]
    if pts.shape[0] == 0:
        raise DomainError("no cone samples inside the domain")
    dist = np.linalg.norm(pts - x0, axis=-1)
    q = (_eval(u, pts) - _eval(u, x0[None, :])) / dist
    return ConeQuotients(c_beta, pts, q)


@dataclass
class GrowthReport:
    radii: np.ndarray
    values: np.ndarray
    infima: np.ndarray
    diverges: bool
    rejected: list

    def to_dict(self) -> dict:
        return _jsonable({"radii": self.radii, "Phi": self.values, "infima": self.infima,
                          "diverges": self.diverges, "rejected": self.rejected})


def _ball_samples(center: np.ndarray, rad: float, k: int = 20) -> np.ndarray:
    ax = np.linspace(-rad, rad, 2 * k + 1)
    if center.size == 1:
        return center[None, :] + ax[:, None]
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    pts = pts[np.linalg.norm(pts, axis=-1) <= rad * (1 + 1e-12)]
    return center[None, :] + pts


def compute_growth_Phi(u, x0, eta, radii: Sequence[float], p: float, s: float) -> GrowthReport:
    """Phi(r) = (inf_{B_{r/2}(x_r)} |u|)^(p-1) / r^(p s) with x_r = x0 + r eta."""
    radii = np.asarray(radii, dtype=float)
    if radii.size > 1 and not np.all(np.diff(radii) < 0):
        raise DomainError("radii must be decreasing")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    eta = np.asarray(eta, dtype=float).reshape(-1)
    eta = eta / np.linalg.norm(eta)
    infs, vals, rejected = [], [], []
    for r in radii:
        pts = _ball_samples(x0 + r * eta, r / 2)
        m = float(np.min(np.abs(_eval(u, pts))))
        infs.append(m)
        if m == 0:
            rejected.append(float(r))
        vals.append(m ** (p - 1) / r ** (p * s))
    vals = np.asarray(vals)
    diverges = bool(not rejected and vals.size > 1 and vals[-1] > 10 * vals[0])
    return GrowthReport(radii, vals, np.asarray(infs), diverges, rejected)


def bump(x, rho: float) -> np.ndarray:
    """(1 - |x/(1-2 rho)|^2)_+^2, peak 1, supported in B_{1-2 rho}."""
    b = 1 - 2 * rho
    r2 = np.sum(np.atleast_2d(x) ** 2, axis=-1) / b ** 2
    return np.maximum(1 - r2, 0.0) ** 2


@dataclass
class BarrierConfig:
    """Coefficients of psi_r = (alpha/2) d((x-x_r)/r) + (C alpha/2) eta((x-x_r)/r).

    ``level`` plays the role of the infimum of the supersolution on the
    inner ball; ``lam0`` is found by halving so that the distance part
    stays below half the bump's negative contribution.
    """

    rho: float
    r: float
    n: int = 1
    level: float = 1.0
    center: tuple | None = None
    c1: float = 0.0
    c: float = 0.0
    lam0: float = 0.0
    C_r: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if not 0 < self.rho < 0.5:
            raise DomainError("rho must lie in (0, 1/2)")
        if not self.r > 0 or not self.level > 0:
            raise DomainError("r and level must be positive")
        if self.center is None:
            self.center = tuple([0.0] * self.n)

    @property
    def x_r(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    def Phi(self, p: float, s: float) -> float:
        return self.level ** (p - 1) / self.r ** (p * s)

    def psi(self, x) -> np.ndarray:
        y = (as_points(x, self.n) - self.x_r) / self.r
        d = np.maximum(1 - np.linalg.norm(y, axis=-1), 0.0)
        return 0.5 * self.alpha * d + 0.5 * self.C_r * self.alpha * bump(y, self.rho)


class BarrierField(Field):
    def __init__(self, cfg: BarrierConfig):
        self.cfg = cfg
        b = 1 - 2 * cfg.rho
        bump_slope = 8 / (3 * math.sqrt(3)) / b
        L = cfg.alpha / (2 * cfg.r) * (1 + cfg.C_r * bump_slope)
        super().__init__(cfg.psi, Ball(tuple(cfg.center), cfg.r), True, lipschitz=L,
                         sup_norm=0.5 * cfg.alpha * (1 + cfg.C_r))

    def local_lipschitz(self, x, radius):
        cfg = self.cfg
        dist = np.linalg.norm(as_points(x, self.n) - cfg.x_r, axis=-1)
        away = dist - radius > cfg.r * (1 - 2 * cfg.rho)
        return np.where(away, cfg.alpha / (2 * cfg.r), self.lipschitz_estimate)


def _bump_integral(yf: YoungFunction, x: np.ndarray, rho: float, s: float, m: int = 256):
    """int_{B_{1-2rho}} a(eta(y)/|x-y|^s) |x-y|^{-s-n} dy for x outside the support."""
    b = 1 - 2 * rho
    g, w = np.polynomial.legendre.leggauss(m)
    n = x.shape[1]
    if n == 1:
        y = (b * g)[:, None]
        wy = b * w
    else:
        rr = 0.5 * b * (g + 1)
        th = math.pi * (g + 1)
        R, T = np.meshgrid(rr, th, indexing="ij")
        y = np.stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()], axis=-1)
        wy = (np.outer(0.5 * b * w, math.pi * w) * R).ravel()
    dist = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=-1)
    vals = yf.a(bump(y, rho)[None, :] / dist ** s) * dist ** (-s - n)
    return vals @ wy


def design_barrier(yf: YoungFunction, s: float, rho: float, r: float, n: int = 1,
                   level: float = 1.0, h: float = 0.01,
                   scheme: QuadratureScheme | None = None, seed: int = 0) -> BarrierConfig:
    """Search the barrier coefficients: c1, c, lambda0 (halving), C_r and alpha."""
    p = yf.indices.p
    rng = np.random.default_rng(seed)
    pairs = rng.uniform(-10, 10, size=(2000, 2))
    c1 = check_increment_bounds(yf, pairs)["C_increment"]
    cfg = BarrierConfig(rho, r, n, level)
    unit = Ball(tuple([0.0] * n), 1.0)
    grid = Grid(unit, h)
    ann = grid.nodes[np.abs(np.linalg.norm(grid.nodes, axis=-1) - (1 - rho / 2)) <= rho / 2]
    ann = ann[(np.linalg.norm(ann, axis=-1) > 1 - rho) & (np.linalg.norm(ann, axis=-1) < 1)]
    if ann.shape[0] == 0:
        raise DomainError("annulus holds no node; refine h")
    cfg.c1 = c1
    cfg.c = 2 * c1 * float(np.min(_bump_integral(yf, ann, rho, s)))
    eps = 0.5 * cfg.c * (level / r ** s) ** (p - 1)
    lam0, _ = find_small_multiplier(yf, distance_function(unit), eps, grid.closure_nodes, s,
                                    scheme or QuadratureScheme.for_grid(h))
    cfg.lam0 = lam0
    cfg.C_r = max(2.0, 2 * level / (r ** s * lam0))
    cfg.alpha = level / cfg.C_r
    return cfg


def verify_barrier(yf: YoungFunction, s: float, rho: float, r: float, h: float, n: int = 1,
                   level: float = 1.0, scheme: QuadratureScheme | None = None,
                   refine_on_inconclusive: bool = True) -> HopfReport:
    """Sign of (-Delta_a)^s psi_r on the annulus and the side conditions of the barrier."""
    scheme = scheme or QuadratureScheme.for_grid(h)
    cfg = design_barrier(yf, s, rho, r, n, level, h, scheme)
    psi = BarrierField(cfg)
    dom = Ball(tuple(cfg.center), r)
    grid = Grid(Ball(tuple(cfg.center), 2 * r), h)
    nodes = grid.nodes
    dist = np.linalg.norm(nodes - cfg.x_r, axis=-1)
    ann = nodes[(dist > r * (1 - rho)) & (dist < r)]
    if ann.shape[0] == 0:
        raise DomainError("annulus holds no node; refine h")

    def classify(sch):
        ev = eval_pointwise_batch(yf, psi, ann, s, sch)
        upper = ev.value + ev.error_bound
        lower = ev.value - ev.error_bound
        if np.all(upper <= 0):
            return PASS, ev
        return (FAIL if np.any(lower > 0) else INCONCLUSIVE), ev

    main, ev = classify(scheme)
    stab = {"base": main}
    if main == INCONCLUSIVE and refine_on_inconclusive:
        main, ev = classify(scheme.refined())
        stab["refined"] = main
    vals = psi(nodes)
    inside = dist < r
    side_cap = float(np.max(vals[inside] - cfg.alpha * cfg.C_r))
    side_zero = float(np.max(np.abs(vals[~inside]))) if np.any(~inside) else 0.0
    lower_bd = cfg.alpha / (4 * r * r) * (r * r - dist[inside] ** 2)
    side_low = float(np.min(vals[inside] - lower_bd))
    sides = {"psi_le_alphaC": side_cap <= 1e-12, "psi_zero_outside": side_zero == 0.0,
             "psi_ge_quadratic": side_low >= -1e-12}
    verdict = main if all(sides.values()) else FAIL
    Phi = cfg.Phi(yf.indices.p, s)
    rows = [[*x.tolist(), v, e] for x, v, e in zip(ann, ev.value, ev.error_bound)]
    return HopfReport(
        "barrier", verdict,
        {"alpha": cfg.alpha, "C_r": cfg.C_r, "lambda0": cfg.lam0, "c1": cfg.c1, "c": cfg.c,
         "Phi": Phi, "max_value": float(ev.value.max()),
         "max_error_bound": float(ev.error_bound.max()),
         "strict_bound_holds": bool(np.all(ev.value + ev.error_bound <= -0.5 * cfg.c * Phi)),
         "side_conditions": sides, "side_margins": {"cap": side_cap, "outside": side_zero,
                                                    "quadratic": side_low},
         "psi_center": float(psi(cfg.x_r[None, :])[0])},
        {}, {"side": 1e-12, "quadrature": scheme.to_dict()}, stab,
        [f"x{k}" for k in range(n)] + ["value", "error_bound"], rows)


def potential_experiment(yf: YoungFunction, s: float, c_field, beta: float, domain: Ball,
                         h: float, t0: float = 0.5,
                         options: SolveOptions | None = None) -> HopfReport:
    """The torsion solution is a supersolution of (-Delta_a)^s u >= c a(u) when c <= 0."""
    grid = Grid(domain, h)
    sol = solve_torsion(beta, domain, yf, s, grid, options)
    c = c_field(sol.nodes) if callable(c_field) else np.full(sol.values.size, float(c_field))
    c = np.asarray(c, dtype=float).reshape(-1)
    if np.any(c > 0):
        raise DomainError("potential must be nonpositive; use the cone and growth path")
    super_margin = float(np.min(beta - c * yf.a(sol.values)))
    x0 = np.asarray(domain.center) - domain.R * np.eye(domain.n)[0]
    eta = np.eye(domain.n)[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ray = boundary_quotient_ray(sol.field(), x0, eta, min(t0, domain.R), h=h)
    ok = ray.passed and super_margin >= 0 and sol.flags["nonnegative"]
    return HopfReport(
        "potential", _verdict(bool(ok)),
        {"supersolution_margin": super_margin, "min_quotient": float(ray.running_min[-1])},
        {"t": ray.t, "q": ray.q}, {"ray_tail_ratio": 0.5}, {},
        ["t", "q", "running_min"], [[a, b, c_] for a, b, c_ in zip(ray.t, ray.q, ray.running_min)])


def continuity_experiment(yf: YoungFunction, s: float, h: float, n: int = 1, k_max: int = 10,
                          scheme: QuadratureScheme | None = None,
                          rate_factor: float = 4.0) -> HopfReport:
    """Sup of |(-Delta_a)^s (c_k d)| for c_k = 2^-k on the closed unit ball."""
    from .operator import continuity_sweep
    unit = _ball(n, 1.0)
    grid = Grid(unit, h)
    cs = 2.0 ** -np.arange(k_max + 1)
    sw = continuity_sweep(yf, distance_function(unit), cs, grid.closure_nodes, s,
                          scheme or QuadratureScheme.for_grid(h))
    S, M = sw.sup_values, sw.majorants
    p, q = yf.indices.p, yf.indices.q
    decay = bool(S[-1] < 1e-3 * S[0])
    monotone = bool(np.all(np.diff(M) <= 0))
    # S_k / S_0 must sit between c^(q-1) and c^(p-1), up to the factor
    ratio = S / (S[0] * cs ** (p - 1))
    ratio_q = S / (S[0] * cs ** (q - 1))
    rate_ok = bool(np.all((ratio <= rate_factor) & (ratio_q >= 1 / rate_factor)))
    return HopfReport(
        "continuity", _verdict(decay and monotone and rate_ok),
        {"S0": float(S[0]), "S_last": float(S[-1]), "majorant_monotone": monotone,
         "decay_ok": decay, "rate_ok": rate_ok, "rate_ratio": ratio, "rate_ratio_q": ratio_q},
        {"c": cs, "S": S, "M": M}, {"decay": 1e-3, "rate_factor": rate_factor}, {},
        ["k", "c_k", "sup_value", "majorant", "tail_bound"], [list(r) for r in sw.rows()])


def boundary_experiment(yf: YoungFunction, s: float, beta: float, h: float, n: int = 1,
                        beta_angle: float = math.pi / 4, t0: float = 0.5, n_samples: int = 256,
                        seed: int = 0, solution=None) -> HopfReport:
    """Ray and cone quotients at a boundary point of the unit ball for the torsion solution."""
    unit = _ball(n, 1.0)
    sol = solution or solve_torsion(beta, unit, yf, s, Grid(unit, h))
    u = sol.field()
    x0 = -np.eye(n)[0]
    eta = np.eye(n)[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ray = boundary_quotient_ray(u, x0, eta, t0, h=h)
    cone = boundary_quotient_cone(u, x0, eta, beta_angle, n_samples, radius=t0,
                                  r_min=4 * h, seed=seed)
    flipped = boundary_quotient_cone(u.scaled(-1.0), x0, eta, beta_angle, n_samples,
                                     radius=t0, r_min=4 * h, seed=seed)
    ok = ray.passed and cone.passed and flipped.maximum < 0
    return HopfReport(
        "boundary", _verdict(bool(ok)),
        {"ray_min": float(ray.running_min[-1]), "ray_pass": ray.passed,
         "cone_min": cone.minimum, "cone_c_beta": cone.c_beta, "flipped_max": flipped.maximum,
         "cone_samples": int(cone.quotients.size)},
        {"t": ray.t, "q": ray.q}, {"ray_tail_ratio": 0.5}, {},
        ["t", "q", "running_min"], [[a, b, c] for a, b, c in zip(ray.t, ray.q, ray.running_min)])


def scaling_experiment(yf: YoungFunction, s: float, beta: float, h: float, n: int = 1,
                       R_values: Sequence[float] = (0.25, 0.5, 0.9), tol_factor: float = 5.0,
                       options: SolveOptions | None = None) -> HopfReport:
    """u_R(R x) against the unit-ball solution for the rescaled family a_R.

    v(x) = u_R(R x) solves the unit-ball problem for a_R with source R^s beta,
    which is the source used here; the literal source beta is reported too.
    """
    unit = _ball(n, 1.0)
    g1 = Grid(unit, h)
    out, ok, rows = {}, True, []
    for R in R_values:
        dom = _ball(n, R)
        uR = solve_torsion(beta, dom, yf, s, Grid(dom, h), options).field()
        prob = assemble(unit, g1, yf.scaled(R, s), s)
        u1 = solve(prob, R ** s * beta, options)
        literal = solve(prob, beta, options)
        vR = uR(R * u1.nodes)
        err = float(np.max(np.abs(vR - u1.values)))
        err_lit = float(np.max(np.abs(uR(R * literal.nodes) - literal.values)))
        out[str(R)] = {"max_diff": err, "max_diff_literal_source": err_lit,
                       "ratio_to_h": err / h}
        ok &= err < tol_factor * h
        rows += [[R, *x.tolist(), a, b] for x, a, b in zip(u1.nodes, vR, u1.values)]
    return HopfReport("scaling", _verdict(bool(ok)), {"per_R": out}, {},
                      {"max_diff": f"{tol_factor}h", "h": h}, {},
                      ["R"] + [f"x{k}" for k in range(n)] + ["u_R_at_Rx", "u_1"], rows)


def principles_experiment(yf: YoungFunction, s: float, h: float, n: int = 1, seed: int = 0,
                          n_single: int = 20, n_pairs: int = 10, slack: float = 1e-8,
                          options: SolveOptions | None = None) -> HopfReport:
    """Random nonnegative sources give nonnegative solutions; ordered sources, ordered ones."""
    rng = np.random.default_rng(seed)
    opts = options or SolveOptions(tol=1e-11)
    mins, gaps, rows = [], [], []
    problems = {}

    def problem_for(R):
        R = round(float(R), 6)
        if R not in problems:
            dom = _ball(n, R)
            problems[R] = assemble(dom, Grid(dom, h * R), yf, s)
        return problems[R]

    def source(prob):
        x = prob.nodes / prob.domain.R
        k = rng.integers(1, 4, size=n)
        phase = rng.uniform(0, 2 * np.pi, size=n)
        osc = np.prod(np.cos(np.pi * k * x + phase), axis=-1)
        return rng.uniform(0.1, 2.0) * np.maximum(osc - rng.uniform(0.0, 0.8), 0.0)

    for i in range(n_single):
        prob = problem_for(rng.choice([0.25, 0.5, 0.75, 1.0]))
        f = source(prob)
        sol = solve(prob, f, opts)
        mins.append(float(sol.values.min()))
        rows.append(["single", i, prob.domain.R, mins[-1]])
    for i in range(n_pairs):
        prob = problem_for(rng.choice([0.5, 1.0]))
        f1 = source(prob)
        f2 = f1 + np.abs(source(prob))
        u1 = solve(prob, f1, opts).values
        u2 = solve(prob, f2, opts).values
        gaps.append(float(np.max(u1 - u2)))
        rows.append(["pair", i, prob.domain.R, gaps[-1]])
    ok = min(mins) >= -slack and max(gaps) <= slack
    return HopfReport("principles", _verdict(bool(ok)),
                      {"min_solution": min(mins), "max_order_violation": max(gaps)},
                      {"minima": mins, "order_gaps": gaps}, {"slack": slack}, {},
                      ["kind", "index", "R", "value"], rows)
