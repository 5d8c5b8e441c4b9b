"""Pointwise and weak evaluation of the fractional a-Laplacian.

Pointwise values use the symmetrized form

    f(x) = 1/2 int ( a(D u(x, x+z)) + a(D u(x, x-z)) ) dz / |z|^{n+s},

written in polar coordinates over antipodal direction pairs.  For a
Lipschitz field the two terms cancel to leading order, so no principal
value limit is needed.  The radial integral is a composite Gauss-Legendre
rule on geometrically graded panels near the origin and on uniform, then
geometric, panels beyond ``r_split``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import DomainError
from .fields import Domain, Field, Grid, as_points, directions, sphere_measure
from .young import YoungFunction


@dataclass(frozen=True)
class QuadratureScheme:
    """Radial/angular quadrature parameters.

    ``m_near`` geometric panels of ratio ``gamma`` cover [r_min, r_split];
    when ``m_near`` is None it is derived from ``r_min``.  ``R_trunc`` is
    only used for fields without zero extension (None picks it from the
    tail bound).
    """

    r_split: float = 1.0
    gamma: float = 0.85
    r_min: float = 1e-6
    m_near: int | None = None
    gauss_order: int = 4
    far_width: float = 0.05
    R_trunc: float | None = None
    m_ang: int = 64
    tail_policy: str = "analytic_bound"

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise DomainError("near-field grading needs gamma in (0,1)")
        if self.R_trunc is not None and not self.R_trunc > self.r_split:
            raise DomainError("R_trunc must exceed r_split")
        if self.tail_policy not in ("analytic_bound", "ignore"):
            raise DomainError(f"unknown tail policy {self.tail_policy!r}")
        if self.m_ang % 2:
            raise DomainError("m_ang must be even")

    @classmethod
    def for_grid(cls, h: float, **kw) -> "QuadratureScheme":
        return cls(r_min=h / 4, **kw)

    @property
    def n_near(self) -> int:
        if self.m_near is not None:
            return self.m_near
        return max(1, math.ceil(math.log(self.r_min / self.r_split) / math.log(self.gamma)))

    @property
    def near_floor(self) -> float:
        return self.r_split * self.gamma ** self.n_near

    def refined(self) -> "QuadratureScheme":
        """Finer near grading (square-root ratio, squared floor), half the far width,
        twice the angles and R_trunc."""
        return replace(
            self, gamma=math.sqrt(self.gamma), m_near=4 * self.n_near,
            far_width=self.far_width / 2, m_ang=2 * self.m_ang,
            R_trunc=None if self.R_trunc is None else 2 * self.R_trunc)

    def breakpoints(self, r_end: float) -> np.ndarray:
        """Panel edges on [near_floor, r_end]."""
        near = self.r_split * self.gamma ** np.arange(self.n_near, -1, -1)
        far = [self.r_split]
        r = self.r_split
        ratio = 1.0 / self.gamma
        while r < r_end:
            r = r + self.far_width if r < 4 * self.r_split else r * ratio
            far.append(r)
        br = np.unique(np.concatenate([near, far]))
        br = np.append(br[br < r_end], r_end)
        # cap near panel widths at far_width
        near_end = br[:-1] < self.r_split
        parts = np.where(near_end, np.ceil(np.diff(br) / self.far_width), 1)
        parts = np.maximum(parts.astype(int), 1)
        return np.concatenate([np.linspace(a, b, k + 1)[:-1]
                               for a, b, k in zip(br[:-1], br[1:], parts)] + [br[-1:]])

    def radial_rule(self, r_end: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights on [near_floor, r_end]."""
        return _panel_rule(self.breakpoints(r_end), self.gauss_order)

    def to_dict(self) -> dict:
        return {"r_split": self.r_split, "gamma": self.gamma, "r_min": self.r_min,
                "m_near": self.n_near, "gauss_order": self.gauss_order,
                "far_width": self.far_width, "R_trunc": self.R_trunc,
                "m_ang": self.m_ang, "tail_policy": self.tail_policy}


def _panel_rule(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on the panels of ``edges`` (last axis)."""
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[..., :-1, None], edges[..., 1:, None]
    nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w
    lead = edges.shape[:-1]
    return nodes.reshape(*lead, -1), weights.reshape(*lead, -1)


@dataclass(frozen=True)
class OperatorEval:
    value: float
    near_field: float
    far_field: float
    tail_bound: float
    near_bound: float = 0.0

    @property
    def error_bound(self) -> float:
        return self.tail_bound + self.near_bound


@dataclass
class BatchEval:
    """Vectorised counterpart of OperatorEval, plus the absolute majorant."""

    points: np.ndarray
    value: np.ndarray
    near_field: np.ndarray
    far_field: np.ndarray
    tail_bound: np.ndarray
    near_bound: np.ndarray
    majorant: np.ndarray

    @property
    def error_bound(self) -> np.ndarray:
        return self.tail_bound + self.near_bound

    def __getitem__(self, i) -> OperatorEval:
        return OperatorEval(float(self.value[i]), float(self.near_field[i]),
                            float(self.far_field[i]), float(self.tail_bound[i]),
                            float(self.near_bound[i]))


def tail_bound(yf: YoungFunction, K: float, sup_u: float, R_trunc: float, n: int,
               s: float) -> float:
    """Bound on the radial integral beyond R_trunc for |c| <= K and |u| <= sup_u.

    Valid for R_trunc >= 1 and growth index p >= 2.
    """
    if K == 0 or sup_u == 0:
        return 0.0
    return sphere_measure(n) / (2 * s) * float(yf.a(2 * K * sup_u)) * R_trunc ** (-s)


def choose_truncation(yf: YoungFunction, sup_u: float, n: int, s: float,
                      scale: float = 0.0, rel: float = 1e-6, floor: float = 2.0) -> float:
    """Smallest R_trunc with tail_bound < rel * (scale + 1)."""
    target = rel * (abs(scale) + 1.0)
    head = sphere_measure(n) / (2 * s) * float(yf.a(2 * sup_u))
    if head == 0:
        return floor
    return max(floor, 1.0001 * (head / target) ** (1.0 / s))


def exterior_flux(yf: YoungFunction, t, rho, s: float) -> np.ndarray:
    """int_rho^inf a(t / r^s) r^{-1-s} dr, in closed form A(|t|/rho^s) / (s |t|) sign(t)."""
    t = np.asarray(t, dtype=float)
    rho = np.asarray(rho, dtype=float)
    at = np.abs(t)
    safe = np.where(at > 0, at, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.sign(t) * yf._A(at / rho ** s) / (s * safe)
    return np.where((at > 0) & np.isfinite(rho), out, 0.0)


def _check_s(s: float) -> None:
    if not 0 < s < 1:
        raise DomainError("s must lie in (0,1)")


def eval_pointwise_batch(yf: YoungFunction, u: Field, points, s: float,
                         scheme: QuadratureScheme | None = None,
                         check_indices: bool = True, chunk: int = 64) -> BatchEval:
    _check_s(s)
    scheme = scheme or QuadratureScheme()
    if check_indices:
        yf.indices.check_admissible(s)
    n = u.n
    pts = as_points(points, n)
    dirs, wdir = directions(n, scheme.m_ang, half=True)
    wsum = float(wdir.sum())

    if u.zero_extension:
        r_end = float(np.max(u.domain.reach(pts))) * (1 + 1e-12) + 1e-12
        r_end = max(r_end, scheme.near_floor * 2)
    else:
        if scheme.R_trunc is not None:
            r_end = scheme.R_trunc
        else:
            r_end = choose_truncation(yf, u.sup_norm, n, s)
    edges = scheme.breakpoints(r_end)

    out = {k: np.zeros(pts.shape[0]) for k in
           ("value", "near", "far", "tail", "nearb", "maj")}
    ux_all = u(pts)

    # radial remainder [0, near_floor] bounded with a(sig T) <= sig^(p-1) a(T)
    rf = scheme.near_floor
    kappa = yf.indices.p * (1 - s) - 1
    L = u.local_lipschitz(pts, rf)
    if kappa > 0:
        out["nearb"] = 2 * wsum * yf._a(L * rf ** (1 - s)) * rf ** (-s) / kappa
    else:
        out["nearb"] = np.full(pts.shape[0], np.inf)

    if u.zero_extension:
        tail_exact = 2 * wsum * exterior_flux(yf, ux_all, r_end, s)
    else:
        tail_exact = np.zeros(pts.shape[0])
        if scheme.tail_policy == "analytic_bound":
            out["tail"][:] = tail_bound(yf, 1.0, u.sup_norm, r_end, n, s)

    for lo in range(0, pts.shape[0], chunk):
        sl = slice(lo, lo + chunk)
        x = pts[sl]
        ux = ux_all[sl]
        mc = x.shape[0]
        e = np.broadcast_to(edges, (mc, dirs.shape[0], edges.size))
        kinks = u.kink_radii(x, dirs)
        if kinks is not None:
            # kinks of the field along each ray become panel edges
            kinks = np.clip(np.where(np.isfinite(kinks), kinks, r_end), edges[0], r_end)
            e = np.sort(np.concatenate([e, kinks], axis=-1), axis=-1)
        r, wr = _panel_rule(e, scheme.gauss_order)                  # (m, k, R)
        kernel = wr * r ** (-1 - s)
        near_mask = r < scheme.r_split
        disp = r[..., None] * dirs[None, :, None, :]                # (m, k, R, n)
        up = u.evaluate_shaped(x[:, None, None, :] + disp)
        um = u.evaluate_shaped(x[:, None, None, :] - disp)
        rs = r ** s
        ap = yf.a((ux[:, None, None] - up) / rs)
        am = yf.a((ux[:, None, None] - um) / rs)
        wk = wdir[None, :, None] * kernel
        integrand = wk * (ap + am)
        absint = wk * (np.abs(ap) + np.abs(am))
        out["near"][sl] = np.sum(np.where(near_mask, integrand, 0.0), axis=(1, 2))
        out["far"][sl] = np.sum(np.where(near_mask, 0.0, integrand), axis=(1, 2)) + tail_exact[sl]
        out["maj"][sl] = absint.sum(axis=(1, 2)) + np.abs(tail_exact[sl])
    out["value"] = out["near"] + out["far"]
    return BatchEval(pts, out["value"], out["near"], out["far"], out["tail"],
                     np.asarray(out["nearb"], dtype=float), out["maj"])


def eval_pointwise(yf: YoungFunction, u: Field, x, s: float,
                   scheme: QuadratureScheme | None = None) -> OperatorEval:
    """Value of the fractional a-Laplacian of ``u`` at the single point ``x``."""
    pts = as_points(x, u.n)
    if pts.shape[0] != 1:
        raise DomainError("eval_pointwise takes one point; use eval_pointwise_batch")
    return eval_pointwise_batch(yf, u, pts, s, scheme)[0]


def eval_weak_pairing(yf: YoungFunction, u: Field, phi: Field, s: float, grid: Grid,
                      m_ang: int = 64, order: str = "ij") -> float:
    """Pair-sum discretization of 1/2 iint a(D^s u) D^s phi dx dy / |x-y|^n.

    Both fields vanish outside ``u.domain``; pairs with one point outside
    are integrated exactly along rays.  Midpoint weights on ``grid``,
    diagonal excluded.
    """
    _check_s(s)
    if not phi.zero_extension:
        raise DomainError("test function must be zero-extended")
    n = u.n
    nodes = grid.interior_nodes
    m = grid.cell_measure
    U = u(nodes)
    P = phi(nodes)
    if order not in ("ij", "ji"):
        raise DomainError("order is 'ij' or 'ji'")
    pair = 0.0
    step = 1024
    for lo in range(0, nodes.shape[0], step):
        sl = slice(lo, lo + step)
        diff = nodes[sl, None, :] - nodes[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        diag = dist == 0
        dist = np.where(diag, 1.0, dist)
        ds = dist ** s
        if order == "ij":
            term = yf.a((U[sl, None] - U[None, :]) / ds) * (P[sl, None] - P[None, :]) / ds
        else:
            term = yf.a((U[None, :] - U[sl, None]) / ds) * (P[None, :] - P[sl, None]) / ds
        pair += float(np.sum(np.where(diag, 0.0, term / dist ** n)))
    pair *= 0.5 * m * m
    dirs, wdir = directions(n, m_ang)
    rho = u.domain.ray_exit(nodes, dirs)
    if u.zero_extension:
        ext = exterior_flux(yf, U[:, None], rho, s) @ wdir
    else:
        ext = _exterior_rays(yf, u, nodes, U, dirs, rho, s) @ wdir
    return pair + float(np.sum(m * P * ext))


def _exterior_rays(yf, u, nodes, U, dirs, rho, s, order: int = 64):
    """int_rho^inf a((u(x) - u(x + r th)) / r^s) r^{-1-s} dr via r = rho v^(-1/s)."""
    g, w = np.polynomial.legendre.leggauss(order)
    v = 0.5 * (g + 1)
    wv = 0.5 * w
    r = rho[..., None] * v ** (-1.0 / s)                        # (m, k, q)
    y = nodes[:, None, None, :] + r[..., None] * dirs[None, :, None, :]
    vals = yf.a((U[:, None, None] - u.evaluate_shaped(y)) / r ** s)
    return rho ** (-s) / s * (vals @ wv)


@dataclass
class SweepResult:
    coefficients: np.ndarray
    sup_values: np.ndarray
    majorants: np.ndarray
    tail_bounds: np.ndarray
    error_bounds: np.ndarray

    def rows(self) -> list[tuple]:
        return [(k, float(c), float(S), float(M), float(T)) for k, (c, S, M, T) in
                enumerate(zip(self.coefficients, self.sup_values, self.majorants,
                              self.tail_bounds))]


def continuity_sweep(yf: YoungFunction, u: Field, coefficients: Sequence[float],
                     points, s: float, scheme: QuadratureScheme | None = None) -> SweepResult:
    """S_k = max |f(c_k u)| and M_k = max int a(|c_k D^s u|) dmu over ``points``."""
    cs = np.asarray(coefficients, dtype=float)
    S, M, T, E = (np.zeros(cs.size) for _ in range(4))
    for k, c in enumerate(cs):
        if c == 0:
            continue
        ev = eval_pointwise_batch(yf, u.scaled(c), points, s, scheme)
        S[k] = np.max(np.abs(ev.value))
        M[k] = np.max(ev.majorant)
        T[k] = np.max(ev.tail_bound)
        E[k] = np.max(ev.error_bound)
    return SweepResult(cs, S, M, T, E)


def find_small_multiplier(yf: YoungFunction, u: Field, eps: float, points, s: float,
                          scheme: QuadratureScheme | None = None, c0: float = 1.0,
                          max_halvings: int = 80) -> tuple[float, float]:
    """Halve c from c0 until max |f(c u)| over ``points`` (plus error bound) <= eps."""
    c = c0
    for _ in range(max_halvings):
        ev = eval_pointwise_batch(yf, u.scaled(c), points, s, scheme)
        sup = float(np.max(np.abs(ev.value) + ev.error_bound))
        if sup <= eps:
            return c, sup
        c *= 0.5
    raise DomainError(f"no multiplier found down to c={c:.3g}")


def pointwise_implies_weak_check(yf: YoungFunction, u: Field, eps: float,
                                 tests: Sequence[Field], s: float, grid: Grid,
                                 scheme: QuadratureScheme | None = None) -> dict:
    """Margins eps * int phi - <(-Delta_a)^s u, phi> for nonnegative test fields."""
    nodes = grid.interior_nodes
    ev = eval_pointwise_batch(yf, u, nodes, s, scheme)
    pointwise_max = float(np.max(ev.value))
    margins = []
    for phi in tests:
        vals = phi(nodes)
        if np.any(vals < 0):
            raise DomainError("test functions must be nonnegative")
        mass = float(vals.sum() * grid.cell_measure)
        margins.append(eps * mass - eval_weak_pairing(yf, u, phi, s, grid))
    return {"pointwise_max": pointwise_max, "pointwise_ok": pointwise_max <= eps,
            "margins": np.asarray(margins)}
