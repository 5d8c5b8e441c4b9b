"""Discrete Dirichlet problem for the fractional a-Laplacian.

The unknowns are nodal values on the interior grid nodes, each carried
by its grid cell.  The minimised energy is

    E(u) = 1/2 sum_{i != j} w_ij A(|u_i - u_j| / d_ij^s)
           + sum_i m_i / s sum_th W_th G(|u_i| / rho_{i,th}^s)
           - sum_i m_i f_i u_i,

where w_ij is the dnu = dx dy / |x-y|^n mass of the cell pair (pairs closer
than one spacing excluded), rho_{i,th} is the distance from node i to the
edge of the cell union along direction th, and G(T) = int_0^T A(t)/t dt
integrates the exterior (zero) data along rays in closed form.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.optimize import minimize_scalar

from .errors import ConvergenceError, DomainError
from .fields import Ball, Box, Domain, Field, GridField, Grid, directions
from .young import YoungFunction

PAIR_CAP = 16_000_000
GRAD_TOL = 1e-8
MAX_ITER = 50_000


def _cell_pair_1d(k: np.ndarray) -> np.ndarray:
    """dnu mass of two unit cells k apart, pairs closer than 1 excluded."""
    k = np.asarray(k, dtype=float)

    def xlogx(t):
        return np.where(t > 0, t * np.log(np.where(t > 0, t, 1.0)), 0.0)

    out = xlogx(k + 1) - 2 * xlogx(k) + xlogx(k - 1)
    return np.where(k == 1, 2 * math.log(2) - 1, np.where(k == 0, 0.0, out))


@lru_cache(maxsize=None)
def _cell_pair_2d(di: int, dj: int, n_theta: int = 512, n_r: int = 96) -> float:
    """dnu mass of two unit squares offset by (di, dj), pairs closer than 1 excluded.

    The pair integral equals int T(z) / |z|^2 dz over |z| > 1, with T the
    tent-product autocorrelation shifted to (di, dj); done in polar form.
    """
    xg, wg = np.polynomial.legendre.leggauss(8)
    th_br = np.linspace(0, 2 * math.pi, n_theta + 1)
    th = (0.5 * np.diff(th_br)[:, None] * xg + 0.5 * (th_br[1:] + th_br[:-1])[:, None]).ravel()
    wth = (0.5 * np.diff(th_br)[:, None] * wg).ravel()
    rmax = math.hypot(abs(di) + 1, abs(dj) + 1)
    r_br = np.linspace(1.0, rmax, n_r + 1)
    r = (0.5 * np.diff(r_br)[:, None] * xg + 0.5 * (r_br[1:] + r_br[:-1])[:, None]).ravel()
    wr = (0.5 * np.diff(r_br)[:, None] * wg).ravel()
    z1 = r[None, :] * np.cos(th)[:, None]
    z2 = r[None, :] * np.sin(th)[:, None]
    tent = np.maximum(1 - np.abs(z1 - di), 0) * np.maximum(1 - np.abs(z2 - dj), 0)
    return float(np.sum(wth[:, None] * wr[None, :] * tent / r[None, :]))


def pair_weights(nodes: np.ndarray, spacing: Sequence[float]) -> np.ndarray:
    """Symmetric cell-pair dnu masses with zero diagonal."""
    n = nodes.shape[1]
    h = float(spacing[0])
    if n == 1:
        k = np.rint(np.abs(nodes[:, 0][:, None] - nodes[:, 0][None, :]) / h)
        return h * _cell_pair_1d(k)
    if not math.isclose(spacing[0], spacing[1], rel_tol=1e-9):
        raise DomainError("2D assembly needs square cells")
    idx = np.rint(nodes / h).astype(np.int64)
    di = np.abs(idx[:, 0][:, None] - idx[:, 0][None, :])
    dj = np.abs(idx[:, 1][:, None] - idx[:, 1][None, :])
    d2 = (di ** 2 + dj ** 2).astype(float)
    with np.errstate(divide="ignore"):
        w = np.where(d2 > 0, 1.0 / d2, 0.0)
    near = (np.maximum(di, dj) <= 2) & (d2 > 0)
    for a in range(3):
        for b in range(3):
            if a == b == 0:
                continue
            w[near & (di == a) & (dj == b)] = _cell_pair_2d(a, b)
    return h * h * w


def _cell_union_exit(grid: Grid, nodes: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Distance along each direction to the edge of the union of interior cells."""
    dom = grid.domain
    sp = np.asarray(grid.spacing)
    if isinstance(dom, Box) or dom.n == 1:
        lo, hi = dom.bounding_box()
        return Box(tuple(lo + sp / 2), tuple(hi - sp / 2)).ray_exit(nodes, dirs)
    lo, _ = dom.bounding_box()
    mask = grid.interior_mask.reshape(grid.shape)

    def inside(y):
        ij = np.rint((y - lo) / sp).astype(np.int64)
        ok = np.all((ij >= 0) & (ij < np.asarray(grid.shape)), axis=-1)
        ij = np.where(ok[..., None], ij, 0)
        return ok & mask[ij[..., 0], ij[..., 1]]

    step = float(sp.min()) / 4
    x = nodes[:, None, :]
    d = dirs[None, :, :]
    t_in = np.zeros((nodes.shape[0], dirs.shape[0]))
    t_out = np.full_like(t_in, np.inf)
    t = step
    while np.isinf(t_out).any():
        live = np.isinf(t_out)
        hit = live & ~inside(x + t * d)
        t_out[hit] = t
        t_in[live & ~hit] = t
        t += step
    for _ in range(30):
        mid = 0.5 * (t_in + t_out)
        ok = inside(x + mid[..., None] * d)
        t_in = np.where(ok, mid, t_in)
        t_out = np.where(ok, t_out, mid)
    return 0.5 * (t_in + t_out)


@dataclass
class DiscreteProblem:
    yf: YoungFunction
    s: float
    grid: Grid
    nodes: np.ndarray
    mass: float
    weights: np.ndarray
    inv_dist_s: np.ndarray
    rho_s: np.ndarray
    dir_weights: np.ndarray
    dropped_mass: float

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def domain(self) -> Domain:
        return self.grid.domain

    def source_vector(self, f) -> np.ndarray:
        if f is None:
            return np.zeros(self.size)
        if callable(f):
            return np.asarray(f(self.nodes), dtype=float).reshape(self.size)
        arr = np.asarray(f, dtype=float)
        if arr.ndim == 0:
            return np.full(self.size, float(arr))
        if arr.shape != (self.size,):
            raise DomainError(f"source has shape {arr.shape}, expected ({self.size},)")
        return arr


def assemble(domain: Domain, grid: Grid, yf: YoungFunction, s: float, m_ang: int = 64,
             pair_cap: int = PAIR_CAP) -> DiscreteProblem:
    if not 0 < s < 1:
        raise DomainError("s must lie in (0,1)")
    if grid.domain != domain:
        raise DomainError("grid was built on a different domain")
    yf.indices.check_admissible(s)
    nodes = grid.interior_nodes
    N = nodes.shape[0]
    if N == 0:
        raise DomainError("grid has no interior nodes")
    if N * N > pair_cap:
        raise MemoryError(f"{N} nodes give {N * N} pairs, above the cap {pair_cap}")
    w = pair_weights(nodes, grid.spacing)
    dist = np.linalg.norm(nodes[:, None, :] - nodes[None, :, :], axis=-1)
    with np.errstate(divide="ignore"):
        inv = np.where(dist > 0, dist ** (-s), 0.0)
    dirs, wdir = directions(grid.n, m_ang)
    rho = _cell_union_exit(grid, nodes, dirs)
    m = grid.cell_measure
    # band |x-y| < h of each cell row, dropped from the pair sum
    h = min(grid.spacing)
    band = 2 * h * (1.0 if grid.n == 1 else math.pi / 2)
    dropped = N * m * band
    return DiscreteProblem(yf, float(s), grid, nodes, m, w, inv, rho ** s, wdir, dropped)


def _pair_terms(problem: DiscreteProblem, u: np.ndarray):
    q = (u[:, None] - u[None, :]) * problem.inv_dist_s
    return q


def energy(problem: DiscreteProblem, u, f=None) -> float:
    u = np.asarray(u, dtype=float)
    yf, s = problem.yf, problem.s
    q = _pair_terms(problem, u)
    pair = 0.5 * float(np.sum(problem.weights * yf._A(np.abs(q))))
    T = np.abs(u)[:, None] / problem.rho_s
    ext = problem.mass / s * float(np.sum(yf.radial_energy(T) @ problem.dir_weights))
    src = problem.mass * float(problem.source_vector(f) @ u)
    return pair + ext - src


def _exterior_grad(problem: DiscreteProblem, u: np.ndarray) -> np.ndarray:
    yf, s = problem.yf, problem.s
    au = np.abs(u)
    T = au[:, None] / problem.rho_s
    safe = np.where(au > 0, au, 1.0)
    g = yf._A(T) @ problem.dir_weights / (s * safe)
    return problem.mass * np.where(au > 0, np.sign(u) * g, 0.0)


def energy_gradient(problem: DiscreteProblem, u, f=None) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    q = _pair_terms(problem, u)
    pair = np.sum(problem.weights * problem.yf.a(q) * problem.inv_dist_s, axis=1)
    return pair + _exterior_grad(problem, u) - problem.mass * problem.source_vector(f)


def energy_hessian(problem: DiscreteProblem, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    yf, s = problem.yf, problem.s
    q = _pair_terms(problem, u)
    H = -problem.weights * yf.da(q) * problem.inv_dist_s ** 2
    diag = -H.sum(axis=1)
    T = np.abs(u)[:, None] / problem.rho_s
    safeT = np.where(T > 0, T, 1.0)
    curv = np.where(T > 0, (yf._a(T) * T - yf._A(T)) / safeT ** 2, 0.0) / problem.rho_s ** 2
    diag = diag + problem.mass / s * (curv @ problem.dir_weights)
    H[np.diag_indices_from(H)] = diag
    return H


@dataclass
class SolveOptions:
    method: str = "newton"
    tol: float = GRAD_TOL
    max_iter: int = MAX_ITER
    armijo_factor: float = 0.5
    armijo_slope: float = 1e-4
    precondition: bool = True

    def __post_init__(self):
        if self.method not in ("newton", "gd"):
            raise DomainError(f"unknown method {self.method!r}")


@dataclass
class DiscreteSolution:
    grid: Grid
    nodes: np.ndarray
    values: np.ndarray
    energy: float
    grad_norm: float
    iterations: int
    converged: bool
    energies: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def full_values(self) -> np.ndarray:
        out = np.zeros(self.grid.nodes.shape[0])
        out[self.grid.interior_mask] = self.values
        return out

    def field(self) -> GridField:
        return GridField(self.grid, self.full_values())

    def write(self, csv_path, json_path=None) -> None:
        with open(csv_path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow([f"x{k}" for k in range(self.nodes.shape[1])] + ["u"])
            for x, v in zip(self.grid.nodes, self.full_values()):
                wr.writerow([repr(float(c)) for c in x] + [repr(float(v))])
        if json_path is not None:
            with open(json_path, "w") as fh:
                json.dump({"energy": self.energy, "iterations": self.iterations,
                           "grad_norm": self.grad_norm, "converged": self.converged,
                           "params": self.params}, fh, indent=2, sort_keys=True)


def _initial_guess(problem: DiscreteProblem, fvec: np.ndarray) -> np.ndarray:
    # Hessian vanishes at 0 when p > 2, so start from the best multiple of d^s
    shape = problem.domain.distance(problem.nodes) ** problem.s
    if not np.any(fvec):
        return np.zeros(problem.size)
    res = minimize_scalar(lambda c: energy(problem, c * shape, fvec),
                          bracket=(-1.0, 0.0, 1.0) if fvec.sum() < 0 else (0.0, 1.0))
    return float(res.x) * shape


def _line_search(problem, u, E, g, step, fvec, opts):
    slope = float(g @ step)
    if slope >= 0:
        step, slope = -g, -float(g @ g)
    t = 1.0
    gn = np.max(np.abs(g))
    for _ in range(80):
        cand = u + t * step
        Ec = energy(problem, cand, fvec)
        if Ec <= E + opts.armijo_slope * t * slope:
            return cand, Ec
        # energy flat at roundoff: accept if the gradient still improves
        if abs(Ec - E) <= 1e-13 * max(1.0, abs(E)) and Ec <= E + 1e-15 * max(1.0, abs(E)):
            if np.max(np.abs(energy_gradient(problem, cand, fvec))) < gn:
                return cand, min(Ec, E)
        t *= opts.armijo_factor
    raise ConvergenceError(f"line search stalled at gradient norm {gn:.3e}")


def solve(problem: DiscreteProblem, f=None, options: SolveOptions | None = None,
          u0=None) -> DiscreteSolution:
    """Minimise the discrete energy.  Newton with a Levenberg shift by default."""
    opts = options or SolveOptions()
    fvec = problem.source_vector(f)
    u = _initial_guess(problem, fvec) if u0 is None else np.array(u0, dtype=float)
    E = energy(problem, u, fvec)
    energies = [E]
    g = energy_gradient(problem, u, fvec)
    it = 0
    while np.max(np.abs(g)) >= opts.tol and it < opts.max_iter:
        it += 1
        if opts.method == "newton":
            H = energy_hessian(problem, u)
            shift = 0.0
            scale = max(float(np.max(np.abs(np.diag(H)))), 1e-300)
            while True:
                try:
                    step = -cho_solve(cho_factor(H + shift * np.eye(problem.size)), g)
                    break
                except LinAlgError:
                    shift = max(2 * shift, 1e-12 * scale)
        else:
            if opts.precondition:
                dH = np.diag(energy_hessian(problem, u))
                dH = np.where(dH > 0, dH, 1.0)
                step = -g / dH
            else:
                step = -g
        u, E_new = _line_search(problem, u, E, g, step, fvec, opts)
        if E_new > E + 1e-12 * max(1.0, abs(E)):
            raise ConvergenceError("energy increased on an accepted step")
        E = E_new
        energies.append(E)
        g = energy_gradient(problem, u, fvec)
    gn = float(np.max(np.abs(g)))
    return DiscreteSolution(problem.grid, problem.nodes, u, E, gn, it, gn < opts.tol,
                            energies, {"s": problem.s, "young": problem.yf.to_dict(),
                                       "h": min(problem.grid.spacing),
                                       "method": opts.method, "tol": opts.tol})


def solve_torsion(beta: float, domain: Domain, yf: YoungFunction, s: float, grid: Grid,
                  options: SolveOptions | None = None,
                  problem: DiscreteProblem | None = None) -> DiscreteSolution:
    """Solve with constant source beta; flags sign defects instead of raising."""
    if beta < 0:
        raise DomainError("torsion source must be nonnegative")
    problem = problem or assemble(domain, grid, yf, s)
    sol = solve(problem, beta, options)
    sol.flags["nonnegative"] = bool(np.all(sol.values >= -1e-10))
    sol.flags["positive"] = bool(beta == 0 or np.all(sol.values > 0))
    return sol


def weak_residual(problem: DiscreteProblem, u, f, tests: Sequence[Field]) -> float:
    """max_j |<E'(u), phi_j>|, i.e. pairing minus the source pairing."""
    g = energy_gradient(problem, u, f)
    res = [abs(float(g @ phi(problem.nodes))) for phi in tests]
    return max(res) if res else 0.0


def discrete_pairing(problem: DiscreteProblem, u, phi: Field) -> float:
    """<(-Delta_a)^s u, phi> from the assembled weights."""
    return float(energy_gradient(problem, u) @ phi(problem.nodes))
