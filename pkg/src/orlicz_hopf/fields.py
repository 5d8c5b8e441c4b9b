"""Domains, uniform grids, distance functions and scalar fields on R^n, n in {1, 2}."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError


def as_points(x, n: int) -> np.ndarray:
    """Coerce to an (m, n) float array; scalars and 1D lists are accepted for n = 1."""
    arr = np.asarray(x, dtype=float)
    if n == 1 and arr.ndim <= 1:
        return arr.reshape(-1, 1)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.shape[-1] != n:
        raise DomainError(f"points of dimension {arr.shape[-1]} given for n={n}")
    return arr.reshape(-1, n)


class Domain:
    """Bounded open set in R^n."""

    n: int

    def distance(self, x) -> np.ndarray:
        """d(x) = dist(x, complement); zero outside."""
        raise NotImplementedError

    def contains(self, x) -> np.ndarray:
        return self.distance(x) > 0

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def ray_exit(self, x, directions) -> np.ndarray:
        """Distance from interior points x (m, n) along unit directions (k, n) to the boundary."""
        raise NotImplementedError

    def reach(self, x) -> np.ndarray:
        """Largest distance from x to a point of the closed domain."""
        lo, hi = self.bounding_box()
        pts = as_points(x, self.n)
        far = np.maximum(np.abs(pts - lo), np.abs(pts - hi))
        return np.linalg.norm(far, axis=-1)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(Domain):
    center: tuple
    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError("ball radius must be positive")
        if len(self.center) not in (1, 2):
            raise DomainError("only n in {1, 2} is supported")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def n(self) -> int:
        return len(self.center)

    def distance(self, x):
        pts = as_points(x, self.n)
        r = np.linalg.norm(pts - np.asarray(self.center), axis=-1)
        return np.maximum(self.R - r, 0.0)

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.R, c + self.R

    def ray_exit(self, x, directions):
        pts = as_points(x, self.n) - np.asarray(self.center)
        dirs = as_points(directions, self.n)
        b = pts @ dirs.T
        c = np.sum(pts ** 2, axis=-1)[:, None] - self.R ** 2
        return -b + np.sqrt(np.maximum(b ** 2 - c, 0.0))

    def to_dict(self):
        return {"kind": "ball", "center": list(self.center), "R": self.R}


@dataclass(frozen=True)
class Box(Domain):
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or len(lo) not in (1, 2):
            raise DomainError("box corners must share dimension 1 or 2")
        if not all(a < b for a, b in zip(lo, hi)):
            raise DomainError("box needs lo < hi in every coordinate")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return len(self.lo)

    def distance(self, x):
        pts = as_points(x, self.n)
        gaps = np.minimum(pts - np.asarray(self.lo), np.asarray(self.hi) - pts)
        return np.maximum(gaps.min(axis=-1), 0.0)

    def bounding_box(self):
        return np.asarray(self.lo), np.asarray(self.hi)

    def ray_exit(self, x, directions):
        pts = as_points(x, self.n)
        dirs = as_points(directions, self.n)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        out = np.full((pts.shape[0], dirs.shape[0]), np.inf)
        for k in range(self.n):
            dk = dirs[:, k][None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                t_hi = (hi[k] - pts[:, k][:, None]) / dk
                t_lo = (lo[k] - pts[:, k][:, None]) / dk
            t = np.where(dk > 0, t_hi, np.where(dk < 0, t_lo, np.inf))
            out = np.minimum(out, t)
        return out

    def to_dict(self):
        return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}


def Interval(a: float, b: float) -> Box:
    if not a < b:
        raise DomainError("interval needs a < b")
    return Box((a,), (b,))


def domain_from_config(cfg: dict) -> Domain:
    kind = cfg.get("kind")
    if kind == "ball":
        center = cfg.get("center", [0.0])
        return Ball(tuple(np.atleast_1d(center)), float(cfg["R"]))
    if kind == "interval":
        return Interval(float(cfg["a"]), float(cfg["b"]))
    if kind == "box":
        return Box(tuple(cfg["lo"]), tuple(cfg["hi"]))
    raise DomainError(f"unknown domain kind {kind!r}")


def directions(n: int, m_ang: int = 64, half: bool = False):
    """Unit directions and weights for integrating over the unit sphere S^{n-1}.

    ``half=True`` returns one representative of each antipodal pair,
    weighted so that sum_k w_k (g(th_k) + g(-th_k)) integrates g.
    """
    if n == 1:
        if half:
            return np.array([[1.0]]), np.array([1.0])
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if half:
        m = m_ang // 2
        th = np.arange(m) * math.pi / m
        return np.stack([np.cos(th), np.sin(th)], axis=-1), np.full(m, math.pi / m)
    th = np.arange(m_ang) * 2 * math.pi / m_ang
    return np.stack([np.cos(th), np.sin(th)], axis=-1), np.full(m_ang, 2 * math.pi / m_ang)


def sphere_measure(n: int) -> float:
    """n * omega_n: 2 on the real line, 2 pi in the plane."""
    return 2.0 if n == 1 else 2 * math.pi


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid over the bounding box of ``domain``.

    Spacing is adjusted so that the box holds an integer number of cells.
    """

    domain: Domain
    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError("grid spacing must be positive")
        lo, hi = self.domain.bounding_box()
        counts = np.maximum(np.rint((hi - lo) / self.h).astype(int), 1)
        object.__setattr__(self, "counts", tuple(int(c) for c in counts))
        object.__setattr__(self, "spacing", tuple(float(v) for v in (hi - lo) / counts))

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def axes(self) -> list[np.ndarray]:
        lo, _ = self.domain.bounding_box()
        return [lo[k] + self.spacing[k] * np.arange(self.counts[k] + 1) for k in range(self.n)]

    @property
    def shape(self) -> tuple:
        return tuple(c + 1 for c in self.counts)

    @property
    def nodes(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)

    @property
    def cell_measure(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def interior_mask(self) -> np.ndarray:
        d = self.domain.distance(self.nodes)
        return d > 1e-9 * min(self.spacing)

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.nodes[self.interior_mask]

    @property
    def closure_nodes(self) -> np.ndarray:
        """Nodes of the closed domain (interior plus nodes on the boundary)."""
        nodes = self.nodes
        lo_tol = 1e-9 * min(self.spacing)
        inside = self.domain.distance(nodes) > lo_tol
        if isinstance(self.domain, Ball):
            r = np.linalg.norm(nodes - np.asarray(self.domain.center), axis=-1)
            inside |= np.abs(r - self.domain.R) <= lo_tol
        else:
            lo, hi = self.domain.bounding_box()
            inside |= np.all((nodes >= lo - lo_tol) & (nodes <= hi + lo_tol), axis=-1)
        return nodes[inside]


class Field:
    """Scalar function on R^n with optional zero extension outside ``domain``.

    ``lipschitz`` and ``sup_norm`` are metadata consumed by the operator
    error bounds; when not given they are estimated on ``grid`` (or a
    default grid of the domain).
    """

    def __init__(self, rule: Callable[[np.ndarray], np.ndarray], domain: Domain,
                 zero_extension: bool = True, lipschitz: float | None = None,
                 sup_norm: float | None = None, grid: Grid | None = None):
        self.rule = rule
        self.domain = domain
        self.zero_extension = zero_extension
        self._grid = grid
        self._lipschitz = lipschitz
        self._sup = sup_norm

    @property
    def n(self) -> int:
        return self.domain.n

    def __call__(self, x) -> np.ndarray:
        pts = as_points(x, self.n)
        vals = np.asarray(self.rule(pts), dtype=float).reshape(-1)
        if self.zero_extension:
            vals = np.where(self.domain.contains(pts), vals, 0.0)
        return vals

    def evaluate_shaped(self, x) -> np.ndarray:
        """Evaluate at an (..., n) array, preserving the leading shape."""
        arr = np.asarray(x, dtype=float)
        lead = arr.shape[:-1]
        return self(arr.reshape(-1, self.n)).reshape(lead)

    def _probe_grid(self) -> Grid:
        if self._grid is not None:
            return self._grid
        lo, hi = self.domain.bounding_box()
        return Grid(self.domain, float(np.max(hi - lo)) / (400 if self.n == 1 else 80))

    @property
    def sup_norm(self) -> float:
        if self._sup is None:
            self._sup = float(np.max(np.abs(self(self._probe_grid().nodes))))
        return self._sup

    @property
    def lipschitz_estimate(self) -> float:
        if self._lipschitz is None:
            self._lipschitz = adjacent_lipschitz(self, self._probe_grid())
        return self._lipschitz

    def local_lipschitz(self, x, radius: float) -> np.ndarray:
        """Lipschitz bound valid on B(x, radius); the global bound by default."""
        return np.full(as_points(x, self.n).shape[0], self.lipschitz_estimate)

    def kink_radii(self, x, dirs) -> np.ndarray | None:
        """Radii along x +- r th where the field may fail to be smooth, shape (m, k, j).

        Zero-extended fields report where each ray leaves the domain.
        """
        if not self.zero_extension:
            return None
        pts = as_points(x, self.n)
        return np.concatenate([self.domain.ray_exit(pts, dirs)[..., None],
                               self.domain.ray_exit(pts, -np.asarray(dirs))[..., None]], axis=-1)

    def scaled(self, c: float) -> "Field":
        return ScaledField(self, c)

    def shifted(self, offset) -> "Field":
        return ShiftedField(self, np.asarray(offset, dtype=float).reshape(self.n))


class ScaledField(Field):
    def __init__(self, base: Field, c: float):
        super().__init__(lambda p: c * base.rule(p), base.domain, base.zero_extension,
                         abs(c) * base.lipschitz_estimate, abs(c) * base.sup_norm)
        self.base, self.c = base, float(c)

    def __call__(self, x):
        return self.c * self.base(x)

    def local_lipschitz(self, x, radius):
        return abs(self.c) * self.base.local_lipschitz(x, radius)

    def kink_radii(self, x, dirs):
        return self.base.kink_radii(x, dirs)


class ShiftedField(Field):
    """x -> base(x - offset) on the translated domain."""

    def __init__(self, base: Field, offset: np.ndarray):
        super().__init__(base.rule, _shift_domain(base.domain, offset), base.zero_extension,
                         base.lipschitz_estimate, base.sup_norm)
        self.base, self.offset = base, offset

    def __call__(self, x):
        return self.base(as_points(x, self.n) - self.offset)

    def local_lipschitz(self, x, radius):
        return self.base.local_lipschitz(as_points(x, self.n) - self.offset, radius)

    def kink_radii(self, x, dirs):
        return self.base.kink_radii(as_points(x, self.n) - self.offset, dirs)


def _shift_domain(domain: Domain, offset: np.ndarray) -> Domain:
    if isinstance(domain, Ball):
        return Ball(tuple(np.asarray(domain.center) + offset), domain.R)
    if isinstance(domain, Box):
        return Box(tuple(np.asarray(domain.lo) + offset), tuple(np.asarray(domain.hi) + offset))
    raise DomainError("cannot shift this domain")


class GridField(Field):
    """Grid samples with (bi)linear interpolation; zero outside the domain."""

    def __init__(self, grid: Grid, values, zero_extension: bool = True):
        values = np.asarray(values, dtype=float).reshape(grid.shape)
        if zero_extension:
            values = np.where(grid.interior_mask.reshape(grid.shape), values, 0.0)
        self.grid = grid
        self.values = values
        super().__init__(self._interpolate, grid.domain, zero_extension, grid=grid)
        self._sup = float(np.max(np.abs(values)))
        self._lipschitz = _grid_lipschitz(grid, values)

    def _interpolate(self, pts):
        axes = self.grid.axes
        if self.n == 1:
            return np.interp(pts[:, 0], axes[0], self.values, left=0.0, right=0.0)
        from scipy.interpolate import RegularGridInterpolator
        interp = RegularGridInterpolator(axes, self.values, bounds_error=False, fill_value=0.0)
        return interp(pts)

    def kink_radii(self, x, dirs):
        base = super().kink_radii(x, dirs)
        if self.n != 1:
            return base
        # piecewise linear: every node is a kink
        off = self.grid.axes[0][None, :] - as_points(x, 1)[:, 0][:, None]
        kinks = np.abs(off)[:, None, :]
        return kinks if base is None else np.concatenate([base, kinks], axis=-1)

    @classmethod
    def from_interior(cls, grid: Grid, interior_values) -> "GridField":
        full = np.zeros(grid.nodes.shape[0])
        full[grid.interior_mask] = np.asarray(interior_values, dtype=float)
        return cls(grid, full)


def _grid_lipschitz(grid: Grid, values: np.ndarray) -> float:
    L = 0.0
    for k in range(grid.n):
        diff = np.abs(np.diff(values, axis=k)) / grid.spacing[k]
        if diff.size:
            L = max(L, float(diff.max()))
    return L * math.sqrt(grid.n)


def adjacent_lipschitz(field: Field, grid: Grid) -> float:
    vals = field(grid.nodes).reshape(grid.shape)
    return _grid_lipschitz(grid, vals)


class DistanceField(Field):
    """d(x) = dist(x, complement of the domain): 1-Lipschitz, zero outside."""

    def __init__(self, domain: Domain):
        lo, hi = domain.bounding_box()
        if isinstance(domain, Ball):
            sup = domain.R
        else:
            sup = 0.5 * float(np.min(hi - lo))
        super().__init__(domain.distance, domain, True, lipschitz=1.0, sup_norm=sup)

    def __call__(self, x):
        return self.domain.distance(x)

    def kink_radii(self, x, dirs):
        base = super().kink_radii(x, dirs)
        if not isinstance(self.domain, Ball):
            return base
        # ridge of the distance function: the centre
        pts = as_points(x, self.n)
        proj = (np.asarray(self.domain.center) - pts) @ np.asarray(dirs).T
        return np.concatenate([base, np.abs(proj)[..., None]], axis=-1)


def distance_function(domain: Domain) -> DistanceField:
    return DistanceField(domain)


def inner_region(domain: Domain, rho: float, grid: Grid) -> np.ndarray:
    """Grid nodes with 0 < d(x) < rho."""
    if not rho > 0:
        raise DomainError("rho must be positive")
    nodes = grid.nodes
    d = domain.distance(nodes)
    tol = 1e-9 * min(grid.spacing)
    sel = nodes[(d > tol) & (d < rho - tol)]
    if sel.shape[0] == 0:
        warnings.warn(f"inner region with rho={rho} holds no grid node; mesh too coarse")
    return sel


def lower_bound_check(d: DistanceField, grid: Grid | None = None) -> float:
    """min over nodes of d(x) - (1 - |x|^2)/2 for the unit ball centred at 0."""
    dom = d.domain
    if not (isinstance(dom, Ball) and dom.R == 1.0 and not any(dom.center)):
        raise DomainError("lower bound check is stated for the unit ball at the origin")
    grid = grid or Grid(dom, 0.01 if dom.n == 1 else 0.05)
    nodes = grid.nodes
    inside = np.linalg.norm(nodes, axis=-1) <= 1.0
    x = nodes[inside]
    return float(np.min(d(x) - 0.5 * (1.0 - np.sum(x ** 2, axis=-1))))
