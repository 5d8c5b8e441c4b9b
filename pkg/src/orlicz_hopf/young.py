"""Young functions: evaluation, growth indices, duality, modulars and norms.

Every family is evaluated through three rules, ``A``, ``a = A'`` and
``da = a'``.  ``A`` and ``a`` are extended oddly to negative arguments,
``da`` evenly.  All rules are vectorised over numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable

import numpy as np

from .errors import (
    AdmissibilityError,
    BracketError,
    DomainError,
    InvalidYoungError,
    NormInfiniteError,
)

INDEX_T_MIN = 1e-4
INDEX_T_MAX = 1e4
INDEX_SAMPLES = 512
FD_REL_STEP = 1e-5

BISECT_ABS_TOL = 1e-12
BISECT_REL_TOL = 1e-10

_GL_X, _GL_W = np.polynomial.legendre.leggauss(200)


def _asarray(t):
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Young function argument must be finite")
    return arr


@dataclass(frozen=True)
class GrowthIndices:
    """Grid estimates of the growth indices.

    ``p_fn``/``q_fn`` bound t a(t)/A(t); ``p_dd``/``q_dd`` bound
    t a''(t)/a'(t) + 2.  ``p`` and ``q`` are the conservative pair used by
    the power-type bounds (smallest lower, largest upper).
    """

    p_fn: float
    q_fn: float
    p_dd: float
    q_dd: float

    @property
    def p(self) -> float:
        return min(self.p_fn, self.p_dd)

    @property
    def q(self) -> float:
        return max(self.q_fn, self.q_dd)

    def admissible_for(self, s: float) -> bool:
        return self.p_fn > max(2.0, 1.0 / (1.0 - s))

    def check_admissible(self, s: float) -> None:
        if not 0.0 < s < 1.0:
            raise DomainError("s must lie in (0,1)")
        if not self.p_fn > 2.0:
            raise AdmissibilityError(
                f"growth index p={self.p_fn:.6g} violates the hypothesis p > 2")
        bound = 1.0 / (1.0 - s)
        if not self.p_fn > bound:
            raise AdmissibilityError(
                f"growth index p={self.p_fn:.6g} violates the hypothesis "
                f"p > 1/(1-s) = {bound:.6g}")


class YoungFunction:
    """Base class; subclasses implement the rules on t >= 0."""

    name = "young"

    # positive-axis rules -------------------------------------------------
    def _A(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _a(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _da(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # public rules ----------------------------------------------------------
    def A(self, t):
        t = _asarray(t)
        return np.sign(t) * self._A(np.abs(t))

    def a(self, t):
        t = _asarray(t)
        return np.sign(t) * self._a(np.abs(t))

    def da(self, t):
        t = _asarray(t)
        return self._da(np.abs(t))

    def radial_energy(self, T):
        """G(T) = int_0^T A(tau)/tau dtau for T >= 0.

        Closed form where a family provides one; otherwise a 200-node
        Gauss-Legendre rule on [0, T].
        """
        T = np.asarray(T, dtype=float)
        flat = T.reshape(-1)
        out = np.empty_like(flat)
        for lo in range(0, flat.size, 4096):
            chunk = flat[lo:lo + 4096]
            half = 0.5 * chunk[:, None]
            tau = half * (_GL_X[None, :] + 1.0)
            safe = np.where(tau > 0, tau, 1.0)
            vals = np.where(tau > 0, self._A(tau) / safe, 0.0)
            out[lo:lo + 4096] = (vals * _GL_W[None, :]).sum(axis=1) * half[:, 0]
        return out.reshape(T.shape)

    @cached_property
    def indices(self) -> GrowthIndices:
        return estimate_indices(self)

    def scaled(self, R: float, s: float) -> "Scaled":
        return Scaled(self, R, s)

    def normalized(self) -> "YoungFunction":
        return Normalized(self)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Power(YoungFunction):
    """A(t) = t^p."""

    p: float
    name = "power"

    def __post_init__(self):
        if not self.p > 1:
            raise InvalidYoungError("power family needs p > 1")

    def _A(self, t):
        return t ** self.p

    def _a(self, t):
        return self.p * t ** (self.p - 1)

    def _da(self, t):
        return self.p * (self.p - 1) * t ** (self.p - 2)

    def radial_energy(self, T):
        T = np.asarray(T, dtype=float)
        return T ** self.p / self.p

    def to_dict(self):
        return {"family": "power", "p": self.p}


@dataclass(frozen=True, eq=False)
class SumOfPowers(YoungFunction):
    """A(t) = c_p t^p + c_q t^q with 1 < p <= q."""

    c_p: float
    p: float
    c_q: float
    q: float
    name = "sum_of_powers"

    def __post_init__(self):
        if not (self.c_p > 0 and self.c_q > 0 and 1 < self.p <= self.q):
            raise InvalidYoungError("sum_of_powers needs c_p, c_q > 0 and 1 < p <= q")

    def _A(self, t):
        return self.c_p * t ** self.p + self.c_q * t ** self.q

    def _a(self, t):
        return self.c_p * self.p * t ** (self.p - 1) + self.c_q * self.q * t ** (self.q - 1)

    def _da(self, t):
        return (self.c_p * self.p * (self.p - 1) * t ** (self.p - 2)
                + self.c_q * self.q * (self.q - 1) * t ** (self.q - 2))

    def radial_energy(self, T):
        T = np.asarray(T, dtype=float)
        return self.c_p * T ** self.p / self.p + self.c_q * T ** self.q / self.q

    def to_dict(self):
        return {"family": "sum_of_powers", "c_p": self.c_p, "p": self.p,
                "c_q": self.c_q, "q": self.q}


@dataclass(frozen=True, eq=False)
class PowerLog(YoungFunction):
    """A(t) = t^p log(1 + t); growth indices lie in [p, p + 1]."""

    p: float
    name = "power_log"

    def __post_init__(self):
        if not self.p > 1:
            raise InvalidYoungError("power_log family needs p > 1")

    def _A(self, t):
        return t ** self.p * np.log1p(t)

    def _a(self, t):
        p = self.p
        return p * t ** (p - 1) * np.log1p(t) + t ** p / (1.0 + t)

    def _da(self, t):
        p = self.p
        return (p * (p - 1) * t ** (p - 2) * np.log1p(t)
                + 2 * p * t ** (p - 1) / (1.0 + t)
                - t ** p / (1.0 + t) ** 2)

    def to_dict(self):
        return {"family": "power_log", "p": self.p}


@dataclass(frozen=True, eq=False)
class Normalized(YoungFunction):
    """``base`` divided by base.A(1), so that A(1) = 1."""

    base: YoungFunction

    @property
    def name(self):
        return self.base.name

    @cached_property
    def _scale(self) -> float:
        return float(self.base._A(np.array(1.0)))

    def _A(self, t):
        return self.base._A(t) / self._scale

    def _a(self, t):
        return self.base._a(t) / self._scale

    def _da(self, t):
        return self.base._da(t) / self._scale

    def radial_energy(self, T):
        return self.base.radial_energy(T) / self._scale

    def to_dict(self):
        return {**self.base.to_dict(), "normalize": True}


@dataclass(frozen=True, eq=False)
class Scaled(YoungFunction):
    """a_R(t) = a(t / R^s), with A_R(t) = R^s A(t / R^s) so that A_R' = a_R."""

    base: YoungFunction
    R: float
    s: float

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError("scaling radius R must be positive")
        if not 0 < self.s < 1:
            raise DomainError("s must lie in (0,1)")

    @property
    def name(self):
        return f"scaled_{self.base.name}"

    @property
    def _k(self) -> float:
        return self.R ** self.s

    def _A(self, t):
        return self._k * self.base._A(t / self._k)

    def _a(self, t):
        return self.base._a(t / self._k)

    def _da(self, t):
        return self.base._da(t / self._k) / self._k

    def radial_energy(self, T):
        return self._k * self.base.radial_energy(np.asarray(T, dtype=float) / self._k)

    def to_dict(self):
        return {"family": "scaled", "base": self.base.to_dict(), "R": self.R, "s": self.s}


def _inverse_increasing(fn: Callable, target: np.ndarray, abs_tol: float,
                        rel_tol: float, max_iter: int = 400) -> np.ndarray:
    """Solve fn(t) = target for t >= 0 with fn increasing, fn(0) = 0."""
    target = np.asarray(target, dtype=float)
    lo = np.zeros_like(target)
    hi = np.ones_like(target)
    for _ in range(2000):
        short = fn(hi) < target
        if not short.any():
            break
        hi = np.where(short, hi * 2.0, hi)
    else:
        raise BracketError(
            f"could not bracket inverse: largest target {target.max():.3g}, "
            f"hi reached {hi.max():.3g}")
    for _ in range(max_iter):
        width = hi - lo
        if np.all((width <= abs_tol) | (width <= rel_tol * hi)):
            break
        mid = 0.5 * (lo + hi)
        below = fn(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class Conjugate(YoungFunction):
    """Numerical complementary function: its derivative is the inverse of a."""

    base: YoungFunction

    @property
    def name(self):
        return f"conjugate_{self.base.name}"

    def _tstar(self, s):
        return _inverse_increasing(self.base._a, s, abs_tol=0.0, rel_tol=1e-14)

    def _A(self, s):
        t = self._tstar(s)
        return s * t - self.base._A(t)

    def _a(self, s):
        return self._tstar(s)

    def _da(self, s):
        return 1.0 / self.base._da(self._tstar(s))

    def to_dict(self):
        return {"family": "conjugate", "base": self.base.to_dict()}


FAMILIES = {
    "power": lambda d: Power(float(d["p"])),
    "sum_of_powers": lambda d: SumOfPowers(float(d.get("c_p", 1.0)), float(d["p"]),
                                           float(d.get("c_q", 1.0)), float(d["q"])),
    "power_log": lambda d: PowerLog(float(d["p"])),
}


def from_config(cfg: dict) -> YoungFunction:
    """Build a family from e.g. ``{"family": "power", "p": 4.0}``."""
    try:
        build = FAMILIES[cfg["family"]]
    except KeyError as exc:
        raise InvalidYoungError(f"unknown Young family {cfg.get('family')!r}") from exc
    yf = build(cfg)
    if cfg.get("normalize", False):
        yf = yf.normalized()
    return yf


# ---------------------------------------------------------------------------
# operations


def evaluate(yf: YoungFunction, which: str, t):
    """Evaluate ``A``, ``a`` or ``a'`` (also spelled ``da``) at t."""
    t = _asarray(t)
    if which == "A":
        return yf.A(t)
    if which == "a":
        return yf.a(t)
    if which in ("a'", "a′", "da"):
        if np.any(t == 0):
            raise DomainError("a' is only evaluated for t != 0")
        return yf.da(t)
    raise DomainError(f"unknown rule {which!r}")


def estimate_indices(yf: YoungFunction, t_min: float = INDEX_T_MIN,
                     t_max: float = INDEX_T_MAX,
                     n_samples: int = INDEX_SAMPLES) -> GrowthIndices:
    if not 0 < t_min < t_max:
        raise DomainError("index grid needs 0 < t_min < t_max")
    if n_samples < 16:
        raise DomainError("index grid needs at least 16 samples")
    t = np.geomspace(t_min, t_max, n_samples)
    A = yf._A(t)
    a = yf._a(t)
    if not (np.all(A > 0) and np.all(np.diff(a) > 0)):
        raise InvalidYoungError(f"{yf.name}: a is not positive and strictly increasing")
    ratio_fn = t * a / A
    h = FD_REL_STEP * t
    d2 = (yf._da(t + h) - yf._da(t - h)) / (2 * h)
    ratio_dd = t * d2 / yf._da(t) + 2.0
    return GrowthIndices(float(ratio_fn.min()), float(ratio_fn.max()),
                         float(ratio_dd.min()), float(ratio_dd.max()))


def complementary(yf: YoungFunction, s):
    """Complementary function value sup_{t>0} (s t - A(t)) for s >= 0."""
    s = _asarray(s)
    if np.any(s < 0):
        raise DomainError("complementary function is evaluated at s >= 0")
    t = _inverse_increasing(yf._a, s, BISECT_ABS_TOL, BISECT_REL_TOL)
    return np.maximum(s * t - yf._A(t), 0.0)


def check_young_inequality(yf: YoungFunction, s, t, tol: float = 1e-8) -> dict:
    s = _asarray(s)
    t = _asarray(t)
    if np.any(s < 0) or np.any(t < 0):
        raise DomainError("Young inequality is checked for s, t >= 0")
    lhs = s * t
    rhs = yf._A(t) + complementary(yf, s)
    scale = np.maximum(1.0, np.abs(rhs))
    holds = lhs <= rhs + 1e-12 * scale
    equality = np.abs(yf._a(t) - s) < tol * np.maximum(1.0, s)
    return {"lhs": lhs, "rhs": rhs, "holds": holds, "equality": equality}


def check_delta2(yf: YoungFunction, t_grid=None) -> dict:
    if t_grid is None:
        t_grid = np.geomspace(INDEX_T_MIN, INDEX_T_MAX, INDEX_SAMPLES)
    t = _asarray(t_grid)
    if np.any(t <= 0):
        raise DomainError("delta2 grid must be positive")
    C = float(np.max(yf._A(2 * t) / yf._A(t)))
    bound = 2.0 ** yf.indices.q_fn
    return {"C_estimate": C, "holds": bool(np.isfinite(C)),
            "bound_2q": bound, "consistent": bool(C <= bound * (1 + 1e-9))}


def _powers(t, p, q):
    return np.minimum(t ** p, t ** q), np.maximum(t ** p, t ** q)


def sandwich_check(yf: YoungFunction, t, indices: GrowthIndices | None = None,
                   rel_tol: float = 1e-8) -> dict:
    """Power-type bounds for A, a and a' at t > 0.

    The bounds presuppose the normalization A(1) = 1.  Margins are
    relative; a negative margin is a violation.
    """
    t = _asarray(t)
    if np.any(t <= 0):
        raise DomainError("sandwich bounds are checked for t > 0")
    ind = indices or yf.indices
    p, q = ind.p, ind.q

    def margins(val, lo, hi):
        return np.minimum(val - lo, hi - val) / np.maximum(np.abs(val), 1e-300)

    lo, hi = _powers(t, p, q)
    m_A = margins(yf._A(t), lo, hi)
    lo, hi = _powers(t, p - 1, q - 1)
    m_a = margins(yf._a(t), p * lo, q * hi)
    lo, hi = _powers(t, p - 2, q - 2)
    m_da = margins(yf._da(t), p * (p - 1) * lo, q * (q - 1) * hi)
    return {"ok_A": bool(np.all(m_A >= -rel_tol)), "ok_a": bool(np.all(m_a >= -rel_tol)),
            "ok_da": bool(np.all(m_da >= -rel_tol)),
            "margin_A": float(m_A.min()), "margin_a": float(m_a.min()),
            "margin_da": float(m_da.min())}


def check_increment_bounds(yf: YoungFunction, pairs: Iterable,
                           indices: GrowthIndices | None = None) -> dict:
    """Increment inequalities for a on ordered pairs (t1, t2).

    ``C_increment`` is the smallest observed (a(t2) - a(t1)) / a(t2 - t1);
    degenerate pairs t1 == t2 are skipped.  The second bound is checked
    with r = t2 - t1, t = t1 and reported as its smallest margin.
    """
    arr = np.sort(np.asarray(list(pairs), dtype=float).reshape(-1, 2), axis=1)
    t1, t2 = arr[:, 0], arr[:, 1]
    ind = indices or yf.indices
    p, q = ind.p, ind.q
    keep = t2 > t1
    num = yf.a(t2[keep]) - yf.a(t1[keep])
    den = yf.a(t2[keep] - t1[keep])
    C = float(np.min(num / den)) if keep.any() else math.inf

    r, t = t2 - t1, t1
    lhs = np.abs(yf.a(r + t) - yf.a(t))
    base = np.abs(r) + np.abs(t)
    with np.errstate(divide="ignore"):
        m = np.where(base > 0, np.maximum(base ** (p - 2), base ** (q - 2)), 0.0)
    rhs = q * (q - 1) * m * np.abs(r)
    margin = float(np.min(rhs - lhs)) if arr.size else math.inf
    return {"C_increment": C, "positive": C > 0,
            "worst_margin_derivative": margin, "derivative_bound_holds": margin >= -1e-12}


def modular(yf: YoungFunction, values, weights) -> float:
    """Sum of A(|u|) against quadrature weights."""
    values = _asarray(values)
    return float(np.sum(np.asarray(weights) * yf._A(np.abs(values))))


def fractional_modular(yf: YoungFunction, values, points, weights, s: float) -> float:
    """Pair sum of A(|D^s u|) dx dy / |x-y|^n, diagonal excluded."""
    values = _asarray(values).reshape(-1)
    pts = np.asarray(points, dtype=float).reshape(values.size, -1)
    w = np.asarray(weights, dtype=float).reshape(-1)
    n = pts.shape[1]
    total = 0.0
    for lo in range(0, values.size, 1024):
        sl = slice(lo, lo + 1024)
        dist = np.linalg.norm(pts[sl, None, :] - pts[None, :, :], axis=-1)
        diag = dist == 0
        dist = np.where(diag, 1.0, dist)
        quot = np.abs(values[sl, None] - values[None, :]) / dist ** s
        term = yf._A(quot) / dist ** n * w[sl, None] * w[None, :]
        total += float(np.sum(np.where(diag, 0.0, term)))
    return total


def luxemburg_norm(yf: YoungFunction, modular_fn: Callable[[float], float],
                   indices: GrowthIndices | None = None,
                   rel_tol: float = BISECT_REL_TOL) -> float:
    """inf{lam > 0 : modular_fn(lam) <= 1}, where modular_fn(lam) = Phi(u / lam).

    The initial bracket comes from the modular/norm sandwich with exponents
    p and q.
    """
    phi1 = float(modular_fn(1.0))
    if not math.isfinite(phi1):
        raise NormInfiniteError("modular is infinite at lambda = 1")
    if phi1 == 0.0:
        return 0.0
    ind = indices or yf.indices
    p, q = ind.p_fn, ind.q_fn
    cands = (phi1 ** (1 / p), phi1 ** (1 / q))
    lo, hi = min(cands) * (1 - 1e-6), max(cands) * (1 + 1e-6)
    for _ in range(200):
        if modular_fn(hi) <= 1.0:
            break
        hi *= 2.0
    else:
        raise NormInfiniteError("modular does not drop below 1")
    for _ in range(200):
        if modular_fn(lo) > 1.0:
            break
        lo *= 0.5
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if modular_fn(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def xi_bounds(t, p: float, q: float):
    """(min{t^p, t^q}, max{t^p, t^q})."""
    t = np.asarray(t, dtype=float)
    return _powers(t, p, q)


def scaled(yf: YoungFunction, R: float, s: float) -> Scaled:
    return Scaled(yf, R, s)


def index_record(yf: YoungFunction) -> dict:
    ind = yf.indices
    return {"family": yf.to_dict(), "p_fn": ind.p_fn, "q_fn": ind.q_fn,
            "p_dd": ind.p_dd, "q_dd": ind.q_dd,
            "delta2_C": check_delta2(yf)["C_estimate"]}
