"""L_p norms, critical lattices of the unit L_p ball and related constants.

A lattice of determinant ``Delta_p`` is critical for the unit ball of
``F_p(x, y) = (|x|^p + |y|^p)^{1/p}`` when no nonzero lattice point lies in
the open ball.  Up to symmetry, the critical lattices come in the
families below, written as 2x2 matrices whose columns ``z1, z2`` lie on
the unit sphere:

* ``L1``, ``L1PRIME`` for ``2 < p < p0``, built on ``x0 = (1 - 2^-p)^(1/p)``;
* ``L2PLUS``, ``L2MINUS`` for ``p`` in ``(1, 2)`` or above ``p0``, built on
  ``sigma_p``, the root of ``sigma^p + (1 + sigma)^p = 2``;
* ``L3PLUS(a)``, ``L3MINUS(a)`` for ``p = 1`` with ``a`` in ``[0, 1/2)``;
* ``L4PLUS(phi)``, ``L4MINUS(phi)`` for ``p = 2`` with ``phi`` in ``[0, pi/6]``.

``p0`` is where the determinants of the first two families coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cf import DEFAULT_PREC, mp_context
from .errors import DomainError

INF = math.inf
P_MAX = 64.0
P0_TOL = 1e-9

FAMILIES = ("L1", "L1PRIME", "L2PLUS", "L2MINUS", "L3PLUS", "L3MINUS", "L4PLUS", "L4MINUS")


def _check_p(p, allow_inf=True):
    p = float(p)
    if math.isnan(p) or p < 1 or (p == INF and not allow_inf):
        raise DomainError(f"p must lie in [1, {'inf]' if allow_inf else 'inf)'}, got {p}")
    return p


def norm_eval(p, point) -> float:
    """``F_p(x, y)``; the sup norm for ``p = inf``."""
    p = _check_p(p)
    x, y = abs(float(point[0])), abs(float(point[1]))
    m = max(x, y)
    if p == INF or m == 0.0:
        return m
    if p == 1.0:
        return x + y
    return m * ((x / m) ** p + (y / m) ** p) ** (1.0 / p)


def norm_array(p, x, y):
    """Vectorized ``F_p`` over numpy arrays of coordinates."""
    x, y = np.abs(np.asarray(x, float)), np.abs(np.asarray(y, float))
    if p == INF:
        return np.maximum(x, y)
    if p == 1.0:
        return x + y
    m = np.maximum(x, y)
    safe = np.where(m > 0, m, 1.0)
    return np.where(m > 0, safe * ((x / safe) ** p + (y / safe) ** p) ** (1.0 / p), 0.0)


def bisect(f, lo, hi, tol, max_iter=2000):
    """Root of ``f`` on ``[lo, hi]`` by plain bisection.

    Works with floats and mpf values; ``f(lo)`` and ``f(hi)`` must have
    opposite signs.  Stops when ``hi - lo <= tol`` or the midpoint stops
    moving.
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise RuntimeError(f"bisection bracket [{lo}, {hi}] has no sign change")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = (lo + hi) / 2
        if mid == lo or mid == hi:
            break
        f_mid = f(mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return (lo + hi) / 2


def _sigma_root(pp, ctx):
    """Root of ``s^p + (1+s)^p = 2`` in ``ctx``: float bisection, then Newton, bisection as fallback."""
    p = float(pp)
    g = lambda u: u ** p + (1 + u) ** p - 2  # noqa: E731
    start = bisect(g, 0.0, 1.0, 1e-15)
    f = lambda u: u ** pp + (1 + u) ** pp - 2  # noqa: E731
    df = lambda u: pp * (u ** (pp - 1) + (1 + u) ** (pp - 1))  # noqa: E731
    tol = ctx.mpf(2) ** -(ctx.prec - 4)
    try:
        root = ctx.findroot(f, ctx.mpf(start), solver="newton", df=df, tol=tol ** 2)
        if 0 < root < 1 and abs(f(root)) <= tol:
            return root
    except (ValueError, ZeroDivisionError):
        pass
    return bisect(f, ctx.mpf(0), ctx.mpf(1), tol)


def sigma_high(p, prec: int = DEFAULT_PREC):
    """``sigma_p`` as an mpf with ``prec`` bits."""
    p = _check_p(p, allow_inf=False)
    ctx = mp_context(prec + 8)
    root = _sigma_root(ctx.mpf(p), ctx)
    ctx.prec = prec
    return +root


def sigma(p) -> float:
    """Root in ``(0, 1)`` of ``sigma^p + (1 + sigma)^p = 2``."""
    return float(sigma_high(p, 64))


def g_residual(s, p) -> float:
    """``sigma^p + (1 + sigma)^p - 2`` evaluated at 64 bits."""
    ctx = mp_context(64)
    s, p = ctx.mpf(s), ctx.mpf(p)
    return float(s ** p + (1 + s) ** p - 2)


def h_inverse(s, p_max: float = P_MAX) -> float:
    """The exponent ``p`` with ``sigma_p = s``; decreasing in ``s``."""
    s = float(s)
    lo_s, hi_s = sigma(p_max), 0.5
    if not lo_s <= s <= hi_s:
        raise DomainError(f"sigma={s} is outside the attainable range [{lo_s}, {hi_s}]")
    ctx = mp_context(96)
    ss = ctx.mpf(s)
    return float(bisect(lambda p: ss ** p + (1 + ss) ** p - 2, ctx.mpf(1), ctx.mpf(p_max),
                        ctx.mpf(2) ** -60))


def x0(p) -> float:
    """First coordinate of the columns of ``L1``: ``(1 - 2^-p)^(1/p)``."""
    p = _check_p(p, allow_inf=False)
    return (1.0 - 2.0 ** -p) ** (1.0 / p)


def _det_gap(p, ctx):
    """``det L1 - det L2`` at exponent ``p`` in context ``ctx``."""
    s = _sigma_root(p, ctx)
    d1 = (1 - ctx.mpf(2) ** -p) ** (1 / p)
    d2 = (1 + 2 * s) / ctx.mpf(2) ** (2 / p)
    return d1 - d2


@lru_cache(maxsize=None)
def p_zero(tolerance: float = 1e-12, prec: int = DEFAULT_PREC) -> float:
    """Exponent in ``(2.5, 2.7)`` where ``det L1 = det L2``."""
    if tolerance < 1e-12:
        raise DomainError("tolerance must be >= 1e-12")
    ctx = mp_context(prec)
    root = bisect(lambda p: _det_gap(p, ctx), ctx.mpf("2.5"), ctx.mpf("2.7"), ctx.mpf(tolerance) / 4)
    return float(root)


def is_p0(p) -> bool:
    return abs(float(p) - p_zero()) <= P0_TOL


@dataclass(frozen=True)
class CriticalLattice:
    """A critical lattice of the unit ``L_p`` ball, columns ``z1, z2``."""

    family: str
    p: float
    omega: tuple[tuple[float, float], tuple[float, float]]
    param: float | None = None

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.omega, dtype=float)

    @property
    def z1(self) -> np.ndarray:
        return self.matrix[:, 0]

    @property
    def z2(self) -> np.ndarray:
        return self.matrix[:, 1]

    @property
    def det(self) -> float:
        return abs(float(np.linalg.det(self.matrix)))

    def boundary_points(self) -> list[np.ndarray]:
        """Lattice points on the unit sphere, one of each ``±`` pair."""
        z1, z2 = self.z1, self.z2
        pts = [z1, z2]
        if self.family == "L1":
            pts.append(z2 - z1)
        else:
            pts.append(z1 + z2)
        if self.family.startswith("L3") and self.param == 0.0:
            pts.append(2 * z2 + z1)
        return pts

    def normalized(self) -> np.ndarray:
        """The matrix scaled to determinant ``±1``."""
        return self.matrix / math.sqrt(self.det)

    @property
    def alpha(self) -> float:
        return alpha_of(self.matrix)

    @property
    def alpha_star(self) -> float:
        return alpha_star_of(self.matrix)


def _lattice(family, p, rows, param=None):
    (a, b), (c, d) = rows
    return CriticalLattice(family, float(p), ((float(a), float(b)), (float(c), float(d))), param)


def lattice_l1(p) -> CriticalLattice:
    x = x0(p)
    return _lattice("L1", p, ((x, x), (-0.5, 0.5)))


def lattice_l1prime(p) -> CriticalLattice:
    x = x0(p)
    return _lattice("L1PRIME", p, ((0.5, 0.5), (-x, x)))


def lattice_l2(p, sign: int = 1) -> CriticalLattice:
    s, c = sigma(p), 2.0 ** (1.0 / p)
    return _lattice("L2PLUS" if sign > 0 else "L2MINUS", p,
                    ((s / c, 1 / c), (-sign * (1 + s) / c, sign / c)))


def lattice_l3(a, sign: int = 1) -> CriticalLattice:
    a = float(a)
    if not 0.0 <= a < 0.5:
        raise DomainError("L3 parameter a must lie in [0, 1/2)")
    return _lattice("L3PLUS" if sign > 0 else "L3MINUS", 1.0,
                    ((a, 0.5), (sign * (a - 1), sign * 0.5)), a)


def lattice_l4(phi, sign: int = 1) -> CriticalLattice:
    phi = float(phi)
    if not -1e-15 <= phi <= math.pi / 6 + 1e-15:
        raise DomainError("L4 parameter phi must lie in [0, pi/6]")
    return _lattice("L4PLUS" if sign > 0 else "L4MINUS", 2.0,
                    ((math.sin(phi), math.cos(math.pi / 6 + phi)),
                     (sign * math.cos(phi), -sign * math.sin(math.pi / 6 + phi))), phi)


def catalog(p, samples: int = 100) -> tuple[CriticalLattice, ...]:
    """Critical lattices for exponent ``p``.

    For ``p = 1`` and ``p = 2`` the one-parameter families are sampled on
    ``samples`` evenly spaced parameters per sign.
    """
    p = _check_p(p, allow_inf=False)
    if p == 1.0:
        grid = [0.5 * k / samples for k in range(samples)]
        return tuple(lattice_l3(a, s) for s in (1, -1) for a in grid)
    if p == 2.0:
        grid = [math.pi / 6 * k / (samples - 1) for k in range(samples)]
        return tuple(lattice_l4(f, s) for s in (1, -1) for f in grid)
    pair1 = (lattice_l1(p), lattice_l1prime(p)) if p > 2.0 else ()
    pair2 = (lattice_l2(p, 1), lattice_l2(p, -1))
    if is_p0(p):
        return pair1 + pair2
    return pair1 if 2.0 < p < p_zero() else pair2


def alpha_of(omega) -> float:
    """``alpha = -y1/y2`` for columns ``z1 = (x1, y1)``, ``z2 = (x2, y2)``.

    A zero denominator gives ``inf``.
    """
    m = np.asarray(omega, float)
    return INF if m[1, 1] == 0 else -m[1, 0] / m[1, 1]


def alpha_star_of(omega) -> float:
    """``alpha* = x1/x2`` for columns ``z1 = (x1, y1)``, ``z2 = (x2, y2)``."""
    m = np.asarray(omega, float)
    return INF if m[0, 1] == 0 else m[0, 0] / m[0, 1]


def critical_determinant(p) -> float:
    """``Delta_p``, the critical determinant of the unit ``L_p`` ball."""
    p = _check_p(p)
    if p == INF:
        return 1.0
    if p == 1.0:
        return 0.5
    if p == 2.0:
        return math.sqrt(3.0) / 2
    if 2.0 < p < p_zero():
        return x0(p)
    s = sigma(p)
    return (1 + 2 * s) / 2.0 ** (2.0 / p)


def dirichlet_bound(p) -> float:
    """``1/sqrt(Delta_p)``, the largest possible Dirichlet constant."""
    return 1.0 / math.sqrt(critical_determinant(p))


@dataclass(frozen=True)
class CriticalConstants:
    p: float
    sigma: float | None
    delta: float
    p0: float
    dirichlet_bound: float

    def to_json(self) -> dict:
        return {"p": self.p, "sigma": self.sigma, "delta": self.delta,
                "p0": self.p0, "dirichlet_bound": self.dirichlet_bound}


def constants(p) -> CriticalConstants:
    p = _check_p(p)
    s = None if p == INF else sigma(p)
    return CriticalConstants(p, s, critical_determinant(p), p_zero(), dirichlet_bound(p))
