"""The lattice flow ``Lambda_alpha(t) = G_t A_alpha Z^2`` and its minima.

A lattice vector with integer coordinates ``(q, p)`` sits at
``(q/t, t (p - q alpha))``.  Its second coordinate does not depend on
``t`` apart from the factor ``t``, so ``y = p - q alpha`` is computed
once at high precision and every later evaluation is in floats with
full relative accuracy.

Successive minima are found by Euclidean Gauss reduction followed by a
bounded enumeration.  The bound uses ``F_2 <= sqrt(2) F_p`` and, for a
reduced basis ``b1, b2``, ``|m b1 + n b2| >= |n| |b2| sqrt(3)/2``.
"""

from __future__ import annotations

import bisect as _bisect
import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .cf import DEFAULT_PREC, CFExpansion, Convergent, _convergent_list, mp_context
from .errors import DomainError, HorizonError, PreconditionError, ResourceError
from .lp import INF, bisect, catalog, critical_determinant, norm_array, norm_eval

SQRT2 = math.sqrt(2.0)
ENUM_LIMIT = 10 ** 6
GRID_RATIO = 1.02
CROSSING_RTOL = 1e-10


def _canonical(v):
    q, p = v
    return (q, p) if q > 0 or (q == 0 and p > 0) else (-q, -p)


@dataclass(frozen=True)
class LatticeBasis:
    """Two basis vectors (columns) of a planar lattice.

    ``frame`` holds integer ``(q, p)`` coordinates of the columns when the
    lattice is a member of the flow; ``alpha`` and ``t`` record where it
    came from.
    """

    b1: tuple
    b2: tuple
    frame: tuple | None = None
    alpha: object = None
    t: object = None

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[float(self.b1[0]), float(self.b2[0])],
                         [float(self.b1[1]), float(self.b2[1])]])

    @property
    def det(self):
        return self.b1[0] * self.b2[1] - self.b1[1] * self.b2[0]

    @classmethod
    def from_matrix(cls, m) -> "LatticeBasis":
        m = np.asarray(m, float)
        return cls((m[0, 0], m[1, 0]), (m[0, 1], m[1, 1]))


@dataclass(frozen=True)
class MinimaSample:
    """First and second minima at time ``t`` and vectors achieving them."""

    t: float
    lambda1: float
    lambda2: float
    v1: tuple
    v2: tuple


@dataclass(frozen=True)
class Crossing:
    """A time where ``lambda1 = lambda2``, achieved by ``v1`` and ``v2``."""

    t: float
    lambda1: float
    lambda2: float
    v1: tuple
    v2: tuple


@dataclass(frozen=True)
class FlowEstimate:
    """Critical times of the flow and the resulting Dirichlet estimate.

    ``d_estimate`` is the largest ``lambda1`` over the last half of the
    crossings and ``d_global`` the largest over all of them.
    """

    p: float
    t_max: float
    crossings: tuple
    d_estimate: float
    d_global: float
    delta: float
    rational: bool = False
    trace: tuple = field(default=(), compare=False)

    @property
    def critical_times(self) -> list[float]:
        return [c.t for c in self.crossings]

    @property
    def values(self) -> list[float]:
        return [c.lambda1 for c in self.crossings]

    @property
    def delta_estimate(self) -> float:
        return self.delta * self.d_estimate ** 2

    @property
    def bound(self) -> float:
        return 1.0 / math.sqrt(self.delta)

    def to_json(self) -> dict:
        return {
            "p": "inf" if self.p == INF else self.p,
            "t_max": self.t_max,
            "crossings": len(self.crossings),
            "d_estimate": self.d_estimate,
            "d_global": self.d_global,
            "delta_estimate": self.delta_estimate,
            "bound": self.bound,
            "rational": self.rational,
            "critical_times": self.critical_times,
            "values": self.values,
        }


@dataclass(frozen=True)
class BestApproxPoint:
    """``z_nu = (q_nu, p_nu - q_nu alpha)`` in ``Lambda_alpha(1)``."""

    nu: int
    q: int
    p: int
    y: object


# reduction and enumeration


def gauss_reduce(b1, b2, frame=None):
    """Lagrange-Gauss reduction in the Euclidean metric.

    Works for float or mpf coordinates.  Returns ``(b1, b2, frame)`` with
    ``|b1| <= |b2|`` and ``|<b1, b2>| <= |b1|^2 / 2``; ``frame`` follows the
    same integer operations.
    """
    (x1, y1), (x2, y2) = b1, b2
    f1, f2 = frame if frame is not None else ((1, 0), (0, 1))
    n1, n2 = x1 * x1 + y1 * y1, x2 * x2 + y2 * y2
    if n2 < n1:
        x1, y1, x2, y2, n1, n2, f1, f2 = x2, y2, x1, y1, n2, n1, f2, f1
    for _ in range(10000):
        mu = int(round((x1 * x2 + y1 * y2) / n1))
        if mu:
            x2, y2 = x2 - mu * x1, y2 - mu * y1
            f2 = (f2[0] - mu * f1[0], f2[1] - mu * f1[1])
            n2 = x2 * x2 + y2 * y2
        if n2 >= n1:
            break
        x1, y1, x2, y2, n1, n2, f1, f2 = x2, y2, x1, y1, n2, n1, f2, f1
    return (x1, y1), (x2, y2), (f1, f2)


def _row_argmin(f, lo, hi):
    """Integer minimizer of a convex ``f`` on ``[lo, hi]``."""
    while hi - lo > 2:
        m1 = lo + (hi - lo) // 3
        m2 = hi - (hi - lo) // 3
        if f(m1) <= f(m2):
            hi = m2 - 1 if f(m1) < f(m2) else m2
        else:
            lo = m1 + 1
    return min(range(lo, hi + 1), key=f)


def _minima_coeffs(p, b1, b2):
    """Successive minima of the lattice spanned by the reduced ``b1, b2``.

    Returns ``(lambda1, (m1, n1), lambda2, (m2, n2))`` with coefficients
    relative to ``b1, b2``.
    """
    x1, y1 = b1
    x2, y2 = b2
    len1, len2 = math.hypot(x1, y1), math.hypot(x2, y2)
    F = (lambda x, y: max(abs(x), abs(y))) if p == INF else (lambda x, y: norm_eval(p, (x, y)))
    bound = max(F(x1, y1), F(x2, y2))
    n_max = int(SQRT2 * bound / (len2 * math.sqrt(3.0) / 2)) + 1
    width = int(SQRT2 * bound / len1) + 2
    if n_max > ENUM_LIMIT or width > ENUM_LIMIT:
        raise ResourceError(f"enumeration bound {max(n_max, width)} exceeds {ENUM_LIMIT}")
    mu = (x1 * x2 + y1 * y2) / (len1 * len1)
    cands = {(1, 0): F(x1, y1), (2, 0): 2 * F(x1, y1)}
    for n in range(1, n_max + 1):
        def f(m, n=n):
            return F(m * x1 + n * x2, m * y1 + n * y2)
        centre = int(round(-n * mu))
        m_star = _row_argmin(f, centre - width, centre + width)
        for m in range(m_star - 2, m_star + 3):
            cands[(m, n)] = f(m)
    ordered = sorted(cands.items(), key=lambda kv: kv[1])
    (c1, l1) = ordered[0]
    for c2, l2 in ordered[1:]:
        if c1[0] * c2[1] - c1[1] * c2[0] != 0:
            return l1, c1, l2, c2
    raise RuntimeError("enumeration found no independent vector")


def _combine(frame, coeff):
    (a, b), (c, d) = frame
    m, n = coeff
    return (m * a + n * c, m * b + n * d)


def lattice_at(alpha, t, prec: int = DEFAULT_PREC) -> LatticeBasis:
    """``G_t A_alpha Z^2`` with columns ``(1/t, -t alpha)`` and ``(0, t)``."""
    if t < 1:
        raise DomainError("t must be >= 1")
    bits = max(int(prec), 2 * int(math.log2(float(t)) + 1) + 64)
    ctx = mp_context(bits)
    a = alpha.value(bits) if isinstance(alpha, CFExpansion) else alpha
    a, tt = ctx.mpf(a), ctx.mpf(t)
    return LatticeBasis((1 / tt, -tt * a), (ctx.mpf(0), tt), ((1, 0), (0, 1)), a, t)


def successive_minima(p, basis: LatticeBasis) -> MinimaSample:
    """``lambda1, lambda2`` of the ``L_p`` unit ball for ``basis``.

    ``v1, v2`` are integer coordinates in ``basis.frame`` (or relative to
    the given columns when no frame is attached), sign-normalized.
    """
    p = float(p)
    if abs(float(basis.det)) - 1 > 1e-6 or abs(float(basis.det)) < 1e-12:
        raise PreconditionError("successive_minima expects a unimodular basis")
    r1, r2, frame = gauss_reduce(basis.b1, basis.b2, basis.frame)
    f1 = (float(r1[0]), float(r1[1]))
    f2 = (float(r2[0]), float(r2[1]))
    l1, c1, l2, c2 = _minima_coeffs(p, f1, f2)
    v1, v2 = _canonical(_combine(frame, c1)), _canonical(_combine(frame, c2))
    t = float(basis.t) if basis.t is not None else 1.0
    return MinimaSample(t, l1, l2, v1, v2)


# the flow along a continued fraction


class _Flow:
    """Flow state for one expansion: convergents and exact ``y`` values."""

    def __init__(self, x: CFExpansion, p: float, t_max: float, prec: int):
        self.x, self.p, self.t_max = x, p, t_max
        target = 8 * t_max * t_max + 8
        n = 8
        while True:
            if x.length is not None and n >= x.length:
                n = x.length
                break
            if _convergent_list(x, n)[-1].q > target:
                break
            n *= 2
        self.convs = [Convergent(0, 1, -1)] + _convergent_list(x, n)
        self.qs = [c.q for c in self.convs]
        bits = max(prec, 2 * int(math.log2(target) + 1) + 96)
        self.ctx = mp_context(bits)
        q_last = self.convs[-1]
        self.alpha = (self.ctx.mpf(q_last.p) / q_last.q if x.is_rational
                      else x.value(bits))
        self.rational = x.is_rational
        self._y = {}

    def y(self, v):
        y = self._y.get(v)
        if y is None:
            q, p = v
            y = float(p - q * self.alpha)
            self._y[v] = y
        return y

    def F(self, v, t):
        q = v[0]
        x, y = q / t, t * self.y(v)
        if self.p == INF:
            return max(abs(x), abs(y))
        return norm_eval(self.p, (x, y))

    def basis(self, t):
        nu = _bisect.bisect_right(self.qs, t) - 1
        if nu + 1 >= len(self.convs):
            if not self.rational:
                raise HorizonError(f"convergents exhausted at t={t}")
            nu = len(self.convs) - 2
        c, d = self.convs[nu], self.convs[nu + 1]
        u, w = (c.q, c.p), (d.q, d.p)
        return ((u[0] / t, t * self.y(u)), (w[0] / t, t * self.y(w)), (u, w))

    def minima(self, t) -> MinimaSample:
        b1, b2, frame = self.basis(t)
        r1, r2, frame = gauss_reduce(b1, b2, frame)
        _, c1, _, c2 = _minima_coeffs(self.p, r1, r2)
        v1, v2 = _canonical(_combine(frame, c1)), _canonical(_combine(frame, c2))
        return MinimaSample(t, self.F(v1, t), self.F(v2, t), v1, v2)

    def refine(self, lo, hi, a, b, depth=0):
        """Crossings between ``lo`` and ``hi`` where ``a`` hands over to ``b``."""
        def h(s):
            t = math.exp(s)
            return self.F(a, t) - self.F(b, t)

        s_lo, s_hi = math.log(lo), math.log(hi)
        if not (h(s_lo) <= 0 <= h(s_hi)):
            return []
        s = bisect(h, s_lo, s_hi, CROSSING_RTOL / 4)
        t = math.exp(s)
        sample = self.minima(t)
        level = min(self.F(a, t), self.F(b, t))
        if sample.lambda1 < level * (1 - 1e-9) and depth < 12:
            c = sample.v1
            if c not in (a, b):
                return self.refine(lo, t, a, c, depth + 1) + self.refine(t, hi, c, b, depth + 1)
        return [Crossing(t, level, max(self.F(a, t), self.F(b, t)), a, b)]

    def scan(self, t_min, t_max, ratio, k_lo=0, k_hi=None):
        """Walk grid points ``k_lo..k_hi`` of ``_grid(t_min, t_max, ratio)``."""
        grid = _grid(t_min, t_max, ratio)
        k_hi = len(grid) - 1 if k_hi is None else k_hi
        crossings, trace = [], []
        prev = None
        for t in grid[k_lo:k_hi + 1]:
            sample = self.minima(t)
            trace.append(sample)
            if prev is not None and sample.v1 != prev.v1:
                crossings.extend(self.refine(prev.t, t, prev.v1, sample.v1))
            if self.rational and sample.lambda1 < 1e-6:
                break
            prev = sample
        return crossings, trace


def _grid(t_min, t_max, ratio):
    # computed by powers, not repeated products, so chunks see identical points
    n = max(1, math.ceil(math.log(t_max / t_min) / math.log(ratio) - 1e-12))
    return [min(t_min * ratio ** k, t_max) for k in range(n)] + [t_max]


def _scan_chunk(args):
    x, p, t_min, t_max, prec, ratio, k_lo, k_hi = args
    return _Flow(x, p, t_max, prec).scan(t_min, t_max, ratio, k_lo, k_hi)


def _as_expansion(alpha, prec):
    if isinstance(alpha, CFExpansion):
        return alpha
    return CFExpansion.from_real(alpha, max(prec, 256))


def critical_times(alpha, p, t_max, t_min: float = 1.0, ratio: float = GRID_RATIO,
                   prec: int = DEFAULT_PREC, workers: int = 1) -> FlowEstimate:
    """Scan the flow on a geometric grid and locate all crossings.

    ``alpha`` is a ``CFExpansion`` or a real number (expanded to the
    digits certified at ``prec`` bits).  Each change of the minimal
    vector between grid points is refined by bisection to relative
    accuracy ``1e-10``.  With ``workers > 1`` disjoint ``t``-ranges are
    scanned in separate processes and merged.
    """
    p = float(p)
    if t_max < 4:
        raise DomainError("t_max must be >= 4")
    if not 1 < ratio <= GRID_RATIO:
        raise DomainError(f"grid ratio must lie in (1, {GRID_RATIO}]")
    x = _as_expansion(alpha, prec)
    delta = critical_determinant(p)
    if workers > 1:
        last = len(_grid(t_min, t_max, ratio)) - 1
        edges = [last * k // workers for k in range(workers + 1)]
        jobs = [(x, p, t_min, t_max, prec, ratio, edges[k], edges[k + 1]) for k in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_scan_chunk, jobs))
        crossings, trace = [], []
        for c, tr in parts:
            crossings.extend(c)
            trace.extend(tr)
    else:
        crossings, trace = _Flow(x, p, t_max, prec).scan(t_min, t_max, ratio)
    crossings = sorted({round(c.t, 12): c for c in crossings}.values(), key=lambda c: c.t)
    trace = sorted({s.t: s for s in trace}.values(), key=lambda s: s.t)
    if x.is_rational:
        return FlowEstimate(p, t_max, tuple(crossings), 0.0,
                            max((c.lambda1 for c in crossings), default=0.0), delta, True,
                            tuple(trace))
    if len(crossings) < 4:
        raise HorizonError(f"only {len(crossings)} crossings below t_max={t_max}")
    vals = [c.lambda1 for c in crossings]
    tail = vals[len(vals) // 2:]
    return FlowEstimate(p, t_max, tuple(crossings), max(tail), max(vals), delta, False,
                        tuple(trace))


def best_approx_points(x: CFExpansion, n: int, prec: int = DEFAULT_PREC) -> list[BestApproxPoint]:
    """``z_nu`` for ``nu = 1..n``."""
    from .cf import approximation_records

    if n < 1:
        raise DomainError("need n >= 1")
    recs = approximation_records(x, n, prec)
    return [BestApproxPoint(r.nu, r.q, r.p, (-1) ** (r.nu + 1) * r.xi) for r in recs[1:]]


def rectangle_empty_check(alpha, z1, z2, prec: int = DEFAULT_PREC) -> bool:
    """Whether the rectangle ``0 <= x <= x2, |y| <= |y1|`` holds no lattice
    point of ``Lambda_alpha(1)`` other than ``0``, ``z1`` and ``z2``.

    ``z1, z2`` are integer ``(q, p)`` pairs; the rectangle is closed, so a
    further point on its boundary counts as a violation.  Rationals are
    handled in exact arithmetic; when ``z2`` hits a rational exactly,
    points on the horizontal edges are tolerated.
    """
    if isinstance(alpha, CFExpansion) and alpha.is_rational:
        last = _convergent_list(alpha, alpha.length)[-1]
        alpha = Fraction(last.p, last.q)
    if isinstance(alpha, (Fraction, int)):
        a = Fraction(alpha)
        floor, ceil = math.floor, math.ceil
    else:
        ctx = mp_context(prec)
        a = ctx.mpf(alpha.value(prec) if isinstance(alpha, CFExpansion) else alpha)
        floor, ceil = (lambda v: int(ctx.floor(v))), (lambda v: int(ctx.ceil(v)))
    z1, z2 = tuple(map(int, z1)), tuple(map(int, z2))
    y1, y2 = z1[1] - z1[0] * a, z2[1] - z2[0] * a
    if not (0 < z1[0] < z2[0] and abs(y2) < abs(y1)):
        raise PreconditionError("need 0 < x1 < x2 and |y2| < |y1|")
    h = abs(y1)
    # an exact rational hit ties with the other representation's convergent
    tie_ok = isinstance(a, Fraction) and y2 == 0
    for q in range(0, z2[0] + 1):
        for pp in range(ceil(q * a - h), floor(q * a + h) + 1):
            if (q, pp) in ((0, 0), z1, z2):
                continue
            if tie_ok and abs(pp - q * a) == h:
                continue
            return False
    return True


# distance to the critical locus


def _short_bases(m, slack=0.3):
    """Near-reduced bases of the lattice with basis matrix ``m``."""
    b1 = (m[0, 0], m[1, 0])
    b2 = (m[0, 1], m[1, 1])
    r1, r2, _ = gauss_reduce(b1, b2)
    r1, r2 = np.array(r1), np.array(r2)
    cap = np.linalg.norm(r2) * (1 + slack)
    vecs, coeffs = [], []
    for i in range(-3, 4):
        for j in range(-3, 4):
            if (i, j) == (0, 0):
                continue
            v = i * r1 + j * r2
            if np.linalg.norm(v) <= cap:
                vecs.append(v)
                coeffs.append((i, j))
    out = []
    for a in range(len(vecs)):
        for b in range(len(vecs)):
            (i, j), (k, l) = coeffs[a], coeffs[b]
            if abs(i * l - j * k) == 1:
                out.append(np.column_stack([vecs[a], vecs[b]]))
    return np.array(out)


@lru_cache(maxsize=32)
def _catalog_reps(p, samples):
    reps = []
    for lat in catalog(p, samples):
        m = lat.normalized()
        r1, r2, _ = gauss_reduce((m[0, 0], m[1, 0]), (m[0, 1], m[1, 1]))
        reps.append(np.column_stack([r1, r2]))
    return np.array(reps)


def locus_distance(basis, p, samples: int = 100) -> float:
    """Distance from a unimodular lattice to the normalized critical locus.

    Minimum, over critical lattices scaled to determinant one and over
    near-reduced bases of the input (all sign and order choices), of the
    largest entry of the difference of basis matrices.
    """
    m = basis.matrix if isinstance(basis, LatticeBasis) else np.asarray(basis, float)
    if abs(abs(np.linalg.det(m)) - 1) > 1e-6:
        raise PreconditionError("locus_distance expects a unimodular basis")
    p = float(p)
    if p == INF:
        raise DomainError("no finite critical catalog for p = inf")
    ours = _short_bases(m)
    reps = _catalog_reps(p, samples)
    diff = np.abs(ours[:, None, :, :] - reps[None, :, :, :]).max(axis=(2, 3))
    return float(diff.min())


def flow_basis(x: CFExpansion, t, prec: int = DEFAULT_PREC) -> LatticeBasis:
    """A float basis of ``Lambda_alpha(t)`` built from convergent points."""
    fl = _Flow(x, INF, max(float(t), 4.0), prec)
    b1, b2, frame = fl.basis(t)
    return LatticeBasis(b1, b2, frame, None, t)


def write_trace_csv(estimate: FlowEstimate, path, x: CFExpansion | None = None,
                    with_locus: bool = True, prec: int = DEFAULT_PREC) -> None:
    """Write grid samples and crossings as CSV rows, sorted by ``t``.

    ``locus_distance`` is filled when ``x`` is given and ``p`` is finite.
    """
    rows = [(s.t, s.lambda1, s.lambda2, 0, s.v1, s.v2) for s in estimate.trace]
    rows += [(c.t, c.lambda1, c.lambda2, 1, c.v1, c.v2) for c in estimate.crossings]
    rows.sort(key=lambda r: r[0])
    locus = with_locus and x is not None and estimate.p != INF
    fl = _Flow(x, estimate.p, estimate.t_max, prec) if locus else None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "lambda1", "lambda2", "is_crossing", "locus_distance"])
        for t, l1, l2, flag, v1, v2 in rows:
            dist = ""
            if fl is not None:
                b1, b2, _ = fl.basis(t)
                dist = f"{locus_distance(LatticeBasis(b1, b2).matrix, estimate.p):.15g}"
            w.writerow([f"{t:.15g}", f"{l1:.15g}", f"{l2:.15g}", flag, dist])


def crossing_locus_distances(x: CFExpansion, estimate: FlowEstimate, prec: int = DEFAULT_PREC) -> list[float]:
    """``locus_distance`` of the flow lattice at every crossing."""
    fl = _Flow(x, estimate.p, estimate.t_max, prec)
    out = []
    for c in estimate.crossings:
        b1, b2, _ = fl.basis(c.t)
        out.append(locus_distance(LatticeBasis(b1, b2).matrix, estimate.p))
    return out
