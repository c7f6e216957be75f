"""Exact continued-fraction arithmetic.

Partial quotients are exact Python integers.  Real quantities such as
``xi_nu = ||q_nu alpha||`` are evaluated from exact convergents and a
high-precision tail value of ``alpha`` in a private mpmath context, so
every function here is safe to call from several threads at once.

Indexing follows the usual convention ``alpha = [a0; a1, a2, ...]`` with
``p_{-1}/q_{-1} = 1/0`` and ``p_0/q_0 = a0/1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import mpmath

from .errors import DomainError, HorizonError, PrecisionError, TruncationError

DEFAULT_PREC = 128

KINDS = ("finite", "prefix", "periodic", "e", "stream")


def mp_context(prec: int) -> mpmath.ctx_mp.MPContext:
    """A private mpmath context with ``prec`` bits of working precision."""
    ctx = mpmath.MPContext()
    ctx.prec = int(prec)
    return ctx


def _e_digit(i: int) -> int:
    return 2 * (i + 1) // 3 if i % 3 == 2 else 1


def _check_digits(digits: Sequence[int]) -> tuple[int, ...]:
    out = tuple(int(d) for d in digits)
    for d in out:
        if d < 1:
            raise DomainError(f"partial quotients must be >= 1, got {d}")
    return out


@dataclass(frozen=True)
class CFExpansion:
    """A continued fraction ``[a0; a1, a2, ...]``.

    ``kind`` selects how digits are produced:

    * ``finite``: a rational number; ``digits`` is the full word, stored
      with last digit >= 2.
    * ``prefix``: the known leading digits of a number whose remaining
      digits are unavailable (data read from a file or a real number).
    * ``periodic``: ``digits`` is the preperiod and ``period`` repeats.
    * ``e``: Euler's number, generated procedurally.
    * ``stream``: ``source(i)`` returns ``a_i`` for ``i >= 1``; used for
      constructed witnesses, which attach their construction to
      ``metadata``.

    Build instances with the classmethods rather than the constructor.
    """

    a0: int = 0
    kind: str = "finite"
    digits: tuple[int, ...] = ()
    period: tuple[int, ...] = ()
    source: Callable[[int], int] | None = field(default=None, compare=False)
    metadata: dict | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown expansion kind {self.kind!r}")
        if self.kind == "periodic" and not self.period:
            raise DomainError("periodic expansion needs a nonempty period")
        if self.kind == "stream" and self.source is None:
            raise DomainError("stream expansion needs a digit source")

    # construction

    @classmethod
    def finite(cls, a0: int, digits: Sequence[int] = ()) -> "CFExpansion":
        """Rational ``[a0; digits]``, normalized so the last digit is >= 2."""
        a0, word = int(a0), list(_check_digits(digits))
        if word and word[-1] == 1:
            word.pop()
            if word:
                word[-1] += 1
            else:
                a0 += 1
        return cls(a0=a0, kind="finite", digits=tuple(word))

    @classmethod
    def from_fraction(cls, value) -> "CFExpansion":
        """Expansion of an exact rational (``Fraction``, int or ``"P/Q"``)."""
        x = Fraction(value)
        a0 = math.floor(x)
        rest, word = x - a0, []
        while rest:
            x = 1 / rest
            a = math.floor(x)
            word.append(a)
            rest = x - a
        return cls.finite(a0, word)

    @classmethod
    def prefix(cls, a0: int, digits: Sequence[int]) -> "CFExpansion":
        """Known leading digits of a number with no further digits available."""
        return cls(a0=int(a0), kind="prefix", digits=_check_digits(digits))

    @classmethod
    def periodic(cls, a0: int, preperiod: Sequence[int], period: Sequence[int]) -> "CFExpansion":
        return cls(a0=int(a0), kind="periodic", digits=_check_digits(preperiod),
                   period=_check_digits(period))

    @classmethod
    def e(cls) -> "CFExpansion":
        """Euler's number ``[2; 1, 2, 1, 1, 4, 1, 1, 6, ...]``."""
        return cls(a0=2, kind="e")

    @classmethod
    def golden(cls) -> "CFExpansion":
        """The golden ratio ``[1; 1, 1, ...]``."""
        return cls.periodic(1, (), (1,))

    @classmethod
    def stream(cls, a0: int, source: Callable[[int], int], metadata: dict | None = None) -> "CFExpansion":
        return cls(a0=int(a0), kind="stream", source=source, metadata=metadata)

    @classmethod
    def from_real(cls, value, prec: int = DEFAULT_PREC) -> "CFExpansion":
        """Digits of a real number that are certified at ``prec`` bits.

        Rationals given as ``Fraction`` or ``int`` are expanded exactly.
        Otherwise a ``prefix`` expansion is returned, holding the digits on
        which evaluations at ``prec`` and ``2*prec`` bits agree.
        """
        if isinstance(value, (Fraction, int)):
            return cls.from_fraction(value)
        runs = []
        for bits in (prec, 2 * prec):
            ctx = mp_context(bits)
            x = ctx.mpf(value) if not isinstance(value, str) else ctx.mpf(value)
            a0 = int(ctx.floor(x))
            rest, word = x - a0, []
            while rest > 0 and len(word) < bits:
                x = 1 / rest
                a = int(ctx.floor(x))
                if a > 2 ** (bits // 4):
                    break
                word.append(a)
                rest = x - a
            runs.append((a0, word))
        (a0, lo), (a0_hi, hi) = runs
        if a0 != a0_hi:
            raise PrecisionError("integer part unstable under precision doubling")
        n = 0
        while n < min(len(lo), len(hi)) and lo[n] == hi[n]:
            n += 1
        # the last agreeing digit can still be off by one; drop it
        return cls.prefix(a0, lo[: max(n - 1, 0)])

    # digit access

    @property
    def length(self) -> int | None:
        """Number of available digits ``a_1, a_2, ...`` or None if unbounded."""
        if self.kind in ("finite", "prefix"):
            return len(self.digits)
        return None

    @property
    def is_rational(self) -> bool:
        return self.kind == "finite"

    @property
    def is_eventually_periodic(self) -> bool:
        return self.kind == "periodic"

    def digit(self, i: int) -> int:
        """The partial quotient ``a_i`` for ``i >= 1`` (``a_0`` for ``i = 0``)."""
        if i == 0:
            return self.a0
        if i < 0:
            raise DomainError("digit index must be >= 0")
        if self.kind in ("finite", "prefix"):
            if i > len(self.digits):
                raise TruncationError(
                    f"expansion has {len(self.digits)} digits, index {i} requested",
                    len(self.digits))
            return self.digits[i - 1]
        if self.kind == "periodic":
            pre = len(self.digits)
            if i <= pre:
                return self.digits[i - 1]
            return self.period[(i - pre - 1) % len(self.period)]
        if self.kind == "e":
            return _e_digit(i)
        return int(self.source(i))

    def prefix_digits(self, n: int) -> tuple[int, ...]:
        """The first ``n`` partial quotients ``(a_1, ..., a_n)``."""
        if self.kind in ("finite", "prefix"):
            if n > len(self.digits):
                raise TruncationError(
                    f"expansion has {len(self.digits)} digits, {n} requested",
                    len(self.digits))
            return self.digits[:n]
        if self.kind == "stream" and hasattr(self.source, "prefix"):
            return tuple(self.source.prefix(n))
        return tuple(self.digit(i) for i in range(1, n + 1))

    def iter_digits(self) -> Iterator[int]:
        i = 1
        while self.length is None or i <= self.length:
            yield self.digit(i)
            i += 1

    def alternate(self) -> tuple[int, ...]:
        """The other representation of a rational: ``(..., a_n - 1, 1)``."""
        if not self.is_rational:
            raise DomainError("only rationals have two representations")
        if not self.digits:
            return (1,) if self.a0 else ()
        return self.digits[:-1] + (self.digits[-1] - 1, 1)

    def value(self, prec: int = DEFAULT_PREC):
        """The number as an mpf of a private context with ``prec`` bits."""
        ctx = mp_context(prec + 16)
        out = self.a0 + 1 / _tails(self, 1, 1, ctx)[0] if self.length != 0 else ctx.mpf(self.a0)
        ctx.prec = prec
        return +out

    def to_json(self) -> dict:
        if self.kind == "stream":
            raise DomainError("streams serialize through their constructor")
        out = {"kind": self.kind, "a0": self.a0}
        if self.kind != "e":
            out["digits"] = list(self.digits)
        if self.kind == "periodic":
            out["period"] = list(self.period)
        return out

    @classmethod
    def from_json(cls, data) -> "CFExpansion":
        if isinstance(data, str):
            data = json.loads(data)
        kind = data.get("kind")
        a0 = int(data.get("a0", 0))
        if kind == "e":
            return cls.e()
        if kind == "finite":
            return cls.finite(a0, data.get("digits", []))
        if kind == "prefix":
            return cls.prefix(a0, data.get("digits", []))
        if kind == "periodic":
            return cls.periodic(a0, data.get("digits", []), data.get("period", []))
        raise DomainError(f"cannot deserialize expansion kind {kind!r}")

    def __str__(self):
        if self.kind == "e":
            return "e"
        if self.kind == "periodic":
            pre = ",".join(map(str, self.digits))
            per = ",".join(map(str, self.period))
            return f"[{self.a0}; {pre + ',' if pre else ''}({per})]"
        if self.kind == "stream":
            label = (self.metadata or {}).get("label", "stream")
            return f"[{self.a0}; <{label}>]"
        return f"[{self.a0}; {','.join(map(str, self.digits))}]"


@dataclass(frozen=True)
class Convergent:
    """``p_nu / q_nu``, the ``nu``-th convergent."""

    p: int
    q: int
    index: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class Cylinder:
    """The set of numbers in [0, 1) whose expansion starts with ``word``.

    The interval is closed at ``p_n/q_n`` and open at the other end;
    ``left < right`` always, and ``parity`` records which end is closed.
    """

    word: tuple[int, ...]
    left: Fraction
    right: Fraction
    parity: str

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    def contains(self, x) -> bool:
        x = Fraction(x)
        if self.parity == "even":
            return self.left <= x < self.right
        return self.left < x <= self.right

    def __contains__(self, x):
        return self.contains(x)


@dataclass(frozen=True)
class ApproxRecord:
    """Approximation data at index ``nu``.

    ``xi = ||q_nu alpha||``, ``alpha = alpha_nu``, ``alpha_next =
    alpha_{nu+1}`` and ``alpha_star = q_{nu-1}/q_nu``.
    """

    nu: int
    p: int
    q: int
    xi: object
    alpha: object
    alpha_next: object
    alpha_star: Fraction

    @property
    def q_prev(self) -> int:
        """``q_{nu-1}``."""
        return int(self.alpha_star * self.q)


@dataclass(frozen=True)
class HorizonExtremum:
    """A limsup or liminf estimated on a finite horizon.

    ``running`` is the extremum over all indices up to ``horizon`` and
    ``tail`` the extremum over the last half of them.
    """

    running: float
    tail: float
    horizon: int


def convergents(x: CFExpansion, n: int) -> list[Convergent]:
    """Convergents ``p_nu/q_nu`` for ``nu = 0, ..., n``."""
    if n < 1:
        raise DomainError("need n >= 1")
    return _convergent_list(x, n)


def _convergent_list(x: CFExpansion, n: int) -> list[Convergent]:
    digits = x.prefix_digits(n)
    out = [Convergent(x.a0, 1, 0)]
    p_prev, q_prev, p, q = 1, 0, x.a0, 1
    for nu, a in enumerate(digits, start=1):
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        out.append(Convergent(p, q, nu))
    return out


def continuant(word: Sequence[int]) -> int:
    """``q_n`` of the word ``(a_1, ..., a_n)``; the empty word gives 1."""
    q_prev, q = 0, 1
    for a in _check_digits(word):
        q_prev, q = q, a * q + q_prev
    return q


def cylinder(word: Sequence[int]) -> Cylinder:
    """The cylinder ``I_n(a_1, ..., a_n)`` with exact endpoints."""
    word = _check_digits(word)
    if not word:
        raise DomainError("cylinder needs a nonempty word")
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for a in word:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
    near = Fraction(p, q)
    far = Fraction(p + p_prev, q + q_prev)
    if len(word) % 2 == 0:
        return Cylinder(word, near, far, "even")
    return Cylinder(word, far, near, "odd")


def _tails(x: CFExpansion, first: int, last: int, ctx) -> list:
    """``alpha_nu = [a_nu; a_{nu+1}, ...]`` for ``nu = first..last``.

    Extends the backward recurrence ``alpha_nu = a_nu + 1/alpha_{nu+1}``
    far enough that the neglected tail is below the context precision.
    """
    n_avail = x.length
    if n_avail is not None and last > n_avail:
        raise TruncationError(
            f"alpha_{last} needs {last} digits, expansion has {n_avail}", n_avail)
    bound = 2 ** (ctx.prec + 16)
    k, c_prev, c = last, 0, 1
    exact = False
    while True:
        if n_avail is not None and k >= n_avail:
            exact = x.kind == "finite"
            break
        if c * c > bound:
            break
        k += 1
        c_prev, c = c, x.digit(k) * c + c_prev
    if n_avail is not None and k >= n_avail and not exact and c * c <= bound:
        raise TruncationError(
            f"digit prefix of length {n_avail} is too short for {ctx.prec}-bit tails", n_avail)
    alpha = ctx.mpf(x.digit(k))
    values = []
    for nu in range(k, first - 1, -1):
        if nu < k:
            alpha = x.digit(nu) + 1 / alpha
        if nu <= last:
            values.append(alpha)
    values.reverse()
    return values


def _records(x: CFExpansion, n: int, prec: int) -> list[ApproxRecord]:
    ctx = mp_context(prec)
    convs = _convergent_list(x, n)
    tails = _tails(x, 1, n + 1, ctx)
    out, q_prev = [], 0
    for c in convs:
        nu = c.index
        alpha_next = tails[nu]
        alpha = tails[nu - 1] if nu >= 1 else x.a0 + 1 / tails[0]
        xi = 1 / (c.q * alpha_next + q_prev)
        out.append(ApproxRecord(nu, c.p, c.q, xi, alpha, alpha_next, Fraction(q_prev, c.q)))
        q_prev = c.q
    return out


def _agree(a, b, prec: int) -> bool:
    ctx = mp_context(2 * prec)
    a, b = ctx.mpf(a), ctx.mpf(b)
    scale = max(abs(a), abs(b), ctx.mpf(2) ** -prec)
    return abs(a - b) <= scale * ctx.mpf(2) ** (8 - prec)


def approximation_records(x: CFExpansion, n: int, prec: int = DEFAULT_PREC) -> list[ApproxRecord]:
    """Records for ``nu = 0..n``, verified against a doubled-precision run."""
    if x.is_rational and n + 1 > x.length:
        raise TruncationError(f"rational has {x.length} digits; records need n+1", x.length)
    lo = _records(x, n, prec)
    hi = _records(x, n, 2 * prec)
    for r_lo, r_hi in zip(lo, hi):
        if not _agree(r_lo.xi, r_hi.xi, prec):
            raise PrecisionError(f"xi_{r_lo.nu} unstable under precision doubling")
    return lo


def best_index(x: CFExpansion, t) -> int:
    """Largest ``nu`` with ``q_nu <= t`` (for ``t >= 1``).

    For a rational, returns the last index once ``t >= q_last``.
    """
    if t < 1:
        raise DomainError("t must be >= 1")
    q_prev, q, nu = 0, 1, 0
    while True:
        if x.length is not None and nu >= x.length:
            if x.is_rational:
                return nu
            raise TruncationError(f"cannot locate q_nu <= {t} < q_nu+1", x.length)
        q_next = x.digit(nu + 1) * q + q_prev
        if q_next > t:
            return nu
        q_prev, q, nu = q, q_next, nu + 1


def psi(x: CFExpansion, t, prec: int = DEFAULT_PREC):
    """Irrationality measure ``psi_alpha(t) = min_{1 <= q <= t} ||q alpha||``.

    Evaluated by Perron's formula ``xi_nu = 1/(q_nu (alpha_{nu+1} +
    alpha_nu^*))`` for the index with ``q_nu <= t < q_{nu+1}``.
    """
    nu = best_index(x, t)
    if x.is_rational and nu == x.length:
        return mp_context(prec).mpf(0)
    return approximation_records(x, nu, prec)[nu].xi


def dirichlet_constant_cf(x: CFExpansion, horizon: int, prec: int = DEFAULT_PREC) -> HorizonExtremum:
    """Estimate ``d(alpha) = limsup 1/(1 + alpha_{nu+1}^{-1} alpha_nu^*)``."""
    if horizon < 8:
        raise DomainError("horizon must be >= 8")
    recs = approximation_records(x, horizon, prec)
    vals = [float(r.q * r.alpha_next / (r.q * r.alpha_next + r.q_prev)) for r in recs[1:]]
    return HorizonExtremum(max(vals), max(vals[horizon // 2 - 1:]), horizon)


def lagrange_constant_cf(x: CFExpansion, horizon: int, prec: int = DEFAULT_PREC) -> HorizonExtremum:
    """Estimate ``lambda(alpha) = liminf 1/(alpha_{nu+1} + alpha_nu^*)``."""
    if horizon < 8:
        raise DomainError("horizon must be >= 8")
    recs = approximation_records(x, horizon, prec)
    vals = [float(r.q * r.xi) for r in recs[1:]]
    return HorizonExtremum(min(vals), min(vals[horizon // 2 - 1:]), horizon)


def horizon_check(x: CFExpansion, n: int) -> None:
    """Raise ``HorizonError`` unless ``x`` has at least ``n`` digits."""
    if x.length is not None and x.length < n:
        raise HorizonError(f"expansion has {x.length} digits, {n} needed")
