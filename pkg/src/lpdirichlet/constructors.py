"""Witness constructions: digit insertion maps and the BA_W(eps) family.

The insertion map ``S'`` places a word ``A_i`` at emitted positions
``n_i .. n_i + len(A_i) - 1`` and fills every other position with the
base digits in order; its inverse ``P'`` deletes those positions again.
Preset schedules produce numbers in ``DI_p \\ BA``, ``DI_1 \\ DI_2`` and
``DI_2 \\ DI_1``; ``ba_w`` builds badly approximable numbers that contain
a prescribed sequence of words.
"""

from __future__ import annotations

import bisect as _bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .cf import CFExpansion, mp_context
from .classifier import (DECIDED_IMPROVABLE, DECIDED_NON_IMPROVABLE, classify,
                         regime_of)
from .errors import DomainError, HorizonError, PreconditionError
from .lp import INF

LABELS = ("di-minus-ba", "di1-minus-di2", "di2-minus-di1", "ba-w")


# schedules


@dataclass(frozen=True)
class PowersOfTwo:
    """``n_i = 2^(i + offset)`` for ``i >= 1``."""

    offset: int = 0

    def __call__(self, i: int) -> int:
        return 2 ** (i + self.offset)


@dataclass(frozen=True)
class Explicit:
    """A finite schedule given as a list; ``None`` past its end."""

    values: tuple

    def __call__(self, i: int):
        return self.values[i - 1] if i <= len(self.values) else None


@dataclass(frozen=True)
class IndexWord:
    """``A_i = (i)``."""

    def __call__(self, i: int, n: int) -> tuple[int, ...]:
        return (i,)


@dataclass(frozen=True)
class SandwichWord:
    """``A_i = (left, i, right)``."""

    left: int = 2
    right: int = 4

    def __call__(self, i: int, n: int) -> tuple[int, ...]:
        return (self.left, i, self.right)


@dataclass(frozen=True)
class FlankedWord:
    """``A_i = (n_i, *core, n_i + 1)``."""

    core: tuple[int, ...]

    def __call__(self, i: int, n: int) -> tuple[int, ...]:
        return (n,) + tuple(self.core) + (n + 1,)


@dataclass(frozen=True)
class InsertionSchedule:
    """Insertion positions ``n_i`` and words ``A_i``.

    ``positions(i)`` and ``words(i, n_i)`` are called for ``i >= 1``; a
    ``None`` position ends the schedule.  Blocks must not overlap.  With
    ``lemma_mode`` the length condition of the Hölder lemma is enforced
    as ``len(A_i) < n_{i+1} - n_i``, so at least one base digit separates
    consecutive blocks (the reversed inequality would force overlaps).
    """

    positions: Callable[[int], int | None]
    words: Callable[[int, int], Sequence[int]]
    lemma_mode: bool = False

    @classmethod
    def explicit(cls, positions: Sequence[int], words: Sequence[Sequence[int]],
                 lemma_mode: bool = False) -> "InsertionSchedule":
        if len(positions) != len(words):
            raise DomainError("need one word per position")
        sched = cls(Explicit(tuple(positions)),
                    _ExplicitWords(tuple(tuple(w) for w in words)), lemma_mode)
        sched.blocks(max(positions, default=1) + max((len(w) for w in words), default=1))
        return sched

    def blocks(self, horizon: int) -> list[tuple[int, tuple[int, ...]]]:
        """``(n_i, A_i)`` for every block starting at or before ``horizon``."""
        out = []
        i = 1
        while True:
            n = self.positions(i)
            if n is None or n > horizon:
                break
            w = tuple(int(a) for a in self.words(i, n))
            if not w or min(w) < 1:
                raise DomainError(f"word A_{i} must be non-empty with digits >= 1")
            if out:
                prev_n, prev_w = out[-1]
                if n <= prev_n:
                    raise DomainError("positions n_i must strictly increase")
                if n < prev_n + len(prev_w):
                    raise DomainError(f"block {i} overlaps block {i - 1}")
                if self.lemma_mode and not len(prev_w) < n - prev_n:
                    raise PreconditionError(
                        f"length condition fails at i={i - 1}: "
                        f"{len(prev_w)} >= {n - prev_n}")
            if n < 1:
                raise DomainError("positions must be >= 1")
            out.append((n, w))
            i += 1
        return out

    def to_json(self, horizon: int) -> dict:
        bl = self.blocks(horizon)
        return {"offsets": [n for n, _ in bl], "words": [list(w) for _, w in bl],
                "lemma_mode": self.lemma_mode}


@dataclass(frozen=True)
class _ExplicitWords:
    values: tuple

    def __call__(self, i: int, n: int):
        return self.values[i - 1]


# witness streams


@dataclass
class WitnessStream:
    """The image ``S'(base)`` of a base expansion under a schedule.

    Digits are computed lazily with random access; ``prefix(n)`` returns
    the first ``n`` emitted digits.  ``metadata`` carries the target-set
    label and the verdicts known by construction.
    """

    base: CFExpansion
    schedule: InsertionSchedule
    label: str
    metadata: dict = field(default_factory=dict)
    _blocks: list = field(default_factory=list, repr=False)
    _horizon: int = field(default=0, repr=False)

    def _ensure(self, n: int):
        if n > self._horizon:
            horizon = max(n, 2 * self._horizon, 64)
            self._blocks = self.schedule.blocks(horizon)
            self._starts = [b[0] for b in self._blocks]
            self._before = [0]
            for _, w in self._blocks:
                self._before.append(self._before[-1] + len(w))
            self._horizon = horizon

    def __call__(self, i: int) -> int:
        """Emitted digit ``b_i`` for ``i >= 1``."""
        self._ensure(i)
        k = _bisect.bisect_right(self._starts, i)
        if k:
            n, w = self._blocks[k - 1]
            if i < n + len(w):
                return w[i - n]
        return self.base.digit(i - self._before[k])

    def prefix(self, n: int) -> list[int]:
        self._ensure(n)
        out, j = [], 1
        pos = 1
        for start, w in self._blocks:
            if start > n:
                break
            while pos < start:
                out.append(self.base.digit(j))
                j += 1
                pos += 1
            out.extend(w)
            pos += len(w)
        while pos <= n:
            out.append(self.base.digit(j))
            j += 1
            pos += 1
        return out[:n]

    def inserted_mask(self, n: int) -> np.ndarray:
        """Boolean mask of inserted positions among ``1..n`` (index 0 is position 1)."""
        self._ensure(n)
        mask = np.zeros(n, dtype=bool)
        for start, w in self._blocks:
            if start > n:
                break
            mask[start - 1:min(n, start - 1 + len(w))] = True
        return mask

    def omega(self, n: int) -> int:
        """Number of inserted positions among the first ``n``."""
        if n < 0:
            raise HorizonError("n must be >= 0")
        return int(self.inserted_mask(n).sum()) if n else 0

    def as_expansion(self) -> CFExpansion:
        meta = dict(self.metadata)
        meta["label"] = self.label
        return CFExpansion.stream(self.base.a0, self, meta)

    def to_json(self, n: int) -> dict:
        return {"label": self.label, "schedule": self.schedule.to_json(n),
                "base": _base_json(self.base), "digits_prefix": self.prefix(n),
                "construction": self.metadata.get("construction"),
                "decisions": self.metadata.get("decisions", [])}


def _base_json(base: CFExpansion):
    if base.kind == "stream":
        return {"kind": "stream", "label": (base.metadata or {}).get("label")}
    return base.to_json()


def insert_map(base: CFExpansion, schedule: InsertionSchedule, label: str = "custom",
               metadata: dict | None = None) -> WitnessStream:
    """``S'(base)``: insert ``A_i`` at emitted position ``n_i`` for every ``i``."""
    if base.length is not None:
        raise DomainError("the base must be an infinite expansion")
    schedule.blocks(4096)
    return WitnessStream(base, schedule, label, dict(metadata or {}))


def extract_base(digits: Sequence[int], schedule: InsertionSchedule) -> list[int]:
    """``P'``: delete the scheduled positions from an emitted prefix."""
    n = len(digits)
    keep = np.ones(n, dtype=bool)
    for start, w in schedule.blocks(n):
        keep[start - 1:min(n, start - 1 + len(w))] = False
    return [d for d, k in zip(digits, keep) if k]


def omega(stream: WitnessStream, n: int) -> int:
    return stream.omega(n)


# presets


ALL_ONES = CFExpansion.periodic(0, (), (1,))


def _is_bounded(base: CFExpansion) -> bool:
    if base.kind == "periodic":
        return True
    return base.kind == "stream" and bool((base.metadata or {}).get("bounded"))


def _gate(base: CFExpansion, p) -> None:
    if not _is_bounded(base):
        raise PreconditionError("base must be an eventually periodic or bounded-digit stream")
    v = classify(base, p)
    if not v.improvable:
        raise PreconditionError(f"base is not improvable at p={p}: {v.justification}")


def _p_json(p):
    return "inf" if p == INF else float(p)


def witness_di_minus_ba(p, base: CFExpansion = ALL_ONES, offset: int | None = None) -> WitnessStream:
    """A number in ``DI_p`` with unbounded partial quotients.

    Single digits ``A_i = (i)`` go to ``n_i = 2^(i + offset)`` (default
    offset 0); when ``sigma_p`` is rational the words are ``(2, i, 4)``
    with default offset 3.
    """
    p = float(p)
    if p == INF:
        raise PreconditionError("DI_inf contains no irrational number outside BA")
    regime = regime_of(p)
    _gate(base, p)
    if regime.sigma_rational:
        words, default = SandwichWord(2, 4), 3
    else:
        words, default = IndexWord(), 0
    off = default if offset is None else int(offset)
    sched = InsertionSchedule(PowersOfTwo(off), words)
    meta = {
        "construction": {"label": "di-minus-ba", "p": _p_json(p), "offset": off,
                         "base": _base_json(base)},
        "decisions": [
            {"p": _p_json(p), "status": DECIDED_IMPROVABLE,
             "reason": "inserted digits grow and are spaced ever further apart"},
            {"tag": "P_EQ_INF", "status": DECIDED_NON_IMPROVABLE,
             "reason": "inserted digits are unbounded"},
        ],
    }
    return insert_map(base, sched, "di-minus-ba", meta)


def _exponent_pair_preset(label, core, base, offset, keep_tag, leave_tag, reason_keep, reason_leave):
    for q, tag in ((1.0, "P_EQ_1"), (2.0, "P_EQ_2")):
        if tag == keep_tag:
            _gate(base, q)
    sched = InsertionSchedule(PowersOfTwo(offset), FlankedWord(core))
    meta = {
        "construction": {"label": label, "offset": offset, "base": _base_json(base)},
        "decisions": [
            {"tag": keep_tag, "status": DECIDED_IMPROVABLE, "reason": reason_keep},
            {"tag": leave_tag, "status": DECIDED_NON_IMPROVABLE, "reason": reason_leave},
            {"tag": "P_EQ_INF", "status": DECIDED_NON_IMPROVABLE,
             "reason": "inserted flanks are unbounded"},
        ],
    }
    return insert_map(base, sched, label, meta)


def witness_di1_minus_di2(base: CFExpansion = ALL_ONES, offset: int = 3) -> WitnessStream:
    """``A_i = (n_i, 3, 2, 1, 3, 4, n_i + 1)`` at ``n_i = 2^(i + offset)``.

    The core realizes ``beta* = 4/3``, ``beta = 9/4`` with product 3.
    """
    return _exponent_pair_preset(
        "di1-minus-di2", (3, 2, 1, 3, 4), base, offset, "P_EQ_1", "P_EQ_2",
        "no almost symmetric pattern can use strictly growing flanks",
        "x,3,2,1,3,4,y recurs with growing flanks and beta*beta_star = 3")


def witness_di2_minus_di1(base: CFExpansion = ALL_ONES, offset: int = 3) -> WitnessStream:
    """``A_i = (n_i, 1, 1, 1, 2, n_i + 1)`` at ``n_i = 2^(i + offset)``."""
    return _exponent_pair_preset(
        "di2-minus-di1", (1, 1, 1, 2), base, offset, "P_EQ_2", "P_EQ_1",
        "the inserted windows give beta = beta_star = 1, product 1",
        "x,1,1,1,2,y recurs with growing flanks")


def witness_from_json(data: dict) -> WitnessStream:
    """Rebuild a preset witness from its ``construction`` record."""
    c = data.get("construction") or {}
    label = c.get("label", data.get("label"))
    base_json = c.get("base") or data.get("base")
    if not base_json or base_json.get("kind") == "stream":
        raise DomainError("cannot rebuild a witness over a stream base")
    base = CFExpansion.from_json(base_json)
    if label == "di-minus-ba":
        p = c["p"]
        return witness_di_minus_ba(INF if p == "inf" else float(p), base, c.get("offset"))
    if label == "di1-minus-di2":
        return witness_di1_minus_di2(base, c.get("offset", 3))
    if label == "di2-minus-di1":
        return witness_di2_minus_di1(base, c.get("offset", 3))
    raise DomainError(f"no preset witness named {label!r}")


# BA_W(eps)


def _ceil_guarded(f: Callable, prec: int = 128) -> int:
    """``ceil(f(ctx))`` with a doubled-precision recheck near integers."""
    for bits in (prec, 2 * prec, 4 * prec):
        ctx = mp_context(bits)
        v = f(ctx)
        if abs(v - ctx.nint(v)) > 1e-12:
            return int(ctx.ceil(v))
    ctx = mp_context(4 * prec)
    v = f(ctx)
    if abs(v - ctx.nint(v)) < ctx.mpf(2) ** (-3 * prec):
        return int(ctx.nint(v))
    return int(ctx.ceil(v))


@dataclass(frozen=True)
class BAWParameters:
    """Parameters of ``BA_W(eps)`` for a periodic list of words.

    ``word_starts[t]`` is the emitted position of the first digit of word
    ``t + 1``; ``n`` is the recurrence ``n_1 = 1, n_{t+1} = n_t + r_t +
    nu_{t+1} + 1`` exactly as stated for the construction.
    """

    epsilon: float
    words: tuple[tuple[int, ...], ...]
    M: int
    Q: tuple[int, ...]
    nu: tuple[int, ...]
    n: tuple[int, ...]
    word_starts: tuple[int, ...]
    chain: tuple[dict, ...]

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "words": [list(w) for w in self.words], "M": self.M,
                "Q": list(self.Q), "nu": list(self.nu), "n": list(self.n),
                "word_starts": list(self.word_starts), "chain": list(self.chain)}


def _check_epsilon(epsilon):
    eps = float(epsilon)
    if not 0 < eps < 1:
        raise DomainError("epsilon must lie in (0, 1)")
    return eps


def _check_words(words):
    out = tuple(tuple(int(a) for a in w) for w in words)
    if not out:
        raise DomainError("need at least one word")
    if any(a < 1 for w in out for a in w):
        raise DomainError("word digits must be >= 1")
    return out


def ba_w_parameters(epsilon, words: Sequence[Sequence[int]]) -> BAWParameters:
    """``M``, ``Q_t``, ``nu_t`` and the inequality chain for each word."""
    eps = _check_epsilon(epsilon)
    words = _check_words(words)
    e = Fraction(eps)
    M = _ceil_guarded(lambda ctx: 8 / (ctx.mpf(e.numerator) / e.denominator * ctx.log(2)))
    Q, nu, chain = [], [], []
    for w in words:
        q = math.prod((a + 1) ** 2 for a in w)
        if q == 1:
            v = 0
        else:
            v = _ceil_guarded(lambda ctx: 2 * ctx.log(q) / (ctx.mpf(e.numerator) / e.denominator * ctx.log(2)))
        Q.append(q)
        nu.append(v)
        ctx = mp_context(128)
        lhs = ctx.mpf(1) - ctx.mpf(2) / M
        mid = ctx.power(2, ctx.mpf(eps) / 2)
        rhs = ctx.power(q, ctx.mpf(1) / v) if v else ctx.mpf(1)
        used = ctx.power(2, ctx.mpf(eps)) * lhs
        chain.append({"one_minus_2_over_M": float(lhs), "two_pow_half_eps": float(mid),
                      "Q_pow_inv_nu": float(rhs), "two_pow_eps_times_lhs": float(used),
                      "printed_first_holds": bool(lhs >= mid), "second_holds": bool(mid >= rhs),
                      "used_holds": bool(used >= rhs)})
    n = [1]
    for t in range(1, len(words)):
        n.append(n[-1] + len(words[t - 1]) + nu[t] + 1)
    starts, pos = [], 0
    for t, w in enumerate(words):
        pos += nu[t]
        starts.append(pos + 1)
        pos += len(w)
    return BAWParameters(eps, words, M, tuple(Q), tuple(nu), tuple(n), tuple(starts), tuple(chain))


@dataclass
class BAWStream:
    """A sample of ``BA_W(eps)``: free blocks of length ``nu_t`` with digits in
    ``[1, M]`` drawn from a seeded generator, each followed by word ``t``.
    With ``cycle`` the word list repeats forever.
    """

    params: BAWParameters
    seed: int = 0
    cycle: bool = True
    _digits: list = field(default_factory=list, repr=False)
    _free: list = field(default_factory=list, repr=False)
    _rng: object = field(default=None, repr=False)
    _t: int = field(default=0, repr=False)

    def __post_init__(self):
        self._rng = np.random.default_rng(self.seed)

    def _extend(self, n: int):
        P = self.params
        while len(self._digits) < n:
            k = len(P.words)
            if self._t >= k and not self.cycle:
                raise HorizonError(f"stream ends after {len(self._digits)} digits")
            t = self._t % k
            block = self._rng.integers(1, P.M + 1, size=P.nu[t]).tolist()
            self._free.extend([True] * len(block) + [False] * len(P.words[t]))
            self._digits.extend(block)
            self._digits.extend(P.words[t])
            self._t += 1

    def __call__(self, i: int) -> int:
        self._extend(i)
        return self._digits[i - 1]

    def prefix(self, n: int) -> list[int]:
        self._extend(n)
        return self._digits[:n]

    def free_mask(self, n: int) -> list[bool]:
        self._extend(n)
        return self._free[:n]

    def as_expansion(self) -> CFExpansion:
        meta = {"label": "ba-w", "bounded": True,
                "construction": {"label": "ba-w", "epsilon": self.params.epsilon,
                                 "words": [list(w) for w in self.params.words],
                                 "seed": self.seed, "cycle": self.cycle},
                "decisions": [{"tag": "P_EQ_INF", "status": DECIDED_IMPROVABLE,
                               "reason": "all partial quotients are bounded by max(M, words)"}]}
        return CFExpansion.stream(0, self, meta)


def ba_w(epsilon, words: Sequence[Sequence[int]], seed: int = 0, cycle: bool = True):
    """Parameters and a sample stream of ``BA_W(eps)``."""
    params = ba_w_parameters(epsilon, words)
    return params, BAWStream(params, seed, cycle)


@dataclass(frozen=True)
class GoodConditionReport:
    """Running product of the lower-bound factors ``F(n)``.

    ``running`` holds the product after each position as floats; the
    comparisons with 1 are made exactly.  ``stays_from`` is the first
    index after which the product never drops below 1 within the horizon
    (None if it ends below 1), ``failure`` the last index where it was
    below 1.
    """

    horizon: int
    running: tuple[float, ...]
    stays_from: int | None
    failure: int | None
    period_length: int

    def to_json(self) -> dict:
        return {"horizon": self.horizon, "stays_from": self.stays_from, "failure": self.failure,
                "period_length": self.period_length, "final": self.running[-1] if self.running else 1.0}


def good_condition_check(epsilon, words: Sequence[Sequence[int]], horizon: int) -> GoodConditionReport:
    """Evaluate ``prod_{k <= n} F(k)`` for ``n <= horizon`` with the words cycled.

    ``F`` is ``Q^(1/nu)`` on a free block and ``1/(b + 1)^2`` on each
    digit ``b`` of the following word.  Within a period the product is
    ``Q^(k/nu)`` after ``k`` free digits and ``Q / prod (b + 1)^2`` inside
    the word, since each full period multiplies it by exactly 1.
    """
    eps = _check_epsilon(epsilon)
    words = tuple(tuple(int(a) for a in w) for w in words)
    if any(a < 1 for w in words for a in w):
        raise DomainError("word digits must be >= 1")
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    if not any(words):
        return GoodConditionReport(horizon, (1.0,) * horizon, 1, None, 0)
    P = ba_w_parameters(eps, [w for w in words if w])
    running, below = [], []
    n, t = 0, 0
    while n < horizon:
        k = t % len(P.words)
        q, v, w = P.Q[k], P.nu[k], P.words[k]
        for j in range(1, v + 1):
            if n >= horizon:
                break
            n += 1
            running.append(q ** (j / v))
        exact = Fraction(q)
        for b in w:
            if n >= horizon:
                break
            n += 1
            exact /= (b + 1) ** 2
            running.append(float(exact))
            if exact < 1:
                below.append(n)
        t += 1
    failure = below[-1] if below else None
    stays = 1 if failure is None else (failure + 1 if failure < horizon else None)
    period = sum(P.nu) + sum(len(w) for w in P.words)
    return GoodConditionReport(horizon, tuple(running), stays, failure, period)
