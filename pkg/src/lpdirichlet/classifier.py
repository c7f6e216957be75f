"""Pattern criteria for Dirichlet improvability with respect to L_p norms.

A number is non-improvable exactly when its partial quotients contain,
infinitely often, one of a small family of restricted patterns whose
shape depends on ``p``:

* ``2 < p < p0``: ``x,1,1,y`` or ``x,2,y`` with ``min(x, y) -> inf``;
* ``p`` in ``(1, 2)`` or above ``p0``: palindromes ``s_nu..s_1,1,s_1..s_nu``
  built from the digits of ``sigma_p = [0; s_1, s_2, ...]`` (flanked by
  growing ``x, y`` when ``sigma_p`` is rational);
* ``p = 1``: almost symmetric words ``b_nu..b_1,1,1,b_1+1,b_2..b_nu`` (and
  the mirror form), their flanked finite versions, and the two short
  flanked words above;
* ``p = 2``: the short flanked words, or windows ``..., b*_0+1, 1, b_0+1,
  ...`` around a central 1 with ``beta * beta* = 3``;
* ``p = p0``: the union of the first two lists;
* ``p = inf``: unbounded partial quotients.

``scan`` measures these patterns on a finite prefix and ``classify``
turns the measurements, plus structural facts about the input class,
into a verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cf import CFExpansion, mp_context
from .errors import DomainError
from .lp import INF, is_p0, p_zero, sigma_high

R_MIN = 5
SIGMA_DIGITS = 40
SIGMA_PREC = 256
CENTRAL_DEPTH = 16
PRECISION_CAP = 1e15

DECIDED_IMPROVABLE = "DECIDED_IMPROVABLE"
DECIDED_NON_IMPROVABLE = "DECIDED_NON_IMPROVABLE"
EVIDENCE_IMPROVABLE = "EVIDENCE_IMPROVABLE"
EVIDENCE_NON_IMPROVABLE = "EVIDENCE_NON_IMPROVABLE"

FLANKED_FIXED = "FLANKED_FIXED"
PALINDROMIC_GROWING = "PALINDROMIC_GROWING"
CENTRAL_PRODUCT = "CENTRAL_PRODUCT"
UNBOUNDED_DIGITS = "UNBOUNDED_DIGITS"

TAGS = ("P_EQ_1", "OPEN_1_2", "P_EQ_2", "OPEN_2_P0", "P_EQ_P0", "ABOVE_P0", "P_EQ_INF")


@dataclass(frozen=True)
class Regime:
    """Which pattern criterion applies at exponent ``p``.

    ``sigma_digits`` are the digits of ``sigma_p`` that agree between two
    evaluations at different precision; ``sigma_rational`` is a
    heuristic (None when it cannot be guessed).
    """

    tag: str
    p: float
    p0: float
    sigma: float | None = None
    sigma_digits: tuple[int, ...] = ()
    sigma_rational: bool | None = None

    @property
    def sigma_cap(self) -> int:
        return len(self.sigma_digits)

    def to_json(self) -> dict:
        return {"tag": self.tag, "p": "inf" if self.p == INF else self.p, "p0": self.p0,
                "sigma": self.sigma, "sigma_digits": list(self.sigma_digits),
                "sigma_rational": self.sigma_rational}


def _digits_of(value, ctx, limit):
    """Continued-fraction digits of ``value`` in ``(0, 1)``.

    Stops early when the remainder vanishes at the working precision,
    which is reported as termination.
    """
    out, rest = [], value
    for _ in range(limit):
        if rest <= ctx.mpf(2) ** (-ctx.prec // 2):
            return out, True
        x = 1 / rest
        a = int(ctx.floor(x))
        if a > 2 ** (ctx.prec // 4):
            return out, True
        out.append(a)
        rest = x - a
    return out, False


def sigma_digits(p, length: int = SIGMA_DIGITS, prec: int = SIGMA_PREC):
    """Reliable digits of ``sigma_p`` and a rationality guess.

    Returns ``(digits, rational)`` where ``digits`` is the common prefix
    of runs at ``prec`` and ``2*prec`` bits.
    """
    runs = []
    for bits in (prec, 2 * prec):
        ctx = mp_context(bits)
        runs.append(_digits_of(ctx.mpf(sigma_high(p, bits)), ctx, length + 2))
    (lo, lo_end), (hi, hi_end) = runs
    n = 0
    while n < min(len(lo), len(hi)) and lo[n] == hi[n]:
        n += 1
    if lo_end and hi_end and lo == hi:
        return tuple(lo), True
    return tuple(lo[: min(n, length)]), False


def regime_of(p, length: int = SIGMA_DIGITS) -> Regime:
    """The regime tag for ``p``, with ``sigma_p`` digits where they matter."""
    p = float(p)
    if math.isnan(p) or p < 1:
        raise DomainError(f"p must lie in [1, inf], got {p}")
    p0 = p_zero()
    if p == INF:
        return Regime("P_EQ_INF", p, p0)
    if p == 1.0:
        return Regime("P_EQ_1", p, p0)
    if p == 2.0:
        return Regime("P_EQ_2", p, p0)
    if 2.0 < p and not is_p0(p) and p < p0:
        return Regime("OPEN_2_P0", p, p0)
    digits, rational = sigma_digits(p, length)
    s = float(sigma_high(p, 64))
    if is_p0(p):
        return Regime("P_EQ_P0", p, p0, s, digits, None)
    tag = "OPEN_1_2" if p < 2.0 else "ABOVE_P0"
    return Regime(tag, p, p0, s, digits, rational)


@dataclass(frozen=True)
class PatternSpec:
    """One restricted-pattern family.

    ``core`` is the fixed word for ``FLANKED_FIXED`` (empty for the
    wildcard family of flanked almost-symmetric words) and the digits of
    ``sigma_p`` for the palindromic family.
    """

    kind: str
    family: str
    core: tuple[int, ...] = ()
    tolerance: float = 0.0

    def core_at(self, nu: int) -> tuple[int, ...]:
        """The palindromic core ``s_nu..s_1, 1, s_1..s_nu``."""
        half = self.core[:nu]
        return tuple(reversed(half)) + (1,) + half

    def to_json(self) -> dict:
        return {"kind": self.kind, "family": self.family, "core": list(self.core),
                "tolerance": self.tolerance}


X11Y = PatternSpec(FLANKED_FIXED, "x11y", (1, 1))
X2Y = PatternSpec(FLANKED_FIXED, "x2y", (2,))
ASYM = PatternSpec(PALINDROMIC_GROWING, "almost-symmetric")
ASYM_FLANKED = PatternSpec(FLANKED_FIXED, "almost-symmetric-flanked")
CENTRAL = PatternSpec(CENTRAL_PRODUCT, "central-product", (), 1e-3)
UNBOUNDED = PatternSpec(UNBOUNDED_DIGITS, "unbounded")


def sigma_flanked_cores(s: tuple[int, ...]) -> list[tuple[int, ...]]:
    """The four cores for rational ``sigma = [0; s_1..s_k]`` with ``s_k >= 2``."""
    if not s or s[-1] < 2:
        raise DomainError("need a rational sigma whose last digit is >= 2")
    half = tuple(s)
    alt = half[:-1] + (half[-1] - 1, 1)
    left = (tuple(reversed(half)), tuple(reversed(alt)))
    right = (half, alt)
    return [l + (1,) + r for l in left for r in right]


def patterns_for(regime: Regime) -> frozenset[PatternSpec]:
    """The pattern families whose infinite occurrence means non-improvable."""
    tag = regime.tag
    if tag == "P_EQ_INF":
        return frozenset({UNBOUNDED})
    if tag == "OPEN_2_P0":
        return frozenset({X11Y, X2Y})
    if tag == "P_EQ_1":
        return frozenset({X11Y, X2Y, ASYM, ASYM_FLANKED})
    if tag == "P_EQ_2":
        return frozenset({X11Y, X2Y, CENTRAL})
    out = set()
    if regime.sigma_rational is not False and regime.sigma_digits and regime.sigma_digits[-1] >= 2:
        cores = sigma_flanked_cores(regime.sigma_digits)
        out |= {PatternSpec(FLANKED_FIXED, f"sigma-flanked-{i + 1}", c) for i, c in enumerate(cores)}
    if regime.sigma_rational is not True:
        out.add(PatternSpec(PALINDROMIC_GROWING, "sigma-palindrome", regime.sigma_digits))
    if tag == "P_EQ_P0":
        out |= {X11Y, X2Y}
    return frozenset(out)


# scanning


@dataclass
class PatternStats:
    """Measurements of one pattern family on a prefix.

    ``records`` is the strictly increasing sequence of record values (of
    ``min(x, y)`` for flanked words, of ``nu`` for growing families, of
    ``1/residual`` for central windows, of the digit itself for the
    unbounded detector) and ``record_positions`` where they occurred.
    """

    spec: PatternSpec
    positions: list = field(default_factory=list)
    records: list = field(default_factory=list)
    record_positions: list = field(default_factory=list)
    max_nu: int = 0
    cap: int | None = None
    windows: list = field(default_factory=list)
    best_core: tuple | None = None

    def _offer(self, pos, value):
        if not self.records or value > self.records[-1]:
            self.records.append(value)
            self.record_positions.append(pos)

    def present(self, r_min: float = R_MIN) -> bool:
        """At least three records with the last one at least ``r_min``."""
        return len(self.records) >= 3 and self.records[-1] >= r_min

    def to_json(self) -> dict:
        out = {"family": self.spec.family, "kind": self.spec.kind,
               "occurrences": len(self.positions), "records": list(self.records),
               "record_positions": list(self.record_positions)}
        if self.spec.kind in (PALINDROMIC_GROWING,):
            out["max_nu"] = self.max_nu
            out["cap"] = self.cap
        if self.spec.kind == CENTRAL_PRODUCT:
            out["windows"] = [{"position": c, "beta": float(b), "beta_star": float(bs),
                               "residual": r} for c, b, bs, r in self.windows]
        if self.best_core is not None:
            out["best_core"] = list(self.best_core)
        return out


@dataclass
class ScanReport:
    horizon: int
    stats: dict

    def __getitem__(self, family) -> PatternStats:
        return self.stats[family]

    def present_families(self, r_min: float = R_MIN) -> list[str]:
        return sorted(f for f, s in self.stats.items() if s.present(r_min))

    def to_json(self) -> dict:
        return {"horizon": self.horizon,
                "patterns": [self.stats[f].to_json() for f in sorted(self.stats)]}


def _scan_fixed(d, H, st):
    w = st.spec.core
    L = len(w)
    for i in range(2, H - L + 1):
        if tuple(d[i:i + L]) == w:
            x, y = d[i - 1], d[i + L]
            st.positions.append(i)
            st._offer(i, min(x, y))


def _cf_value(a0, digits):
    """Exact ``[a0; digits]``."""
    v = Fraction(0)
    for a in reversed(digits):
        v = 1 / (a + v) if (a + v) else Fraction(0)
    return a0 + v


def _asym_matches(d, H, c, nu_max=None):
    """Almost-symmetric windows around the centre pair ``d[c] = d[c+1] = 1``.

    Yields ``(form, nu, plain, left_end, right_end)`` where the window
    occupies ``d[left_end..right_end]``; for flanked forms the flanks are
    ``d[left_end-1]`` and ``d[right_end+1]``.
    """
    def L(k):
        return d[c - k] if c - k >= 1 else None

    def R(k):
        return d[c + 1 + k] if c + 1 + k <= H else None

    for form in ("A", "B"):
        nu = 1
        while nu_max is None or nu <= nu_max:
            ok_inner = True
            for k in range(1, nu):
                lk, rk = L(k), R(k)
                if lk is None or rk is None:
                    ok_inner = False
                    break
                if k == 1:
                    good = rk == lk + 1 if form == "A" else lk == rk + 1
                else:
                    good = lk == rk
                if not good:
                    ok_inner = False
                    break
            if not ok_inner:
                break
            for vl in (0, 1):
                for vr in (0, 1):
                    lo, ro = L(nu), R(nu)
                    if lo is None or ro is None:
                        continue
                    if vl:
                        if L(nu + 1) != 1:
                            continue
                        lo += 1
                    if vr:
                        if R(nu + 1) != 1:
                            continue
                        ro += 1
                    if nu == 1:
                        good = ro == lo + 1 if form == "A" else lo == ro + 1
                    else:
                        good = lo == ro
                    if good:
                        yield form, nu, (vl, vr), c - nu - vl, c + 1 + nu + vr
            nu += 1


def _scan_asym_growing(d, H, st):
    for c in range(1, H):
        if d[c] == 1 and d[c + 1] == 1:
            best = 0
            for form, nu, var, lo, hi in _asym_matches(d, H, c):
                if var == (0, 0):
                    best = max(best, nu)
            if best:
                st.positions.append(c)
                st.max_nu = max(st.max_nu, best)
                st._offer(c, best)


def _scan_asym_flanked(d, H, st):
    per_core = {}
    for c in range(1, H):
        if d[c] == 1 and d[c + 1] == 1:
            for form, nu, var, lo, hi in _asym_matches(d, H, c):
                if lo - 1 < 1 or hi + 1 > H:
                    continue
                core = tuple(d[lo:hi + 1])
                x, y = d[lo - 1], d[hi + 1]
                st.positions.append(lo)
                per_core.setdefault(core, []).append((lo, min(x, y)))
    best = None
    for core, occ in per_core.items():
        recs, pos = [], []
        for i, v in sorted(occ):
            if not recs or v > recs[-1]:
                recs.append(v)
                pos.append(i)
        key = (len(recs), recs[-1])
        if best is None or key > best[0]:
            best = (key, core, recs, pos)
    if best is not None:
        _, st.best_core, st.records, st.record_positions = best


def _scan_palindrome(d, H, st):
    s = st.spec.core
    st.cap = len(s)
    for c in range(2, H):
        if d[c] != 1:
            continue
        k = 0
        while k < len(s) and c - k - 1 >= 1 and c + k + 1 <= H \
                and d[c - k - 1] == s[k] and d[c + k + 1] == s[k]:
            k += 1
        if k:
            st.positions.append(c)
            st.max_nu = max(st.max_nu, k)
            st._offer(c, k)


def central_values(d, H, c, depth=CENTRAL_DEPTH):
    """``(beta, beta_star)`` for the window around a central digit ``d[c] = 1``.

    ``beta = [R_1 - 1; R_2, ...]`` reads right of the centre and
    ``beta_star = [L_1 - 1; L_2, ...]`` reads left of it, outward, each to
    at most ``depth`` digits.
    """
    right = [d[k] for k in range(c + 1, min(H, c + depth) + 1)]
    left = [d[k] for k in range(c - 1, max(1, c - depth) - 1, -1)]
    beta = _cf_value(right[0] - 1, right[1:])
    beta_star = _cf_value(left[0] - 1, left[1:])
    return beta, beta_star


def _scan_central(d, H, st, depth=CENTRAL_DEPTH):
    # only full-depth right tails, so a window's value does not depend on the horizon
    for c in range(2, H - depth + 1):
        if d[c] != 1:
            continue
        beta, beta_star = central_values(d, H, c, depth)
        residual = float(abs(beta * beta_star - 3))
        precision = PRECISION_CAP if residual == 0 else min(1 / residual, PRECISION_CAP)
        before = len(st.records)
        st._offer(c, precision)
        if residual <= st.spec.tolerance:
            st.positions.append(c)
        if len(st.records) > before:
            st.windows.append((c, beta, beta_star, residual))


def _scan_unbounded(d, H, st):
    for i in range(1, H + 1):
        if not st.records or d[i] > st.records[-1]:
            st.positions.append(i)
            st._offer(i, d[i])


def scan(x: CFExpansion, specs, horizon: int) -> ScanReport:
    """Measure every pattern family in ``specs`` on ``a_1..a_horizon``."""
    if horizon < 10:
        raise DomainError("horizon must be >= 10")
    d = (None,) + x.prefix_digits(horizon)
    H = horizon
    stats = {}
    for spec in sorted(specs, key=lambda s: s.family):
        st = PatternStats(spec)
        if spec.kind == FLANKED_FIXED and spec.core:
            _scan_fixed(d, H, st)
        elif spec.kind == FLANKED_FIXED:
            _scan_asym_flanked(d, H, st)
        elif spec.kind == PALINDROMIC_GROWING and spec.family == "almost-symmetric":
            _scan_asym_growing(d, H, st)
        elif spec.kind == PALINDROMIC_GROWING:
            _scan_palindrome(d, H, st)
        elif spec.kind == CENTRAL_PRODUCT:
            _scan_central(d, H, st)
        else:
            _scan_unbounded(d, H, st)
        stats[spec.family] = st
    return ScanReport(H, stats)


# verdicts


@dataclass
class Verdict:
    status: str
    regime: Regime
    justification: str
    report: ScanReport | None

    @property
    def improvable(self) -> bool:
        return self.status in (DECIDED_IMPROVABLE, EVIDENCE_IMPROVABLE)

    @property
    def decided(self) -> bool:
        return self.status.startswith("DECIDED")

    def to_json(self) -> dict:
        specs = patterns_for(self.regime)
        rep = self.report
        return {
            "status": self.status,
            "regime": self.regime.tag,
            "p": "inf" if self.regime.p == INF else self.regime.p,
            "justification": self.justification,
            "patterns": [s.to_json() for s in sorted(specs, key=lambda s: s.family)],
            "records": [] if rep is None else [rep.stats[f].to_json() for f in sorted(rep.stats)],
            "horizon": None if rep is None else rep.horizon,
        }


def _deep_centre(pre, per, r, reach):
    """A digit index in residue class ``r`` of the period, at least ``reach`` past the preperiod."""
    return pre + per * (reach // per + 2) + r + 1


def _periodic_palindrome(x: CFExpansion, regime: Regime):
    s = regime.sigma_digits
    pre, per = len(x.digits), len(x.period)
    cap = len(s)
    best = 0
    for r in range(per):
        c = _deep_centre(pre, per, r, cap + 2)
        if x.digit(c) != 1:
            continue
        k = 0
        while k < cap and x.digit(c - k - 1) == s[k] and x.digit(c + k + 1) == s[k]:
            k += 1
        best = max(best, k)
        if k == cap:
            return EVIDENCE_NON_IMPROVABLE, (
                f"periodic tail matches all {cap} reliable digits of sigma_p around a central 1")
    return DECIDED_IMPROVABLE, (
        f"bounded digits exclude flanked patterns; palindromes around any central 1 "
        f"match at most {best} digits of sigma_p")


def _periodic_asym(x: CFExpansion):
    pre, per = len(x.digits), len(x.period)
    reach = 2 * per + 4
    for r in range(per):
        c = _deep_centre(pre, per, r, reach)
        if x.digit(c) != 1 or x.digit(c + 1) != 1:
            continue
        L = [x.digit(c - k) for k in range(1, reach + 1)]
        R = [x.digit(c + 1 + k) for k in range(1, reach + 1)]
        if (R[0] == L[0] + 1 or L[0] == R[0] + 1) and L[1:] == R[1:]:
            return DECIDED_NON_IMPROVABLE, (
                "periodic tail is almost symmetric about a centre 1,1 over more than a full "
                "period, hence for every length")
    return DECIDED_IMPROVABLE, "bounded digits exclude flanked patterns; no almost-symmetric centre"


def _periodic_product(x: CFExpansion):
    from sympy.ntheory.continued_fraction import continued_fraction_reduce

    pre, per = len(x.digits), len(x.period)
    for r in range(per):
        c = _deep_centre(pre, per, r, 30 * per + 2)
        if x.digit(c) != 1:
            continue
        right = [x.digit(c + k) for k in range(1, per + 2)]
        left = [x.digit(c - k) for k in range(1, per + 2)]
        d = (None,) + tuple(x.digit(i) for i in range(1, c + 40 * per + 2))
        beta, beta_star = central_values(d, len(d) - 1, c, 30 * per)
        if abs(float(beta * beta_star) - 3) > 1e-6:
            continue
        b = continued_fraction_reduce([right[0] - 1, right[1:per + 1]])
        bs = continued_fraction_reduce([left[0] - 1, left[1:per + 1]])
        if (b * bs - 3).equals(0):
            return DECIDED_NON_IMPROVABLE, (
                f"periodic windows around a central 1 give beta*beta_star = 3 exactly "
                f"(beta = {b}, beta_star = {bs})")
    return DECIDED_IMPROVABLE, "bounded digits exclude flanked patterns; no central window has product 3"


def _periodic_decision(x: CFExpansion, regime: Regime):
    tag = regime.tag
    if tag == "P_EQ_INF":
        return DECIDED_IMPROVABLE, "bounded partial quotients"
    if tag == "OPEN_2_P0":
        return DECIDED_IMPROVABLE, "bounded digits exclude x,1,1,y and x,2,y with growing flanks"
    if tag == "P_EQ_1":
        return _periodic_asym(x)
    if tag == "P_EQ_2":
        return _periodic_product(x)
    if regime.sigma_rational:
        return DECIDED_IMPROVABLE, "sigma_p rational: only flanked patterns, excluded by bounded digits"
    return _periodic_palindrome(x, regime)


def _e_decision(regime: Regime):
    if regime.tag == "P_EQ_INF":
        return DECIDED_NON_IMPROVABLE, "partial quotients of e are unbounded"
    if regime.tag in ("OPEN_1_2", "ABOVE_P0"):
        return DECIDED_IMPROVABLE, (
            "large digits of e strictly increase, so no palindromic or flanked symmetric "
            "pattern around them can recur")
    return DECIDED_NON_IMPROVABLE, "e contains 2k,1,1,2k+2 for every k: x,1,1,y with growing flanks"


def _metadata_decision(x: CFExpansion, regime: Regime):
    for entry in (x.metadata or {}).get("decisions", ()):
        p = entry.get("p")
        if p is not None:
            hit = (p == "inf" and regime.p == INF) or (p != "inf" and regime.p != INF
                                                       and abs(float(p) - regime.p) <= 1e-12)
        else:
            hit = entry.get("tag") == regime.tag
        if hit:
            return entry["status"], f"by construction: {entry.get('reason', x.metadata.get('label'))}"
    return None


def _evidence(report: ScanReport):
    late = 3 * report.horizon // 4
    for fam, st in sorted(report.stats.items()):
        if st.present() and st.record_positions[-1] >= late:
            return EVIDENCE_NON_IMPROVABLE, f"records of {fam} still growing in the final quarter"
    return EVIDENCE_IMPROVABLE, "no pattern family has records growing in the final quarter"


def classify(x: CFExpansion, p, horizon: int = 2000) -> Verdict:
    """Improvability of ``x`` with respect to the ``L_p`` norm."""
    regime = regime_of(p)
    specs = patterns_for(regime)
    H = horizon if x.length is None else min(horizon, x.length)
    report = scan(x, specs, H) if H >= 10 else None
    if x.is_rational:
        return Verdict(DECIDED_IMPROVABLE, regime, "rational numbers are improvable", report)
    if x.kind == "stream":
        hit = _metadata_decision(x, regime)
        if hit is not None:
            return Verdict(hit[0], regime, hit[1], report)
    elif x.kind == "e":
        status, why = _e_decision(regime)
        return Verdict(status, regime, why, report)
    elif x.is_eventually_periodic:
        status, why = _periodic_decision(x, regime)
        return Verdict(status, regime, why, report)
    if report is None:
        raise DomainError("too few digits to scan (need at least 10)")
    status, why = _evidence(report)
    return Verdict(status, regime, why, report)


def classify_e(p, horizon: int = 2000) -> Verdict:
    """Improvability of Euler's number at exponent ``p``."""
    return classify(CFExpansion.e(), p, horizon)
