import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lpdirichlet.cf import CFExpansion, convergents
from lpdirichlet.classifier import (ASYM, ASYM_FLANKED, CENTRAL, CENTRAL_PRODUCT,
                                    DECIDED_IMPROVABLE, DECIDED_NON_IMPROVABLE,
                                    EVIDENCE_IMPROVABLE, EVIDENCE_NON_IMPROVABLE, FLANKED_FIXED,
                                    PALINDROMIC_GROWING, UNBOUNDED, X11Y, X2Y, PatternSpec,
                                    central_values, classify, classify_e, patterns_for,
                                    regime_of, scan, sigma_digits, sigma_flanked_cores)
from lpdirichlet.errors import DomainError, TruncationError
from lpdirichlet.lp import INF, p_zero, sigma

E = CFExpansion.e()
GOLD = CFExpansion.golden()
SILVER = CFExpansion.periodic(0, (), (2,))


# regimes


@pytest.mark.parametrize("p,tag", [(1, "P_EQ_1"), (1.5, "OPEN_1_2"), (2, "P_EQ_2"),
                                   (2.3, "OPEN_2_P0"), (2.7, "ABOVE_P0"), (10, "ABOVE_P0"),
                                   (INF, "P_EQ_INF")])
def test_regime_tags(p, tag):
    assert regime_of(p).tag == tag


def test_regime_p0():
    r = regime_of(p_zero())
    assert r.tag == "P_EQ_P0" and r.sigma_rational is None and r.sigma_digits
    assert regime_of(p_zero() - 1e-6).tag == "OPEN_2_P0"
    assert regime_of(p_zero() + 1e-6).tag == "ABOVE_P0"


def test_regime_sigma_digits():
    r = regime_of(1.5)
    assert r.sigma == pytest.approx(sigma(1.5)) and len(r.sigma_digits) >= 20
    val = convergents(CFExpansion.prefix(0, r.sigma_digits), len(r.sigma_digits))[-1].fraction
    assert abs(float(val) - sigma(1.5)) < 1e-12


def test_regime_domain():
    for p in (0.5, float("nan"), -1):
        with pytest.raises(DomainError):
            regime_of(p)


def test_sigma_digits_stable():
    d, rational = sigma_digits(3.0, 30)
    d2, _ = sigma_digits(3.0, 30, prec=512)
    assert d == d2[: len(d)] and rational is False


# pattern sets


def test_patterns_examples():
    assert patterns_for(regime_of(2.3)) == {X11Y, X2Y}
    assert patterns_for(regime_of(2)) == {X11Y, X2Y, CENTRAL}
    assert patterns_for(regime_of(INF)) == {UNBOUNDED}
    assert patterns_for(regime_of(1)) == {X11Y, X2Y, ASYM, ASYM_FLANKED}
    kinds = {s.kind for s in patterns_for(regime_of(1.5))}
    assert kinds == {PALINDROMIC_GROWING}
    p0set = patterns_for(regime_of(p_zero()))
    assert {X11Y, X2Y} <= p0set and any(s.kind == PALINDROMIC_GROWING for s in p0set)


@settings(max_examples=30, deadline=None)
@given(st.floats(2.0001, 2.5), st.floats(2.0001, 2.5))
def test_patterns_constant_on_open_interval(p, q):
    assert patterns_for(regime_of(p)) == patterns_for(regime_of(q))


def test_rational_sigma_flanked_cores():
    cores = sigma_flanked_cores((2, 3))
    assert len(set(cores)) == 4
    assert (3, 2, 1, 2, 3) in cores and (1, 2, 2, 1, 2, 2, 1) in cores
    with pytest.raises(DomainError):
        sigma_flanked_cores((2, 1))
    reg = regime_of(1.5)
    fake = type(reg)(reg.tag, reg.p, reg.p0, 0.3, (3, 2), True)
    specs = patterns_for(fake)
    assert len(specs) == 4 and all(s.kind == FLANKED_FIXED for s in specs)


def test_palindrome_core_shape():
    spec = PatternSpec(PALINDROMIC_GROWING, "t", (2, 5, 7))
    for nu in range(4):
        core = spec.core_at(nu)
        assert len(core) == 2 * nu + 1 and core == core[::-1]


# scanning


def test_scan_e_x11y_records():
    rep = scan(E, {X11Y}, 200)
    assert rep["x11y"].records[:5] == [2, 4, 6, 8, 10]
    assert rep["x11y"].present()


def test_scan_golden_no_x2y():
    rep = scan(GOLD, {X2Y}, 500)
    assert rep["x2y"].positions == [] and not rep["x2y"].present()


def test_scan_period_two_palindrome():
    grows = PatternSpec(PALINDROMIC_GROWING, "p", (2,) * 30)
    stops = PatternSpec(PALINDROMIC_GROWING, "q", (2, 2, 3) + (2,) * 27)
    x = CFExpansion.periodic(0, (), (2, 2, 2, 2, 2, 2, 2, 2, 2, 1) + (2,) * 40)
    small, big = scan(x, {grows, stops}, 60), scan(x, {grows, stops}, 400)
    assert small["p"].max_nu < big["p"].max_nu == 30
    assert small["q"].max_nu == big["q"].max_nu == 2


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=20, max_size=80))
def test_palindrome_scan_reversal_symmetric(w):
    spec = PatternSpec(PALINDROMIC_GROWING, "p", (2, 1, 3, 1, 2, 2, 1, 3))
    a = scan(CFExpansion.prefix(0, w), {spec}, len(w))["p"]
    b = scan(CFExpansion.prefix(0, w[::-1]), {spec}, len(w))["p"]
    assert a.max_nu == b.max_nu
    assert sorted(a.positions) == sorted(len(w) + 1 - c for c in b.positions)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=40, max_size=120), st.integers(10, 39))
def test_horizon_monotone(w, h):
    x = CFExpansion.prefix(0, w)
    specs = {X11Y, X2Y, ASYM, CENTRAL, UNBOUNDED}
    small, big = scan(x, specs, h), scan(x, specs, len(w))
    for fam, st_small in small.stats.items():
        st_big = big[fam]
        assert set(st_small.positions) <= set(st_big.positions)
        if st_small.records:
            assert st_big.records[-1] >= st_small.records[-1]
        assert all(b > a for a, b in zip(st_big.records, st_big.records[1:]))
        assert all(1 <= pos <= len(w) for pos in st_big.positions)


def test_central_residual_converges():
    beta_star, beta = Fraction(4, 3), Fraction(9, 4)
    assert beta * beta_star == 3
    residuals = []
    for n in (3, 6, 12, 24, 48):
        # window ...,3,2,1,3,4,... with growing outer flanks
        w = [1] * 4 + [n, 3, 2, 1, 3, 4, n + 1] + [1] * 4
        d = (None,) + tuple(w)
        c = 4 + 4
        assert w[c - 1] == 1
        b, bs = central_values(d, len(w), c)
        residuals.append(abs(float(b * bs) - 3))
    assert all(y < x for x, y in zip(residuals, residuals[1:]))
    assert residuals[-1] < 1e-2


def test_scan_truncation():
    with pytest.raises(TruncationError):
        scan(CFExpansion.prefix(0, [1] * 20), {X11Y}, 40)
    with pytest.raises(DomainError):
        scan(GOLD, {X11Y}, 5)


# verdicts


def test_classify_examples():
    assert classify(E, 2.3).status == DECIDED_NON_IMPROVABLE
    assert classify(E, 1.5).status == DECIDED_IMPROVABLE
    assert classify(GOLD, 2.3).status == DECIDED_IMPROVABLE
    assert classify(CFExpansion.from_fraction("22/7"), 2).status == DECIDED_IMPROVABLE


@pytest.mark.parametrize("p,improvable", [(1, False), (1.2, True), (1.5, True), (1.9, True),
                                          (2, False), (2.3, False), (2.7, True), (3, True),
                                          (10, True), (INF, False)])
def test_classify_e_table(p, improvable):
    v = classify_e(p)
    assert v.decided and v.improvable is improvable


def test_classify_e_at_p0():
    assert not classify_e(p_zero()).improvable


def test_periodic_p2_central_product():
    # beta = [1; 2, 1, 2, ...] = sqrt(3), beta_star = sqrt(3)
    v = classify(CFExpansion.periodic(0, (), (1, 2)), 2)
    assert v.status == DECIDED_NON_IMPROVABLE
    assert classify(GOLD, 2).status == DECIDED_IMPROVABLE
    assert classify(SILVER, 2).status == DECIDED_IMPROVABLE


def test_periodic_p1():
    for per in ((1,), (2,), (1, 2), (1, 1, 2), (2, 1, 1, 3)):
        v = classify(CFExpansion.periodic(0, (), per), 1)
        assert v.status == DECIDED_IMPROVABLE


def test_periodic_bounded_cases():
    for p in (1.5, 2.3, 3, INF):
        assert classify(SILVER, p).improvable


def test_prefix_evidence():
    grow = []
    for k in range(2, 30):
        grow += [k, 1, 1, k + 1] + [3] * 4
    v = classify(CFExpansion.prefix(0, grow), 2.3)
    assert v.status == EVIDENCE_NON_IMPROVABLE
    v = classify(CFExpansion.prefix(0, [3] * 300), 2.3)
    assert v.status == EVIDENCE_IMPROVABLE


def test_verdict_json():
    out = classify(E, 2.3, 200).to_json()
    assert set(out) == {"status", "regime", "p", "justification", "patterns", "records", "horizon"}
    assert out["horizon"] == 200 and out["regime"] == "OPEN_2_P0"
    assert {r["family"] for r in out["records"]} == {"x11y", "x2y"}
    assert classify(E, INF).to_json()["p"] == "inf"


def test_classify_domain():
    with pytest.raises(DomainError):
        classify(E, 0.9)
    with pytest.raises(DomainError):
        classify(CFExpansion.prefix(0, [1, 2, 3]), 2.3)
