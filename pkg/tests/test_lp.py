import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpdirichlet.errors import DomainError
from lpdirichlet.lp import (INF, alpha_of, alpha_star_of, bisect, catalog, constants,
                            critical_determinant, dirichlet_bound, g_residual, h_inverse,
                            is_p0, lattice_l1, lattice_l1prime, lattice_l2, lattice_l3,
                            lattice_l4, norm_eval, p_zero, sigma, sigma_high, x0)
from lpdirichlet.cf import mp_context

P_GRID = np.linspace(1.01, 10, 40)
finite_p = st.floats(min_value=1.0, max_value=20.0, allow_nan=False)


def test_norm_examples():
    assert norm_eval(1, (0.3, 0.7)) == pytest.approx(1.0)
    assert norm_eval(INF, (0.3, 0.7)) == 0.7
    assert norm_eval(2, (3, 4)) == pytest.approx(5.0)


@given(finite_p, st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_norm_symmetry(p, x, y):
    v = norm_eval(p, (x, y))
    assert v == pytest.approx(norm_eval(p, (abs(x), abs(y))))
    assert v == pytest.approx(norm_eval(p, (y, x)))
    assert max(abs(x), abs(y)) <= v * (1 + 1e-12)
    assert norm_eval(p, (1, 0)) == norm_eval(p, (0, 1)) == 1


def test_sigma_values():
    assert abs(sigma(1) - 0.5) < 1e-12
    assert abs(sigma(2) - (math.sqrt(3) - 1) / 2) < 1e-12
    assert abs(g_residual(sigma(3), 3)) < 1e-11


@settings(max_examples=40, deadline=None)
@given(st.floats(1.0, 10.0))
def test_sigma_root(p):
    s = sigma(p)
    assert 0 < s < 1
    assert abs(g_residual(s, p)) < 1e-11


def test_sigma_single_sign_change():
    for p in P_GRID:
        xs = np.linspace(1e-6, 1 - 1e-6, 400)
        vals = xs ** p + (1 + xs) ** p - 2
        assert np.count_nonzero(np.diff(np.sign(vals))) == 1


def test_sigma_domain():
    with pytest.raises(DomainError):
        sigma(0.5)


def test_bisect_requires_sign_change():
    with pytest.raises(RuntimeError):
        bisect(lambda x: x * x + 1, -1.0, 1.0, 1e-12)


def test_h_inverse():
    assert h_inverse(0.5) == pytest.approx(1, abs=1e-9)
    assert h_inverse((math.sqrt(3) - 1) / 2) == pytest.approx(2, abs=1e-9)
    assert abs(h_inverse(sigma(2.8)) - 2.8) < 1e-9
    vals = [h_inverse(s) for s in np.linspace(sigma(9.0), sigma(1.2), 20)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        h_inverse(0.9)


def test_p_zero():
    p0 = p_zero()
    assert 2.57 < p0 < 2.58
    assert abs(p_zero(prec=256) - p0) < 1e-9
    assert is_p0(p0) and not is_p0(2.5)
    ctx = mp_context(128)
    s = sigma_high(p0, 128)
    gap = (1 + 2 * s) / ctx.power(2, 2 / ctx.mpf(p0)) - x0(p0)
    assert abs(gap) < 1e-10


def test_det_gap_bracket():
    def gap(p):
        return (1 + 2 * sigma(p)) / 2 ** (2 / p) - x0(p)

    assert gap(2.5) * gap(2.7) < 0


def test_x0_boundary():
    for p in (2.1, 2.3, 2.5):
        assert x0(p) ** p + 0.5 ** p == pytest.approx(1, abs=1e-12)


def test_critical_determinant_values():
    assert abs(critical_determinant(1) - 0.5) < 1e-10
    assert abs(critical_determinant(2) - math.sqrt(3) / 2) < 1e-10
    assert critical_determinant(INF) == 1
    assert critical_determinant(2.3) == pytest.approx((1 - 2 ** -2.3) ** (1 / 2.3))
    assert dirichlet_bound(1) == pytest.approx(math.sqrt(2))


def test_determinant_seams():
    assert abs(lattice_l2(2.0).det - math.sqrt(3) / 2) < 1e-9
    assert abs(lattice_l2(2.0 - 1e-9).det - math.sqrt(3) / 2) < 1e-8
    assert abs(lattice_l4(math.pi / 6).det - math.sqrt(3) / 2) < 1e-12
    assert abs(lattice_l3(0.2).det - 0.5) < 1e-12


def _check_lattice(lat, delta):
    for pt in lat.boundary_points():
        assert abs(norm_eval(lat.p, pt) - 1) <= 1e-10
    assert abs(lat.det - delta) <= 1e-10


@pytest.mark.parametrize("p", [1.0, 1.3, 1.7, 2.0, 2.2, 2.5, 3.0, 5.0, 10.0])
def test_catalog_invariants(p):
    lats = catalog(p)
    assert lats
    for lat in lats:
        _check_lattice(lat, critical_determinant(p))


def test_catalog_families():
    assert {l.family for l in catalog(2.3)} == {"L1", "L1PRIME"}
    assert {l.family for l in catalog(1.5)} == {"L2PLUS", "L2MINUS"}
    assert {l.family for l in catalog(3.0)} == {"L2PLUS", "L2MINUS"}
    assert {l.family for l in catalog(p_zero())} == {"L1", "L1PRIME", "L2PLUS", "L2MINUS"}
    assert len(catalog(1.0, samples=100)) == 200
    with pytest.raises(DomainError):
        catalog(INF)


def test_catalog_at_p0_agrees():
    p0 = p_zero()
    dets = [l.det for l in catalog(p0)]
    assert max(dets) - min(dets) < 1e-10


def test_l3_eight_points_at_zero():
    lat = lattice_l3(0.0)
    pts = lat.boundary_points()
    assert len(pts) == 4
    for pt in pts:
        assert norm_eval(1, pt) == pytest.approx(1)


def test_alpha_identities():
    l1 = lattice_l1(2.3)
    assert alpha_of(l1.matrix) == pytest.approx(1) and alpha_star_of(l1.matrix) == pytest.approx(1)
    for p in (1.5, 3.0, 6.0):
        lat = lattice_l2(p)
        assert lat.alpha == pytest.approx(1 + sigma(p)) and lat.alpha_star == pytest.approx(sigma(p))
    l3 = lattice_l3(0.2)
    assert (l3.alpha, l3.alpha_star) == (pytest.approx(1.6), pytest.approx(0.4))
    for a in np.linspace(0, 0.49, 25):
        l3 = lattice_l3(a, -1)
        assert l3.alpha + l3.alpha_star == pytest.approx(2)


def test_l4_product_identity():
    u = 0.25
    phi = math.asin(u)
    for sign in (1, -1):
        lat = lattice_l4(phi, sign)
        b, bs = 1 / (lat.alpha - 1) - 1, 1 / lat.alpha_star - 1
        assert abs(b * bs - 3) < 1e-10


def test_alpha_zero_denominator():
    assert alpha_of(np.array([[1.0, 0.0], [0.0, 0.0]])) == INF


def test_constants_json():
    c = constants(2).to_json()
    assert set(c) == {"p", "sigma", "delta", "p0", "dirichlet_bound"}
    assert c["sigma"] == pytest.approx(0.3660254037844386)
    assert constants(INF).sigma is None
