import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardyinterp.errors import EmptyRegionError, InvalidArgumentError, InvalidPointError, \
    QuadratureError
from hardyinterp import kernels
from hardyinterp.geometry import BoundaryPoint, Point, random_unitary, rotate
from hardyinterp.kernels import (approx_kernel_Kt, cauchy_kernel, certify_H2, certify_H3,
                                 conjugate, kernel_norm, normalized_kernel)
from hardyinterp.quadrature import build_rule, lp_norm

# c(a, p) = 2F1(np/2, np/2; n; |a|^2)^(1/p) (1-|a|^2)^(n/p'), evaluated with mpmath at 30 digits
FROZEN_C = [
    (1, 0.3, 1, 1.0237155463761664), (1, 0.3, 1.5, 1.0038851631890583),
    (1, 0.3, 3, 1.0074869769231157), (1, 0.3, 4, 1.021778180864641),
    (1, 0.6, 1, 1.1145644874839037), (1, 0.6, 1.5, 1.0175975037926508),
    (1, 0.6, 3, 1.0298465173492348), (1, 0.6, 4, 1.0799029488658044),
    (1, 0.9, 1, 1.4518426733757878), (1, 0.9, 1.5, 1.0555733935515723),
    (1, 0.9, 3, 1.0673609269461762), (1, 0.9, 4, 1.159897583714774),
    (1, 0.99, 1, 2.1368782611111062), (1, 0.99, 1.5, 1.0944552216098888),
    (1, 0.99, 3, 1.0820708419667862), (1, 0.99, 4, 1.1862378601912482),
    (2, 0.3, 1, 1.0478964385693481), (2, 0.3, 1.5, 1.007750687857663),
    (2, 0.3, 3, 1.0147804616306875), (2, 0.3, 4, 1.0428423249736771),
    (2, 0.6, 1, 1.2396863961900542), (2, 0.6, 1.5, 1.0347322004306831),
    (2, 0.6, 3, 1.056721805258721), (2, 0.6, 4, 1.1523260883169428),
    (2, 0.9, 1, 2.0502854405205569), (2, 0.9, 1.5, 1.104438835224913),
    (2, 0.9, 3, 1.1200191323262327), (2, 0.9, 4, 1.2980154877533578),
    (2, 0.99, 1, 3.9965672352328222), (2, 0.99, 1.5, 1.1599698808789896),
    (2, 0.99, 3, 1.1421775349346399), (2, 0.99, 4, 1.345803510407249),
]


def axis_point(n, r):
    return Point(np.r_[r, np.zeros(n - 1)])


def test_conjugate():
    assert conjugate(2) == 2
    assert conjugate(1) == np.inf and conjugate(np.inf) == 1
    assert conjugate(4) == pytest.approx(4 / 3)


def test_cauchy_kernel_examples():
    assert cauchy_kernel(Point([0.0, 0.0]), BoundaryPoint([0.6, 0.8])) == 1
    assert cauchy_kernel(Point([0.5]), BoundaryPoint([1.0])) == pytest.approx(2.0)
    assert cauchy_kernel(Point([0.5, 0]), Point([0.5, 0])) == pytest.approx(16 / 9)
    with pytest.raises(InvalidPointError):
        cauchy_kernel(BoundaryPoint([1.0]), BoundaryPoint([1.0]))


def test_kernel_is_antiholomorphic_in_pole():
    a, z = Point([0.2 + 0.3j]), Point([0.4 - 0.1j])
    assert cauchy_kernel(a, z) == pytest.approx(1 / (1 - np.conj(0.2 + 0.3j) * (0.4 - 0.1j)))


@pytest.mark.parametrize("n, r, p, c", FROZEN_C)
def test_kernel_norm_matches_hypergeometric(n, r, p, c):
    rule = build_rule(n, 5 if n == 1 else 3)
    nc = kernel_norm(axis_point(n, r), p, rule)
    assert nc.c == pytest.approx(c, rel=1e-9 if n == 1 else 1e-8)
    assert nc.norm == pytest.approx(nc.c * (1 - r * r) ** (-n / conjugate(p)), rel=1e-14)


def test_frozen_values_are_the_series(rng):
    mp.mp.dps = 30
    for n, r, p, c in FROZEN_C[::7]:
        v = mp.hyp2f1(n * p / 2, n * p / 2, n, r * r) ** (1 / mp.mpf(p))
        assert float(v * (1 - r * r) ** (n * (1 - 1 / mp.mpf(p)))) == pytest.approx(c, rel=1e-15)


def test_kernel_norm_examples(rule1):
    for p in (1, 1.5, 2, 4):
        nc = kernel_norm(Point([0.0]), p, rule1)
        assert nc.norm == 1 and nc.c == 1
    a = Point([0.5])
    assert kernel_norm(a, 4, rule1).norm ** 4 == pytest.approx(1.25 / 0.75 ** 3, rel=1e-8)
    for rr in (0.0, 0.3, 0.6, 0.9, 0.99):
        for n in (1, 2):
            assert kernel_norm(axis_point(n, rr), 2, build_rule(n, 2)).c == pytest.approx(1, abs=1e-6)


def test_p2_closed_form_agrees_with_quadrature(rule1):
    a = Point([0.9])
    r = build_rule(1, 5, hints=[a])
    q = lp_norm(cauchy_kernel(a, r.nodes), 2.0, r)
    assert q == pytest.approx(kernel_norm(a, 2, rule1).norm, rel=1e-12)


def test_kernel_norm_near_sphere_and_band():
    a = Point.from_gap([1.0], 1e-15)
    nc = kernel_norm(a, 4.0, build_rule(1, 4))
    # 2F1(2, 2; 1; x) ~ 2 (1 - x)^-3, so c(a, 4) -> 2^(1/4) at the sphere
    assert nc.c == pytest.approx(2 ** 0.25, rel=1e-9)
    with pytest.raises(InvalidArgumentError):
        kernel_norm(a, 0.5, build_rule(1, 1))


def test_band_violation_flags_quadrature(monkeypatch):
    monkeypatch.setattr(kernels, "C_BAND", (1e-3, 1.01))
    with pytest.raises(QuadratureError):
        kernel_norm(Point([0.77]), 1.0, build_rule(1, 2))


def test_normalized_kernel(rule1):
    h = normalized_kernel(Point([0.0]), 3.0, rule1)
    assert np.allclose(h(rule1.nodes), 1.0)
    a = Point([0.6j])
    h2 = normalized_kernel(a, 2.0, rule1)
    assert h2(a) == pytest.approx((1 - 0.36) ** -0.5)
    for rr in (0.0, 0.5, 0.9, 0.99):
        b = Point([rr])
        fine = build_rule(1, 6, hints=[b] if rr else None)
        for p in (1, 1.5, 2, 3, 4):
            assert lp_norm(normalized_kernel(b, p, rule1)(fine.nodes), p, fine) == \
                pytest.approx(1.0, abs=1e-8)


def test_kt_examples():
    z, w = BoundaryPoint([1.0]), BoundaryPoint([-1.0])
    assert approx_kernel_Kt(z, w, 1.0, 3.0) == pytest.approx(1.0)
    assert approx_kernel_Kt(z, z, 0.2, 2.0) == pytest.approx(5.0)
    assert approx_kernel_Kt(z, w, 0.1, 2.0) == pytest.approx(0.1 / 3.61)
    with pytest.raises(InvalidArgumentError):
        approx_kernel_Kt(z, w, 0.0, 2.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-6, 1.0), st.floats(1.01, 5.0), st.integers(1, 3))
def test_kt_diagonal_blowup(t, p, n):
    z = BoundaryPoint(np.eye(n)[0])
    assert approx_kernel_Kt(z, z, t, p) == pytest.approx(t ** -n, rel=1e-10)


def test_h2_examples():
    cert = certify_H2(1, 2.0)
    assert np.isfinite(cert.constant)
    # t = 1, delta = 2 realizes the ceiling 3^(alpha + n) = 3^(np)
    assert cert.constant == pytest.approx(3 ** 2, rel=1e-9)
    assert cert.witness_t == pytest.approx(1.0)
    with pytest.raises(InvalidArgumentError):
        certify_H2(1, 1.0)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_h2_diagonal_ratio_is_one(p):
    # delta = 0: K_t = t^-n, bound t^alpha t^(-alpha-n); ratio exactly 1
    cert = certify_H2(1, p)
    assert not np.isclose(cert.witness["delta"], 0.0)
    assert np.all(cert.t_profile >= 1 - 1e-12)


def test_h3_examples():
    cert = certify_H3(1, 2.0, grid_level=2)
    assert cert.samples >= 100_000
    finer = certify_H3(1, 2.0, grid_level=3)
    assert abs(finer.constant - cert.constant) <= 0.1 * cert.constant
    assert np.isfinite(cert.constant) and cert.constant > 0
    assert cert.witness["delta_z0_z"] <= (cert.witness["t"] + cert.witness["delta_zeta_z0"]) / 4 * (1 + 1e-9)


def test_h3_empty_region(monkeypatch):
    monkeypatch.setattr(kernels, "_h3_samples",
                        lambda n, lv, t: (np.array([0.5]), np.array([0.5 + 0.5j]),
                                          np.array([10.0]), {}))
    with pytest.raises(EmptyRegionError):
        certify_H3(1, 2.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.0, 0.95), st.sampled_from([1.5, 3.0]))
def test_norm_unitary_invariance(seed, r, p):
    g = np.random.default_rng(seed)
    a = axis_point(2, r)
    U = random_unitary(2, g)
    rule = build_rule(2, 3)
    x = kernel_norm(a, p, rule).c
    y = kernel_norm(rotate(U, a), p, rule).c
    assert y == pytest.approx(x, rel=1e-8)
