import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from hypspec import collar
from hypspec.errors import DomainError

L0 = 2 * np.arcsinh(1.0)

# high-precision references (40-digit root finding and quadrature)
RHO_EDGE_1 = 0.34440388241708794
X_L0 = 2.7994951705055226
X_001 = 983.81886054523365
WIDTH_01 = 7.3781755141413268
THIN_01_01 = 65.842651052270648
Z_01_1 = 90.171189926972779
KAPPA_EDGE_1 = -0.88681888397007391


def quad(f, a, b):
    return integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=400)[0]


def test_conformal_factor_values():
    assert collar.conformal_factor(1.0, 0.0) == pytest.approx(1 / (2 * np.pi), rel=1e-15)
    assert collar.boundary_factor(1.0) == pytest.approx(RHO_EDGE_1, rel=1e-14)
    x = collar.half_length(1.0)
    assert collar.conformal_factor(1.0, x * (1 - 1e-12)) == pytest.approx(RHO_EDGE_1, rel=1e-9)


def test_conformal_factor_domain():
    x = collar.half_length(0.2)
    with pytest.raises(DomainError):
        collar.conformal_factor(0.2, x)
    with pytest.raises(DomainError):
        collar.conformal_factor(-1.0, 0.0)


def test_half_length_values():
    assert collar.half_length(L0) == pytest.approx(X_L0, rel=1e-14)
    assert collar.half_length(L0) == pytest.approx(np.pi**2 / (2 * L0), rel=1e-12)
    assert collar.half_length(0.01) == pytest.approx(X_001, rel=1e-13)
    assert collar.half_length(0.1) > collar.half_length(0.2)
    with pytest.raises(DomainError):
        collar.half_length(0.0)


@pytest.mark.parametrize("ell", [1e-3, 1e-2, 0.05, 0.1])
def test_half_length_small_ell_series(ell):
    assert abs(collar.half_length(ell) - (np.pi**2 / ell - np.pi)) < 2 * ell


def test_thin_cut():
    assert collar.thin_cut(0.5, 0.2) == 0.0
    assert collar.thin_cut(0.1, 0.1) == pytest.approx(THIN_01_01, rel=1e-13)
    with pytest.raises(DomainError):
        collar.thin_cut(0.1, 0.9)
    with pytest.raises(DomainError):
        collar.thin_cut(0.1, 0.0)


def test_thin_cut_gap_bounds():
    # pi/delta - C <= X - X_delta <= pi^2 / (2 delta), one C for the whole sweep
    gaps = []
    for delta in (0.1, 0.2, 0.3, 0.5):
        for ell in (0.01, 0.05, 0.1, 0.2):
            if ell > 2 * delta:
                continue
            gap = collar.half_length(ell) - collar.thin_cut(ell, delta)
            assert gap <= np.pi**2 / (2 * delta)
            gaps.append(np.pi / delta - gap)
    # fitted constant stays near pi across the sweep
    assert max(gaps) < 4.0


def test_width():
    assert collar.width(L0) == pytest.approx(L0, rel=1e-14)
    assert collar.width(0.1) == pytest.approx(WIDTH_01, rel=1e-13)


@pytest.mark.parametrize("ell", [0.05, 0.1, 0.5, 1.0])
def test_width_and_area_by_quadrature(ell):
    x = collar.half_length(ell)
    k = ell / (2 * np.pi)
    w = quad(lambda s: k / np.cos(k * s), -x, x)
    assert w == pytest.approx(collar.width(ell), rel=1e-10)
    a = quad(lambda s: 2 * np.pi * (k / np.cos(k * s)) ** 2, -x, x)
    assert a == pytest.approx(collar.full_area(ell), rel=1e-10)
    assert collar.collar_area(ell, -x, x) == pytest.approx(collar.full_area(ell), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 1.7), st.floats(-0.99, 0.99), st.floats(-0.99, 0.99))
def test_collar_area_subintervals(ell, u, v):
    x = collar.half_length(ell)
    s1, s2 = sorted((u * x, v * x))
    k = ell / (2 * np.pi)
    a = quad(lambda s: 2 * np.pi * (k / np.cos(k * s)) ** 2, s1, s2)
    assert collar.collar_area(ell, s1, s2) == pytest.approx(a, rel=1e-10, abs=1e-13)


def test_collar_area_values():
    assert collar.collar_area(0.3, 1.0, 1.0) == 0.0
    assert collar.full_area(L0) == pytest.approx(2 * L0, rel=1e-14)
    assert collar.full_area(1e-3) == pytest.approx(4.0, abs=1e-6)
    with pytest.raises(DomainError):
        collar.collar_area(0.3, 2.0, 1.0)


def test_truncation_level():
    ell = 0.1
    assert collar.truncation_level(ell, 0.0) == pytest.approx(collar.half_length(ell), rel=1e-14)
    assert collar.truncation_level(L0, 0.5 * collar.width(L0)) == pytest.approx(0.0, abs=1e-10)
    assert collar.truncation_level(ell, 1.0) == pytest.approx(Z_01_1, rel=1e-12)
    with pytest.raises(DomainError):
        collar.truncation_level(ell, collar.width(ell))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.02, 1.7), st.floats(0.0, 1.0))
def test_truncation_level_is_distance_from_boundary(ell, frac):
    c = frac * 0.5 * collar.width(ell)
    z = collar.truncation_level(ell, c)
    x = collar.half_length(ell)
    k = ell / (2 * np.pi)
    assert quad(lambda s: k / np.cos(k * s), z, x) == pytest.approx(c, rel=1e-9, abs=1e-10)


def test_geodesic_curvature():
    assert collar.geodesic_curvature(0.4, 0.0) == 0.0
    x = collar.half_length(1.0)
    assert collar.geodesic_curvature(1.0, x * (1 - 1e-13)) == pytest.approx(KAPPA_EDGE_1, rel=1e-10)
    assert collar.geodesic_curvature(0.4, -3.0) == -collar.geodesic_curvature(0.4, 3.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, L0 * 0.999), st.floats(-0.999, 0.999), st.floats(-0.999, 0.999))
def test_factor_properties(ell, u, v):
    x = collar.half_length(ell)
    s1, s2 = u * x, v * x
    r1, r2 = collar.conformal_factor(ell, s1), collar.conformal_factor(ell, s2)
    assert r1 == pytest.approx(collar.conformal_factor(ell, -s1), rel=1e-15)
    # |d log rho / ds| <= rho
    assert abs(collar.log_factor_derivative(ell, s1)) <= r1 * (1 + 1e-12)
    # rho(s1) <= e^{|s1 - s2|} rho(s2)
    assert np.log(r1) - np.log(r2) <= abs(s1 - s2) + 1e-12
    if abs(s1) < abs(s2):
        assert r1 <= r2


def test_distance_roundtrip():
    ell = 0.3
    s = np.linspace(-20, 20, 11)
    d = collar.distance_from_core(ell, s)
    assert np.allclose(collar.coordinate_at_distance(ell, d), s, rtol=1e-12, atol=1e-12)


def test_thin_area_linear_in_delta():
    ratios = []
    for delta in (0.05, 0.1, 0.2, 0.4):
        for ell in (0.01, 0.02, 0.05):
            if ell >= 2 * delta:
                continue
            xd = collar.thin_cut(ell, delta)
            ratios.append(collar.collar_area(ell, -xd, xd) / delta)
    assert max(ratios) < 2.5 * min(ratios)
    assert max(ratios) < 10


@pytest.mark.parametrize("ell,delta", [(0.01, 0.1), (0.1, 0.3), (0.2, 0.5), (0.05, 0.8)])
def test_injectivity_between_rho_and_pi_rho(ell, delta):
    xd = collar.thin_cut(ell, delta)
    assert xd > 0
    r = collar.conformal_factor(ell, xd)
    assert r <= delta <= np.pi * r
    assert collar.injectivity_radius(ell, xd) == pytest.approx(delta, rel=1e-12)


def test_geometry_bundle():
    g = collar.CollarGeometry(0.2)
    assert g.is_short and not collar.CollarGeometry(2.0).is_short
    assert g.width == collar.width(0.2)
    assert g.area_between(-1, 1) == collar.collar_area(0.2, -1, 1)
    with pytest.raises(DomainError):
        collar.CollarGeometry(0.0)
