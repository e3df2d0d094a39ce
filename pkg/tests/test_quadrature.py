import numpy as np
import pytest
from numpy.testing import assert_allclose

from helios.errors import ArgumentError, DegeneratePolygon
from helios.quadrature import (
    aperture_rule,
    dist_to_boundary,
    ear_clip,
    gauss_legendre,
    point_in_polygon,
    polygon_area,
    sphere_rule,
)
from helios.specfun import sph_harmonic

E_MINUS_INV_E = 2.3504023872876028    # integral of e^x over [-1, 1]
FOUR_PI = 12.566370614359172

SQUARE4 = [(-2.0, -2.0), (2.0, -2.0), (2.0, 2.0), (-2.0, 2.0)]


def test_gauss_two_point():
    rule = gauss_legendre(2)
    assert_allclose(rule.nodes, [-0.5773502691896258, 0.5773502691896258], rtol=1e-14)
    assert_allclose(rule.weights, [1.0, 1.0], rtol=1e-14)


def test_gauss_degree_five_exactness():
    rule = gauss_legendre(3)
    assert_allclose(np.sum(rule.weights * rule.nodes**4), 0.4, atol=1e-14)


def test_gauss_exponential():
    rule = gauss_legendre(64)
    assert_allclose(np.sum(rule.weights * np.exp(rule.nodes)), E_MINUS_INV_E, rtol=1e-13)


def test_gauss_invariants():
    for n in (1, 2, 7, 33):
        rule = gauss_legendre(n)
        assert abs(np.sum(rule.weights) - 2.0) <= 1e-13
        assert np.all(np.diff(rule.nodes) > 0)
        assert np.all(rule.weights > 0)


def test_gauss_rejects_nonpositive_n():
    with pytest.raises(ArgumentError):
        gauss_legendre(0)


def test_sphere_rule_total():
    rule = sphere_rule(8, 16)
    assert_allclose(rule.total, FOUR_PI, atol=1e-12)


def test_sphere_rule_second_moment():
    rule = sphere_rule(8, 16)
    val = np.sum(rule.weights * rule.nodes[:, 2] ** 2)
    assert_allclose(val, FOUR_PI / 3.0, rtol=1e-13)


def test_sphere_rule_gram_identity():
    rule = sphere_rule(16, 32)
    modes = [(l, m) for l in range(13) for m in range(-l, l + 1)]
    theta = np.arccos(np.clip(rule.nodes[:, 2], -1.0, 1.0))
    phi = np.arctan2(rule.nodes[:, 1], rule.nodes[:, 0])
    basis = np.stack([sph_harmonic(l, m, theta, phi) for l, m in modes])
    gram = (basis * rule.weights) @ basis.conj().T
    assert np.max(np.abs(gram - np.eye(len(modes)))) <= 1e-10


def test_sphere_rule_rejects_small():
    with pytest.raises(ArgumentError):
        sphere_rule(1, 16)
    with pytest.raises(ArgumentError):
        sphere_rule(8, 2)


def test_aperture_rule_area():
    unit = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    rule = aperture_rule(unit, 1.0)
    assert_allclose(np.sum(rule.weights), 1.0, atol=1e-12)


def test_aperture_rule_monomial_moment():
    rule = aperture_rule(SQUARE4, 2.0)
    # x^2 over side-4 square: side^4 / 12
    assert_allclose(np.sum(rule.weights * rule.nodes[:, 0] ** 2), 256.0 / 12.0, rtol=1e-10)


def test_aperture_rule_oscillatory_self_convergence():
    vals = {}
    for ppw in (10.0, 20.0):
        rule = aperture_rule(SQUARE4, 40.0, ppw)
        r = np.hypot(rule.nodes[:, 0], rule.nodes[:, 1])
        f = 40.0 * np.sinc(40.0 * r / np.pi)  # sin(40 r)/r completed at r = 0
        vals[ppw] = np.sum(rule.weights * f)
    assert abs(vals[10.0] - vals[20.0]) <= 1e-6 * abs(vals[20.0])


def test_aperture_rule_nodes_inside():
    rule = aperture_rule(SQUARE4, 5.0)
    assert np.all(rule.weights > 0)
    assert np.all(point_in_polygon(rule.nodes, SQUARE4))
    assert np.min(dist_to_boundary(rule.nodes, SQUARE4)) > 0


def test_aperture_rule_rejects_degenerate():
    with pytest.raises(DegeneratePolygon):
        aperture_rule([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], 1.0)


def test_polygon_helpers():
    assert_allclose(polygon_area(SQUARE4), 16.0, rtol=1e-14)
    tris = ear_clip(SQUARE4)
    assert len(tris) == 2
    area = 0.0
    for ia, ib, ic in tris:
        a, b, c = SQUARE4[ia], SQUARE4[ib], SQUARE4[ic]
        area += 0.5 * abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    assert_allclose(area, 16.0, rtol=1e-13)
