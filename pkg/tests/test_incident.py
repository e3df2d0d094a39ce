"""Tests for the aperture-driven incident field."""

import numpy as np
import numpy.testing as npt
import pytest

from helios.errors import UnresolvedOscillation
from helios.incident import (
    eval_grad_phi,
    eval_p,
    eval_p_z,
    eval_phi,
    phi_farfield,
    phi_farfield_norms,
    plane_wave,
    shadow_aperture,
    smooth_step,
    spectral_box_rule,
    square_aperture,
)
from helios.quadrature import aperture_rule

# Free-space reference for the on-axis pressure of a fully open square:
# with the window identically 1 the kernel integrates to (2 pi / k) cos(k z)
# up to edge terms, so at z = 0.3, k = 40 the value is 2 pi cos(12) / 40.
P_ON_AXIS_REF = 2.0 * np.pi * np.cos(12.0) / 40.0


def test_smooth_step_bounds_and_endpoints():
    t = np.linspace(-1.0, 2.0, 201)
    s = smooth_step(t)
    assert np.all(s >= 0.0) and np.all(s <= 1.0)
    npt.assert_allclose(s[t <= 0.0], 0.0, atol=0.0)
    npt.assert_allclose(s[t >= 1.0], 1.0, atol=0.0)
    # non-decreasing everywhere, strictly increasing away from the blend tails
    assert np.all(np.diff(s) >= 0.0)
    inner = s[(t > 0.1) & (t < 0.9)]
    assert np.all(np.diff(inner) > 0.0)


def test_eta_profile_collar():
    ap = square_aperture(8.0, 1.5)
    # inside the collar: hard zero, beyond twice the width: exactly one
    pts_edge = np.array([[4.0 - 0.4 * 1.5, 0.0], [0.0, -4.0 + 0.6]])
    pts_core = np.array([[0.0, 0.0], [4.0 - 3.2 * 1.5, 0.0]])
    pts_mid = np.array([[4.0 - 1.5 * 1.5, 0.0]])
    npt.assert_allclose(ap.eta(pts_edge), 0.0, atol=0.0)
    npt.assert_allclose(ap.eta(pts_core), 1.0, atol=0.0)
    mid = ap.eta(pts_mid)
    assert np.all((mid > 0.0) & (mid < 1.0))


def test_shadow_aperture_covers_unit_disc():
    ap = shadow_aperture(1.0)
    th = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    rim = np.stack([np.cos(th), np.sin(th)], axis=1)
    npt.assert_allclose(ap.eta(rim), 1.0, atol=0.0)


def test_plane_wave_values():
    pts = np.array([[0.3, -0.2, 0.0], [0.0, 0.0, 0.25]])
    vals = plane_wave(pts, 2.0)
    npt.assert_allclose(vals, [1.0, np.exp(0.5j)], rtol=1e-15)


def test_p_even_in_z():
    ap = square_aperture(4.0, 0.5)
    rule = spectral_box_rule(ap, 30.0)
    pts = np.array([[0.2, -0.1, 0.7], [0.0, 0.4, 1.3]])
    mirrored = pts * np.array([1.0, 1.0, -1.0])
    up = eval_p(ap, 30.0, pts, rule=rule)
    down = eval_p(ap, 30.0, mirrored, rule=rule)
    # symmetry of the kernel in z, not a quadrature coincidence
    npt.assert_array_equal(up, down)


def test_p_on_axis_reference_value():
    ap = square_aperture(4.0, 0.5)
    rule = spectral_box_rule(ap, 40.0)
    val = eval_p(ap, 40.0, np.array([[0.0, 0.0, 0.3]]), rule=rule)[0]
    assert abs(val - P_ON_AXIS_REF) <= 1e-3


def test_p_and_phi_satisfy_helmholtz():
    # 7-point second differences; the bar tracks the h^2 k^4 truncation term
    ap = square_aperture(4.0, 0.5)
    k, h = 40.0, 1e-3
    rule = spectral_box_rule(ap, k)
    center = np.array([0.2, 0.1, 0.5])
    offs = [np.zeros(3)]
    for ax in range(3):
        for s in (-1.0, 1.0):
            e = np.zeros(3)
            e[ax] = s * h
            offs.append(e)
    pts = center[None, :] + np.array(offs)
    for field in (eval_p, eval_phi):
        f = field(ap, k, pts, rule=rule)
        lap = (f[1:].sum() - 6.0 * f[0]) / h**2
        resid = abs(lap + k**2 * f[0])
        assert resid <= 1e-2 * k**2 * abs(f[0]) + 1e-4


def test_phi_matches_plane_wave_in_core():
    # interior quality of the default shadow aperture at a moderate wavenumber
    ap = shadow_aperture(1.0)
    k = 40.0
    rule = spectral_box_rule(ap, k)
    pts = np.array(
        [
            [0.0, 0.0, 0.45],
            [0.5, 0.5, 0.2],
            [-0.5, 0.25, 0.7],
            [0.25, -0.5, 0.32],
            [-0.25, 0.0, 0.58],
        ]
    )
    dev = np.abs(eval_phi(ap, k, pts, rule=rule) - plane_wave(pts, k))
    assert dev.max() <= 1e-3


def test_phi_small_outside_cylinder():
    ap = square_aperture(4.0, 0.5)
    k = 60.0
    rule = spectral_box_rule(ap, k)
    pts = np.array([[3.2, 0.0, 0.5], [3.0, 1.0, 0.2], [0.0, -3.5, 1.0]])
    vals = eval_phi(ap, k, pts, rule=rule)
    assert np.abs(vals).max() <= 0.05


def test_phi_analytic_in_k():
    # Cauchy-Riemann quotient along two axes agrees for complex wavenumber
    ap = square_aperture(4.0, 0.5)
    kc = 10.0 + 0.3j
    hk = 1e-4
    rule = spectral_box_rule(ap, 12.0)
    pt = np.array([[0.2, 0.1, 0.5]])

    def f(k):
        return eval_phi(ap, k, pt, rule=rule)[0]

    d_re = (f(kc + hk) - f(kc - hk)) / (2.0 * hk)
    d_im = (f(kc + 1j * hk) - f(kc - 1j * hk)) / (2.0 * 1j * hk)
    assert abs(d_re - d_im) / abs(d_re) <= 1e-4


def test_grad_phi_consistent_with_differences():
    ap = square_aperture(4.0, 0.5)
    k, h = 12.0, 1e-5
    rule = spectral_box_rule(ap, k)
    pt = np.array([0.15, -0.3, 0.6])
    grad = eval_grad_phi(ap, k, pt[None, :], rule=rule)[0]
    for ax in range(3):
        e = np.zeros(3)
        e[ax] = h
        two = np.array([pt + e, pt - e])
        vals = eval_phi(ap, k, two, rule=rule)
        fd = (vals[0] - vals[1]) / (2.0 * h)
        assert abs(fd - grad[ax]) <= 1e-6 * max(1.0, abs(grad[ax]))


def test_p_z_matches_difference_quotient():
    ap = square_aperture(4.0, 0.5)
    k, h = 15.0, 1e-5
    rule = spectral_box_rule(ap, k)
    pt = np.array([[0.1, 0.2, 0.4]])
    dz = eval_p_z(ap, k, pt, rule=rule)[0]
    up = eval_p(ap, k, pt + [0.0, 0.0, h], rule=rule)[0]
    dn = eval_p(ap, k, pt - [0.0, 0.0, h], rule=rule)[0]
    assert abs((up - dn) / (2.0 * h) - dz) <= 1e-6 * abs(dz)


def test_farfield_poles_and_mirror_symmetry():
    ap = square_aperture(4.0, 0.5)
    k = 20.0
    # each wave is supported on one hemisphere of directions
    out_dn = phi_farfield(ap, k, np.array([[0.0, 0.0, -1.0]]), which="out")
    in_up = phi_farfield(ap, k, np.array([[0.0, 0.0, 1.0]]), which="in")
    npt.assert_array_equal(out_dn, 0.0)
    npt.assert_array_equal(in_up, 0.0)

    rng = np.random.default_rng(7)
    th = np.arccos(rng.uniform(0.05, 0.95, size=50))
    ph = rng.uniform(0.0, 2.0 * np.pi, size=50)
    dirs = np.stack(
        [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1
    )
    out = phi_farfield(ap, k, dirs, which="out")
    inc = phi_farfield(ap, k, dirs * [1.0, 1.0, -1.0], which="in")
    npt.assert_allclose(np.abs(out), np.abs(inc), atol=1e-10)


def test_farfield_stable_under_ppw_doubling():
    ap = square_aperture(4.0, 0.5)
    k = 20.0
    th = np.linspace(0.1, 1.4, 9)
    dirs = np.stack([np.sin(th), np.zeros_like(th), np.cos(th)], axis=1)
    lo = phi_farfield(ap, k, dirs, which="out", ppw=10.0)
    hi = phi_farfield(ap, k, dirs, which="out", ppw=20.0)
    assert np.abs(lo - hi).max() <= 1e-6


def test_farfield_norms_balance_and_mass():
    ap = square_aperture(4.0, 0.5)
    norms20 = phi_farfield_norms(ap, 20.0)
    rel = abs(norms20.norm_out_sq - norms20.norm_in_sq) / norms20.norm_out_sq
    assert rel <= 1e-8
    # mass of the window is the k -> infinity limit of either hemisphere norm;
    # the eroded and dilated squares bound it
    assert 4.0 <= norms20.eta_mass <= 16.0
    norms40 = phi_farfield_norms(ap, 40.0)
    r20 = abs(norms20.norm_out_sq - norms20.eta_mass)
    r40 = abs(norms40.norm_out_sq - norms40.eta_mass)
    assert r40 <= 0.7 * r20
    assert r20 * 20.0 <= 2.0 and r40 * 40.0 <= 2.0


def test_spectral_box_rule_padding_converged():
    ap = square_aperture(4.0, 0.5)
    k = 25.0
    pts = np.array([[0.2, 0.1, 0.5], [0.0, 0.0, 0.3]])
    base = eval_phi(ap, k, pts, rule=spectral_box_rule(ap, k))
    wide = eval_phi(ap, k, pts, rule=spectral_box_rule(ap, k, pad=40))
    assert np.abs(base - wide).max() <= 1e-6


def test_underresolved_rule_rejected():
    ap = square_aperture(4.0, 0.5)
    rule = aperture_rule(ap.vertices, 5.0)
    with pytest.raises(UnresolvedOscillation):
        eval_p(ap, 60.0, np.array([[0.0, 0.0, 0.5]]), rule=rule)
