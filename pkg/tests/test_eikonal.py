"""Tests for the two-corridor eikonal model and its resonance comb."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from helios.eikonal import (
    ap_geometry,
    eikonal_sigma,
    eikonal_sigma_farfield,
    eikonal_spectrum,
    invisible_k,
    resonant_k,
)
from helios.errors import ArgumentError, UnresolvedOscillation

SQRT3_OVER_4 = 0.4330127018922193
FIRST_RESONANCE = 7.255197456936871  # 4 pi / sqrt(3)


def _dist(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])


def test_geometry_scales():
    g = ap_geometry()
    assert abs(g.Delta - SQRT3_OVER_4) <= 1e-15
    assert g.Theta == 0.5
    assert g.depth == 1.0
    v = g.vertices
    assert set(v) == {"A", "A'", "A''", "B", "B'", "B''", "G"}
    npt.assert_allclose(_dist(v["A"], v["B"]), 1.0, atol=1e-15)
    npt.assert_allclose(_dist(v["A''"], v["B''"]), 0.5, atol=1e-15)
    npt.assert_allclose(_dist(v["A"], v["A'"]), math.sqrt(3.0) / 2.0, atol=1e-15)
    # the shifted corridors carry exactly the Theta fraction of the face
    shifted = sum(hi - lo for lo, hi in g.shifted_region)
    npt.assert_allclose(shifted, g.Theta, atol=1e-15)


def test_first_resonance_value():
    npt.assert_allclose(resonant_k(0), FIRST_RESONANCE, rtol=1e-15)
    assert invisible_k(0) == 0.0


def test_comb_hits_exact_extremes():
    for k0 in (0.0, 1.0, math.pi, 5.5):
        for n in range(2, 13):
            assert abs(eikonal_sigma(resonant_k(n, k0), k0) - 2.0) <= 1e-12
            assert abs(eikonal_sigma(invisible_k(n, k0), k0)) <= 1e-12


def test_comb_interlaces():
    for k0 in (0.0, 1.0, math.pi, 5.5):
        for n in range(2, 13):
            assert invisible_k(n, k0) < resonant_k(n, k0) < invisible_k(n + 1, k0)


def test_sigma_range_and_quarter_phase():
    assert eikonal_sigma(0.0) == 0.0
    # delta = pi/2 puts the two corridors in quadrature
    npt.assert_allclose(eikonal_sigma(resonant_k(0) / 2.0), 1.0, rtol=1e-12)
    ks = np.linspace(0.0, 60.0, 601)
    vals = np.array([eikonal_sigma(k) for k in ks])
    assert vals.min() >= 0.0 and vals.max() <= 2.0 + 1e-12


def test_sigma_periodic_in_k():
    g = ap_geometry()
    period = 2.0 * math.pi / g.Delta
    for k in (3.7, 13.7, 41.2):
        assert abs(eikonal_sigma(k + period) - eikonal_sigma(k)) <= 1e-12


def test_spectrum_sweep_consistent():
    kg = np.linspace(30.0, 60.0, 3001)
    sp = eikonal_spectrum(kg, 1.5)
    npt.assert_allclose(
        sp.sigma, [eikonal_sigma(k, 1.5) for k in kg], atol=1e-14
    )
    assert sp.k0 == 1.5
    for r in sp.resonances:
        assert 30.0 <= r <= 60.0
        assert abs(eikonal_sigma(r, 1.5) - 2.0) <= 1e-12
    for v in sp.invisibles:
        assert 30.0 <= v <= 60.0
        assert abs(eikonal_sigma(v, 1.5)) <= 1e-12
    # one resonance strictly between consecutive invisibles
    assert len(sp.resonances) in (len(sp.invisibles), len(sp.invisibles) + 1)


def test_farfield_approaches_plancherel():
    gaps = {}
    for k in (25.0, 50.0, 75.0, 100.0):
        ff = eikonal_sigma_farfield(k)
        pl = eikonal_sigma(k)
        gaps[k] = abs(ff - pl) / pl
    assert gaps[50.0] <= 0.03
    assert gaps[75.0] <= 0.03
    assert gaps[100.0] <= 0.03
    assert gaps[100.0] <= gaps[25.0]


def test_farfield_requires_resolved_rule():
    with pytest.raises(UnresolvedOscillation):
        eikonal_sigma_farfield(60.0, n_theta=6)


def test_argument_guards():
    with pytest.raises(ArgumentError):
        eikonal_sigma(-1.0)
    with pytest.raises(ArgumentError):
        resonant_k(-1)
    with pytest.raises(ArgumentError):
        invisible_k(-2)
    with pytest.raises(ArgumentError):
        eikonal_sigma_farfield(0.0)
    with pytest.raises(ArgumentError):
        eikonal_sigma_farfield(60.0, n_theta=3)
