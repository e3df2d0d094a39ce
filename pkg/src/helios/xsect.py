"""Cross-section experiments: decomposing sphere scattering through Phi.

For a plane wave hitting a sphere, the scattered field splits as
u = u0 + v, where u0 radiates from the trace of the aperture field Phi
(boundary data -Phi, so u0 + Phi vanishes on the boundary) and v from the
small trace of Phi - e^{ikz}.  The module measures four things:

  * flux balance of the zero-data field w = Phi + u0: its incoming
    amplitude is Phi_in alone, its outgoing one u0_inf + Phi_out, so the
    two L2(S^2) norms agree; both combination signs are evaluated and the
    minimizer reported,
  * sigma_u0 = ||u0_inf||^2 against the computable area bound
    4 * eta_mass (quadrupled aperture mass, the screen analogue of four
    geometric cross sections),
  * smallness of v: its spectral H^{1/2} boundary norm, its cross section,
    and the Green-identity ||v_inf||^2 = (1/k) Im int (dv/dn) conj(v) dS,
    which is exact mode by mode for radiating fields,
  * moving window averages of cross-section sweeps over a wavenumber grid.

Normal derivatives of Phi on the sphere come from the closed-form kernel
gradients, never from finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, CheckFailed, WindowUnderresolved
from .incident import (
    PlanarAperture,
    _is_axis_rect,
    eval_grad_phi_pair,
    eval_phi_pair,
    phi_farfield_on_rule,
    plane_wave,
)
from .mie import (
    BOUNDARY_DATA,
    DIRICHLET,
    PartialWaveCoefficients,
    SphereObstacle,
    _bc,
    _require_real_k,
    far_field,
    parseval_sigma,
    scatter_boundary_data,
    sobolev_norm,
    sphere_transform,
)
from .quadrature import BoxRule, box_nodes_for_k, box_rule, sphere_rule
from .specfun import sph_bessel, truncation_lmax

__all__ = [
    "DecompositionReport",
    "ResidualReport",
    "project_on_sphere",
    "u0_experiment",
    "v_experiment",
    "window_average",
]

# lmax margin beyond the Mie truncation point; keeps the projection tail
# below the 1e-10 adequacy threshold for traces of wavenumber-k fields.
_LMAX_PAD = 6
# The v trace is itself superalgebraically small, so meeting the same
# relative tail bound takes more bands (each band gains ~e^-1 at ka ~ 80).
_LMAX_PAD_V = 24


@dataclass(frozen=True)
class DecompositionReport:
    """Energy bookkeeping of the u = u0 + v decomposition at one k."""

    k: float
    sigma_u0: float
    norm_phi_out: float
    norm_phi_in: float
    balance_residual: float
    bound_slack: float
    minimizing_sign: int
    eta_mass: float

    def __post_init__(self):
        if min(self.sigma_u0, self.norm_phi_out, self.norm_phi_in,
               self.balance_residual) < 0:
            raise CheckFailed("norms and residuals must be nonnegative")
        tri = (self.norm_phi_out + self.norm_phi_in) ** 2 + 1e-8
        if self.sigma_u0 > tri:
            raise CheckFailed(
                f"sigma_u0 = {self.sigma_u0:.6g} exceeds the triangle bound {tri:.6g}"
            )
        if self.minimizing_sign not in (-1, 1):
            raise CheckFailed(f"minimizing_sign must be +-1, got {self.minimizing_sign}")


@dataclass(frozen=True)
class ResidualReport:
    """Smallness measures of the correction field v at one k."""

    k: float
    v_boundary_norm: float
    sigma_v: float
    identity_residual: float

    def __post_init__(self):
        if min(self.v_boundary_norm, self.sigma_v, self.identity_residual) < 0:
            raise CheckFailed("norms and residuals must be nonnegative")


def project_on_sphere(field, obstacle: SphereObstacle, k: float, lmax: int) -> PartialWaveCoefficients:
    """Boundary-data coefficients f_lm = <field(a theta), Y_lm> on |r| = a.

    ``field`` maps an (n, 3) array of points to n values.  The sphere rule
    oversamples lmax by a fixed margin, so products against Y_lm up to
    degree lmax are integrated exactly; the tail-adequacy check rejects
    projections whose top bands still carry weight.
    """
    if lmax < 0:
        raise ArgumentError(f"lmax must be >= 0, got {lmax}")
    k = _require_real_k(k)
    rule = sphere_rule(lmax + 9, 2 * lmax + 18)
    values = np.asarray(field(obstacle.radius * rule.nodes), dtype=np.complex128)
    if values.shape != (rule.nodes.shape[0],):
        raise ArgumentError(
            f"field returned shape {values.shape}, expected ({rule.nodes.shape[0]},)"
        )
    coeffs = PartialWaveCoefficients(lmax, sphere_transform(rule, values, lmax), k, BOUNDARY_DATA)
    coeffs.require_tail()
    return coeffs


def _trace_box(aperture: PlanarAperture, k: float, pad: int = 0) -> BoxRule:
    """Aperture box rule sized for boundary traces.

    The balance and decay bars tolerate ~1e-6 trace quadrature, one notch
    below spectral_box_rule's 1e-8 calibration, which matters because the
    trace pass is the dominant cost of both experiments.
    """
    x0, x1, y0, y1 = aperture.bbox
    rect = _is_axis_rect(aperture)

    def n_axis(hw: float) -> int:
        ratio = hw / aperture.delta
        if rect:
            collar = math.ceil(95.0 * math.sqrt(ratio)) + 40
        else:
            collar = math.ceil(100.0 * ratio)
        return max(box_nodes_for_k(hw, k), collar)

    nx = n_axis((x1 - x0) / 2.0) + pad
    ny = n_axis((y1 - y0) / 2.0) + pad
    return box_rule(x0, x1, y0, y1, nx, ny)


def _phi_trace_on_rule(aperture: PlanarAperture, bc: str, k: float,
                       radius: float, rule, box: BoxRule) -> np.ndarray:
    """Trace of Phi (Dirichlet) or d(Phi)/dn (Neumann) at every rule node.

    Sphere rules pair rings z <-> -z node for node, so one mirror-aware
    kernel pass over the upper rings covers the whole sphere.
    """
    nt, nph = rule.n_theta, rule.n_phi
    pts = (radius * rule.nodes).reshape(nt, nph, 3)
    sel = np.arange(nt // 2, nt)
    mir = nt - 1 - sel
    pts_u = pts[sel].reshape(-1, 3)
    if _bc(bc) == DIRICHLET:
        up, dn = eval_phi_pair(aperture, k, pts_u, rule=box)
    else:
        gu, gd = eval_grad_phi_pair(aperture, k, pts_u, rule=box)
        nrm = pts_u / radius
        up = np.einsum("ij,ij->i", gu, nrm)
        dn = np.einsum("ij,ij->i", gd, nrm * np.array([1.0, 1.0, -1.0]))
    vals = np.empty((nt, nph), dtype=np.complex128)
    vals[sel] = up.reshape(len(sel), nph)
    vals[mir] = dn.reshape(len(sel), nph)
    return vals.ravel()


def _plane_trace_on_rule(bc: str, k: float, radius: float, rule) -> np.ndarray:
    """Same trace for the reference wave e^{ikz}."""
    pts = radius * rule.nodes
    pw = plane_wave(pts, k)
    if _bc(bc) == DIRICHLET:
        return pw
    return 1j * k * (pts[:, 2] / radius) * pw


def u0_experiment(obstacle: SphereObstacle, bc: str, aperture: PlanarAperture,
                  k: float, pad: int = 0) -> DecompositionReport:
    """Scatter the trace of -Phi and audit the energy balance.

    ``pad`` refines the aperture box rule and the far-field sphere rule
    without changing any physical parameter; the balance residual is
    monotone under it up to the quadrature noise floor.
    """
    k = _require_real_k(k)
    a = obstacle.radius
    lmax = truncation_lmax(k * a) + _LMAX_PAD
    box = _trace_box(aperture, k, pad)

    rule = sphere_rule(lmax + 9, 2 * lmax + 18)
    tvals = _phi_trace_on_rule(aperture, bc, k, a, rule, box)
    data = PartialWaveCoefficients(
        lmax, sphere_transform(rule, -tvals, lmax), k, BOUNDARY_DATA
    )
    data.require_tail()
    u0 = scatter_boundary_data(obstacle, bc, k, data)
    sigma_u0 = parseval_sigma(u0)

    x0, x1, y0, y1 = aperture.bbox
    q_max = math.hypot(max(abs(x0), abs(x1)), max(abs(y0), abs(y1)))
    n_theta = max(lmax + 1, math.ceil(k * q_max)) + 32 + pad
    sr = sphere_rule(n_theta, 2 * n_theta)
    w = sr.weights
    u0_inf = far_field(u0, rule=sr).values
    phi_out = phi_farfield_on_rule(aperture, k, sr, "out", box=box)
    phi_in = phi_farfield_on_rule(aperture, k, sr, "in", box=box)

    norm_out = math.sqrt(float(np.sum(w * np.abs(phi_out) ** 2)))
    norm_in = math.sqrt(float(np.sum(w * np.abs(phi_in) ** 2)))
    residuals = {
        s: abs(norm_in - math.sqrt(float(np.sum(w * np.abs(u0_inf + s * phi_out) ** 2)))) / norm_in
        for s in (1, -1)
    }
    sign = 1 if residuals[1] <= residuals[-1] else -1
    return DecompositionReport(
        k=k,
        sigma_u0=sigma_u0,
        norm_phi_out=norm_out,
        norm_phi_in=norm_in,
        balance_residual=residuals[sign],
        bound_slack=4.0 * aperture.eta_mass - sigma_u0,
        minimizing_sign=sign,
        eta_mass=aperture.eta_mass,
    )


def v_experiment(obstacle: SphereObstacle, bc: str, aperture: PlanarAperture,
                 k: float, pad: int = 0) -> ResidualReport:
    """Scatter the trace of Phi - e^{ikz} and measure how small v is.

    The Green-identity residual compares ||v_inf||^2 with
    (1/k) Im int (dv/dn) conj(v) dS, both rebuilt from the one set of
    projected coefficients, so it isolates pure arithmetic error.
    """
    k = _require_real_k(k)
    a = obstacle.radius
    lmax = truncation_lmax(k * a) + _LMAX_PAD_V
    box = _trace_box(aperture, k, pad)

    rule = sphere_rule(lmax + 9, 2 * lmax + 18)
    tvals = _phi_trace_on_rule(aperture, bc, k, a, rule, box)
    tvals -= _plane_trace_on_rule(bc, k, a, rule)
    data = PartialWaveCoefficients(
        lmax, sphere_transform(rule, tvals, lmax), k, BOUNDARY_DATA
    )
    data.require_tail()
    b = scatter_boundary_data(obstacle, bc, k, data)
    sigma_v = parseval_sigma(b)

    h = sph_bessel("h1", lmax, k * a)
    ls = np.repeat(np.arange(lmax + 1), 2 * np.arange(lmax + 1) + 1)
    if _bc(bc) == DIRICHLET:
        trace_lm = data.coeffs
        dn_lm = b.coeffs * (k * h.derivatives[ls])
    else:
        trace_lm = b.coeffs * h.values[ls]
        dn_lm = data.coeffs
    pairing = (a * a / k) * float(np.sum(np.imag(dn_lm * np.conj(trace_lm))))
    identity_residual = abs(sigma_v - pairing) / max(sigma_v, 1e-30)

    trace_coeffs = PartialWaveCoefficients(lmax, trace_lm, k, BOUNDARY_DATA)
    return ResidualReport(
        k=k,
        v_boundary_norm=sobolev_norm(trace_coeffs, 0.5, radius=a),
        sigma_v=sigma_v,
        identity_residual=identity_residual,
    )


def window_average(k_grid, values, alpha):
    """Moving average (1/2 alpha) * integral_{k-alpha}^{k+alpha} of values.

    The integral is the exact one of the piecewise-linear interpolant
    (trapezoid rule with interpolated partial end segments).  ``alpha`` is
    a positive scalar or a callable of k.  Points whose window leaves the
    grid come back NaN rather than extrapolated; windows covered more
    coarsely than alpha/8 raise WindowUnderresolved.
    """
    kg = np.asarray(k_grid, dtype=np.float64)
    vals = np.asarray(values, dtype=np.float64)
    if kg.ndim != 1 or kg.size < 2:
        raise ArgumentError("k_grid must be a 1-d array with at least 2 points")
    if vals.shape != kg.shape:
        raise ArgumentError(f"values shape {vals.shape} does not match grid {kg.shape}")
    gaps = np.diff(kg)
    if np.any(gaps <= 0):
        raise ArgumentError("k_grid must be strictly increasing")
    if not (np.all(np.isfinite(kg)) and np.all(np.isfinite(vals))):
        raise ArgumentError("k_grid and values must be finite")
    alpha_of = alpha if callable(alpha) else (lambda _t, _a=float(alpha): _a)

    cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * gaps)])

    def integral_to(t: float) -> float:
        j = int(np.clip(np.searchsorted(kg, t, side="right") - 1, 0, kg.size - 2))
        vt = vals[j] + (vals[j + 1] - vals[j]) * (t - kg[j]) / gaps[j]
        return float(cum[j]) + 0.5 * (vals[j] + vt) * (t - kg[j])

    out = np.full(kg.shape, np.nan)
    for i, kc in enumerate(kg):
        al = float(alpha_of(kc))
        if not (al > 0) or not math.isfinite(al):
            raise ArgumentError(f"alpha({kc}) = {al} must be a positive finite number")
        lo, hi = kc - al, kc + al
        if lo < kg[0] - 1e-12 * al or hi > kg[-1] + 1e-12 * al:
            continue
        inside = (kg[1:] > lo) & (kg[:-1] < hi)
        if np.any(gaps[inside] > al / 8.0):
            raise WindowUnderresolved(
                f"grid spacing {np.max(gaps[inside]):.6g} exceeds alpha/8 = {al / 8.0:.6g} "
                f"in the window around k = {kc:.6g}"
            )
        out[i] = (integral_to(hi) - integral_to(lo)) / (2.0 * al)
    return out
