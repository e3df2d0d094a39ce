"""Desk-scale numerics for high-frequency exterior Helmholtz scattering.

The package walks one chain of quantitative statements about scattering
at large wavenumber: spherical special functions and quadrature rules
(specfun, quadrature), a quasi-plane-wave field radiated by a flat
aperture (incident), partial-wave scattering and Neumann-to-Dirichlet
norms for the sphere (mie), the u = u0 + v energy decomposition with
its cross-section bound and window averages (xsect), and the eikonal
resonance spectrum of a two-strip phase-shifting body (eikonal).  The
cli module drives parameter sweeps and writes CSV plus manifests.
"""

__version__ = "0.1.0"

from .errors import (
    ArgumentError,
    CheckFailed,
    ConfigError,
    DegeneratePolygon,
    DomainError,
    HeliosError,
    MeaningMismatch,
    SectorViolation,
    StabilityLoss,
    TailNotResolved,
    UnresolvedOscillation,
    WindowUnderresolved,
    ZeroArgument,
)
from .specfun import (
    BesselSequence,
    legendre_p,
    norm_assoc_legendre,
    sph_bessel,
    sph_harmonic,
    truncation_lmax,
)
from .quadrature import (
    ApertureRule,
    BoxRule,
    Rule1D,
    SphereRule,
    aperture_rule,
    box_rule,
    dist_to_boundary,
    ear_clip,
    gauss_legendre,
    point_in_polygon,
    polygon_area,
    sphere_rule,
)
from .incident import (
    FarFieldNorms,
    FarFieldSamples,
    PlanarAperture,
    eval_grad_phi,
    eval_grad_phi_pair,
    eval_p,
    eval_p_z,
    eval_phi,
    eval_phi_pair,
    phi_farfield,
    phi_farfield_norms,
    phi_farfield_on_rule,
    plane_wave,
    shadow_aperture,
    smooth_step,
    spectral_box_rule,
    square_aperture,
)
from .mie import (
    BOUNDARY_DATA,
    RADIATING_FIELD,
    NtdNorms,
    PartialWaveCoefficients,
    SphereObstacle,
    far_field,
    far_field_rule,
    ntd_eigenvalues,
    ntd_norms,
    optical_theorem_residual,
    parseval_sigma,
    plane_wave_trace,
    reflection_coeffs,
    scatter_boundary_data,
    scattering_coeffs,
    sobolev_norm,
    sphere_transform,
    total_cross_section,
)
from .xsect import (
    DecompositionReport,
    ResidualReport,
    project_on_sphere,
    u0_experiment,
    v_experiment,
    window_average,
)
from .eikonal import (
    APGeometry,
    EikonalSpectrum,
    ap_geometry,
    eikonal_sigma,
    eikonal_sigma_farfield,
    eikonal_spectrum,
    invisible_k,
    resonant_k,
)

__all__ = [
    "__version__",
    # errors
    "HeliosError",
    "ZeroArgument",
    "StabilityLoss",
    "DomainError",
    "ArgumentError",
    "DegeneratePolygon",
    "UnresolvedOscillation",
    "MeaningMismatch",
    "TailNotResolved",
    "SectorViolation",
    "WindowUnderresolved",
    "ConfigError",
    "CheckFailed",
    # specfun
    "BesselSequence",
    "sph_bessel",
    "legendre_p",
    "norm_assoc_legendre",
    "sph_harmonic",
    "truncation_lmax",
    # quadrature
    "Rule1D",
    "SphereRule",
    "ApertureRule",
    "BoxRule",
    "gauss_legendre",
    "sphere_rule",
    "aperture_rule",
    "box_rule",
    "polygon_area",
    "point_in_polygon",
    "dist_to_boundary",
    "ear_clip",
    # incident
    "PlanarAperture",
    "square_aperture",
    "shadow_aperture",
    "smooth_step",
    "spectral_box_rule",
    "FarFieldSamples",
    "FarFieldNorms",
    "eval_p",
    "eval_p_z",
    "eval_phi",
    "eval_phi_pair",
    "eval_grad_phi",
    "eval_grad_phi_pair",
    "phi_farfield",
    "phi_farfield_norms",
    "phi_farfield_on_rule",
    "plane_wave",
    # mie
    "BOUNDARY_DATA",
    "RADIATING_FIELD",
    "SphereObstacle",
    "PartialWaveCoefficients",
    "NtdNorms",
    "reflection_coeffs",
    "scattering_coeffs",
    "plane_wave_trace",
    "scatter_boundary_data",
    "far_field",
    "far_field_rule",
    "sphere_transform",
    "parseval_sigma",
    "total_cross_section",
    "optical_theorem_residual",
    "ntd_eigenvalues",
    "ntd_norms",
    "sobolev_norm",
    # xsect
    "DecompositionReport",
    "ResidualReport",
    "project_on_sphere",
    "u0_experiment",
    "v_experiment",
    "window_average",
    # eikonal
    "APGeometry",
    "EikonalSpectrum",
    "ap_geometry",
    "resonant_k",
    "invisible_k",
    "eikonal_sigma",
    "eikonal_sigma_farfield",
    "eikonal_spectrum",
]
