"""Quadrature rules: interval, unit sphere, and planar polygonal apertures.

Oscillatory integrands are handled by brute-force densification (enough
points per wavelength), never by specialized oscillatory rules; accuracy is
then a matter of counting nodes, which the rules expose through
``k_resolved``.  All weights are strictly positive and node generation is
deterministic, so repeated runs produce bit-identical sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DegeneratePolygon

__all__ = [
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
]

# Gauss points per subtriangle direction; together with the edge-length
# target this realizes the requested points-per-wavelength density.
N_GAUSS_TRI = 5


@dataclass(frozen=True)
class Rule1D:
    """Nodes and weights on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray


def gauss_legendre(n: int) -> Rule1D:
    """Gauss-Legendre rule with ``n`` nodes, exact through degree 2n-1."""
    if n < 1:
        raise ArgumentError(f"need at least one node, got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    return Rule1D(x, w)


def _gauss01(n: int):
    """Gauss-Legendre shifted to (0, 1); nodes are strictly interior."""
    r = gauss_legendre(n)
    return 0.5 * (r.nodes + 1.0), 0.5 * r.weights


@dataclass(frozen=True)
class SphereRule:
    """Tensor rule on the unit sphere: Gauss-Legendre in cos(theta), uniform in phi.

    Exact for spherical polynomials: integrates Y_lm * conj(Y_l'm') exactly
    whenever l, l' < n_theta and n_phi > l + l'.  Node layout is the
    (theta_i, phi_j) grid flattened row-major.
    """

    cos_theta: np.ndarray
    w_theta: np.ndarray
    phi: np.ndarray
    w_phi: float

    @property
    def n_theta(self) -> int:
        return len(self.cos_theta)

    @property
    def n_phi(self) -> int:
        return len(self.phi)

    @property
    def weights(self) -> np.ndarray:
        return np.repeat(self.w_theta * self.w_phi, self.n_phi)

    @property
    def nodes(self) -> np.ndarray:
        """Unit vectors, shape (n_theta * n_phi, 3)."""
        st = np.sqrt(1.0 - self.cos_theta**2)
        cp, sp = np.cos(self.phi), np.sin(self.phi)
        out = np.empty((self.n_theta, self.n_phi, 3))
        out[:, :, 0] = st[:, None] * cp[None, :]
        out[:, :, 1] = st[:, None] * sp[None, :]
        out[:, :, 2] = self.cos_theta[:, None]
        return out.reshape(-1, 3)

    @property
    def total(self) -> float:
        return float(np.sum(self.w_theta) * self.w_phi * self.n_phi)


def sphere_rule(n_theta: int, n_phi: int) -> SphereRule:
    """Product rule with ``n_theta`` Gauss nodes and ``n_phi`` uniform azimuths."""
    if n_theta < 2 or n_phi < 4:
        raise ArgumentError("sphere rule needs n_theta >= 2 and n_phi >= 4")
    r = gauss_legendre(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    return SphereRule(r.nodes, r.weights, phi, 2.0 * np.pi / n_phi)


# ----------------------------------------------------------------------
# polygon geometry
# ----------------------------------------------------------------------


def _as_vertices(polygon) -> np.ndarray:
    v = np.asarray(polygon, dtype=np.float64)
    if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
        raise DegeneratePolygon("polygon needs at least 3 planar vertices")
    if not np.all(np.isfinite(v)):
        raise DegeneratePolygon("non-finite vertex")
    return v


def polygon_area(polygon) -> float:
    """Signed shoelace area (positive for counterclockwise order)."""
    v = _as_vertices(polygon)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_cross(p, q, r, s) -> bool:
    """Proper intersection of open segments pq and rs."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(p, q, r), orient(p, q, s)
    d3, d4 = orient(r, s, p), orient(r, s, q)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _validate_simple(v: np.ndarray) -> None:
    n = len(v)
    scale = float(np.max(np.abs(v))) + 1.0
    for i in range(n):
        if np.linalg.norm(v[i] - v[(i + 1) % n]) < 1e-12 * scale:
            raise DegeneratePolygon(f"repeated vertices at index {i}")
    if abs(polygon_area(v)) < 1e-12 * scale**2:
        raise DegeneratePolygon("polygon area is numerically zero")
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                raise DegeneratePolygon(f"edges {i} and {j} intersect")


def point_in_polygon(points, polygon) -> np.ndarray:
    """Crossing-number test; boundary points count as inside.

    ``points`` has shape (..., 2); returns booleans of shape (...,).
    """
    v = _as_vertices(polygon)
    p = np.asarray(points, dtype=np.float64)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    inside = np.zeros(len(p), dtype=bool)
    x, y = p[:, 0], p[:, 1]
    n = len(v)
    on_edge = np.zeros(len(p), dtype=bool)
    for i in range(n):
        x1, y1 = v[i]
        x2, y2 = v[(i + 1) % n]
        cond = (y1 <= y) != (y2 <= y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xin = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= cond & (x < np.where(cond, xin, np.inf))
        # boundary capture
        dx, dy = x2 - x1, y2 - y1
        L2 = dx * dx + dy * dy
        t = np.clip(((x - x1) * dx + (y - y1) * dy) / L2, 0.0, 1.0)
        d2 = (x1 + t * dx - x) ** 2 + (y1 + t * dy - y) ** 2
        on_edge |= d2 < (1e-14 * (1.0 + L2)) ** 2
    out = inside | on_edge
    return out[0] if single else out


def dist_to_boundary(points, polygon) -> np.ndarray:
    """Euclidean distance to the polygon boundary (min over edges)."""
    v = _as_vertices(polygon)
    p = np.atleast_2d(np.asarray(points, dtype=np.float64))
    best = np.full(len(p), np.inf)
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        ab = b - a
        L2 = float(ab @ ab)
        t = np.clip(((p - a) @ ab) / L2, 0.0, 1.0)
        proj = a + t[:, None] * ab
        d = np.linalg.norm(p - proj, axis=1)
        best = np.minimum(best, d)
    if np.asarray(points).ndim == 1:
        return best[0]
    return best


def ear_clip(polygon) -> list[tuple[int, int, int]]:
    """Triangulate a simple polygon by ear clipping.

    Works on the counterclockwise-ordered vertex list; at each step the ear
    with the smallest working index is clipped, so the output is
    deterministic.  Returns index triples into the CCW list.
    """
    v = _as_vertices(polygon)
    _validate_simple(v)
    if polygon_area(v) < 0:
        v = v[::-1]
    idx = list(range(len(v)))
    tris: list[tuple[int, int, int]] = []
    scale = float(np.max(np.abs(v))) + 1.0
    eps = 1e-12 * scale * scale

    def is_ear(pos: int) -> bool:
        i0, i1, i2 = idx[pos - 1], idx[pos], idx[(pos + 1) % len(idx)]
        a, b, c = v[i0], v[i1], v[i2]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if cross <= eps:  # reflex or collinear corner
            return False
        for other in idx:
            if other in (i0, i1, i2):
                continue
            p = v[other]
            # strict barycentric containment check
            d1 = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
            d2 = (c[0] - b[0]) * (p[1] - b[1]) - (c[1] - b[1]) * (p[0] - b[0])
            d3 = (a[0] - c[0]) * (p[1] - c[1]) - (a[1] - c[1]) * (p[0] - c[0])
            if d1 >= -eps and d2 >= -eps and d3 >= -eps:
                return False
        return True

    while len(idx) > 3:
        for pos in range(len(idx)):
            if is_ear(pos):
                tris.append(
                    (idx[pos - 1], idx[pos], idx[(pos + 1) % len(idx)])
                )
                del idx[pos]
                break
        else:
            raise DegeneratePolygon("no ear found; polygon is not simple")
    tris.append((idx[0], idx[1], idx[2]))
    if polygon_area(np.asarray(polygon, dtype=np.float64)) < 0:
        # report indices of the caller's original orientation
        n = len(v)
        tris = [(n - 1 - a, n - 1 - b, n - 1 - c) for a, b, c in tris]
    return tris


# ----------------------------------------------------------------------
# aperture rules
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ApertureRule:
    """Positive-weight rule over a polygonal aperture.

    Built by ear clipping, uniform 4-way triangle subdivision down to the
    wavelength-resolving edge length, and a collapsed tensor Gauss rule per
    subtriangle.  All nodes are strictly interior to the polygon.
    """

    vertices: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    area: float
    ppw: float
    k_resolved: float


def _subdivide(tri: np.ndarray, levels: int) -> np.ndarray:
    """Uniform midpoint subdivision; (T,3,2) -> (T*4**levels,3,2)."""
    for _ in range(levels):
        a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
        ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
        tri = np.concatenate(
            [
                np.stack([a, ab, ca], axis=1),
                np.stack([ab, b, bc], axis=1),
                np.stack([ca, bc, c], axis=1),
                np.stack([ab, bc, ca], axis=1),
            ]
        )
    return tri


def _longest_edge(tri: np.ndarray) -> np.ndarray:
    e0 = np.linalg.norm(tri[:, 1] - tri[:, 0], axis=1)
    e1 = np.linalg.norm(tri[:, 2] - tri[:, 1], axis=1)
    e2 = np.linalg.norm(tri[:, 0] - tri[:, 2], axis=1)
    return np.maximum(e0, np.maximum(e1, e2))


def aperture_rule(polygon, k: float, ppw: float = 10.0) -> ApertureRule:
    """Quadrature over a polygon resolving wavenumber ``k`` at ``ppw`` density.

    Subtriangle edges are capped at ``N_GAUSS_TRI * (2*pi/k) / ppw`` so the
    collapsed Gauss nodes realize at least ``ppw`` points per wavelength.
    """
    if not (k > 0) or not math.isfinite(k):
        raise ArgumentError(f"wavenumber must be positive and finite, got {k}")
    if ppw < 2:
        raise ArgumentError(f"points-per-wavelength must be >= 2, got {ppw}")
    v = _as_vertices(polygon)
    tris_idx = ear_clip(v)
    roots = np.stack([v[list(t)] for t in tris_idx])

    target = N_GAUSS_TRI * (2.0 * math.pi / k) / ppw
    pieces = []
    for t in roots:
        e = float(_longest_edge(t[None])[0])
        levels = max(0, math.ceil(math.log2(e / target))) if e > target else 0
        pieces.append(_subdivide(t[None], levels))
    tri = np.concatenate(pieces)

    u, wu = _gauss01(N_GAUSS_TRI)
    vq, wv = _gauss01(N_GAUSS_TRI)
    uu, vv = np.meshgrid(u, vq, indexing="ij")
    ww = np.outer(wu * u, wv).ravel()  # extra u from the Duffy Jacobian
    uu, vv = uu.ravel(), vv.ravel()

    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    # collapsed map: P = A + u(B-A) + uv(C-B), |J| = 2*area*u
    nodes = (
        a[:, None, :]
        + uu[None, :, None] * (b - a)[:, None, :]
        + (uu * vv)[None, :, None] * (c - b)[:, None, :]
    ).reshape(-1, 2)
    area2 = np.abs(
        (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
        - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    )
    weights = (area2[:, None] * ww[None, :]).reshape(-1)

    e_max = float(np.max(_longest_edge(tri)))
    k_res = 2.0 * math.pi * N_GAUSS_TRI / (ppw * e_max)
    return ApertureRule(
        vertices=v,
        nodes=nodes,
        weights=weights,
        area=abs(polygon_area(v)),
        ppw=ppw,
        k_resolved=k_res,
    )


# ----------------------------------------------------------------------
# tensor rule on a bounding box (spectral engine for smooth integrands)
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class BoxRule:
    """Tensor Gauss-Legendre rule on an axis-aligned rectangle.

    The Cartesian-product node layout is what makes plane-wave factors
    separable (``exp(-i xi.q) = exp(-i xi_1 x) * exp(-i xi_2 y)``), so
    far-field sweeps reduce to small matrix products.
    """

    x: np.ndarray
    wx: np.ndarray
    y: np.ndarray
    wy: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        xx, yy = np.meshgrid(self.x, self.y, indexing="ij")
        return np.stack([xx.ravel(), yy.ravel()], axis=1)

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.wx, self.wy).ravel()


def box_rule(x0: float, x1: float, y0: float, y1: float, nx: int, ny: int) -> BoxRule:
    if not (x1 > x0 and y1 > y0):
        raise ArgumentError("empty box")
    rx, ry = gauss_legendre(nx), gauss_legendre(ny)
    x = 0.5 * (x1 - x0) * rx.nodes + 0.5 * (x0 + x1)
    y = 0.5 * (y1 - y0) * ry.nodes + 0.5 * (y0 + y1)
    return BoxRule(x, 0.5 * (x1 - x0) * rx.weights, y, 0.5 * (y1 - y0) * ry.weights)


def box_nodes_for_k(halfwidth: float, k: float) -> int:
    """Per-dimension Gauss count resolving exp(i k x) on [-h, h] spectrally."""
    return math.ceil(0.75 * abs(k) * halfwidth) + 30
