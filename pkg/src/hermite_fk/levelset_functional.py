"""Level-set functional of a positive eigenfunction and its comparison with the half-space.

For a superlevel set ``U_t = {u > t}`` and a nonnegative test function ``psi`` the functional is

    F(U_t, psi) = (-int_{U_t} psi^2 phi + int_{int bdry} psi phi + beta int_{ext bdry} phi) / gamma(U_t)

where the interior boundary lies inside the domain and the exterior boundary on the Robin
boundary. With ``psi = |grad u|/u`` it equals the eigenvalue at every level.

On a half-line ``(-inf, sigma)`` the decaying eigenfunction ``w`` is decreasing, so
``U_t = (-inf, s(t))`` with ``w(s(t)) = t`` when ``t > w(sigma)`` and ``U_t = (-inf, sigma)``
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtri

from .errors import DomainError
from .gauss_geometry import integrate_1d, measure_halfspace, phi1, phi2, symmetrize
from .solver_1d import Eigenpair1D
from .solver_2d import TRI_BARY, TRI_W, SpectralResult2D

# The seed b(-T) = lam/T misses the next asymptotic term lam (lam - 1)/T^3. Its effect decays
# like exp(-(T^2 - t^2)/2), so levels are only sampled where that factor is below exp(-25).
SEED_DAMPING = 50.0
LEVEL_LO = 0.02
LEVEL_HI = 0.98
VOLUME_TOL = 1e-13


@dataclass(frozen=True)
class LevelSetDecomposition:
    t: float
    U_t_measure: float
    interior_boundary: np.ndarray  # points of the interior boundary (1D) or segment endpoints (2D)
    interior_length: float  # phi-weighted
    exterior_length: float  # phi-weighted


@dataclass(frozen=True)
class FunctionalValue:
    t: float
    F: float
    parts: tuple[float, float, float]  # volume, interior, exterior
    measure: float

    @classmethod
    def assemble(cls, t, volume, interior, exterior, measure):
        return cls(float(t), (-volume + interior + exterior) / measure,
                   (float(volume), float(interior), float(exterior)), float(measure))


def _check_level(eig: Eigenpair1D, t: float) -> float:
    t = float(t)
    if not 0.0 < t < eig.w_values[0]:
        raise DomainError(f"level {t!r} outside the eigenfunction range (0, {eig.w_values[0]})")
    return t


def level_point(eig: Eigenpair1D, t: float) -> float:
    """Right end ``s(t)`` of the superlevel interval."""
    t = _check_level(eig, t)
    if t <= eig.w_values[-1]:
        return eig.sigma
    log_t = math.log(t)
    return brentq(lambda x: float(eig.trace.log_w_at(x)) - eig.log_norm - log_t,
                  float(eig.grid[0]), eig.sigma, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def decompose_1d(eig: Eigenpair1D, t: float) -> LevelSetDecomposition:
    s = level_point(eig, t)
    if s < eig.sigma:
        return LevelSetDecomposition(float(t), float(measure_halfspace(s)), np.array([s]),
                                     float(phi1(s)), 0.0)
    return LevelSetDecomposition(float(t), float(measure_halfspace(s)), np.empty(0), 0.0,
                                 float(phi1(s)))


def _volume(psi, a: float, b: float) -> float:
    if b <= a:
        return 0.0
    return integrate_1d(lambda x: np.asarray(psi(x), dtype=float) ** 2 * phi1(x), a, b, VOLUME_TOL)


def evaluate_F_1d(eig: Eigenpair1D, psi, t: float) -> FunctionalValue:
    """Functional at level ``t`` for a test function ``psi`` of position (vectorized)."""
    dec = decompose_1d(eig, t)
    s = eig.sigma if dec.interior_boundary.size == 0 else float(dec.interior_boundary[0])
    volume = _volume(psi, float(eig.grid[0]), s)
    interior = 0.0
    if dec.interior_length:
        interior = float(np.ravel(psi(s))[0]) * dec.interior_length
    exterior = eig.beta * dec.exterior_length
    return FunctionalValue.assemble(t, volume, interior, exterior, dec.U_t_measure)


def level_ceiling(eig: Eigenpair1D) -> float:
    """Largest eigenfunction value outside the layer still affected by the seed."""
    T = -float(eig.grid[0])
    x = -math.sqrt(max(T * T - SEED_DAMPING, 0.0))
    return float(eig.w_at(min(x, eig.sigma)))


def sample_levels(eig: Eigenpair1D, n: int = 50) -> np.ndarray:
    """Geometric levels between 2% and 98% of :func:`level_ceiling`."""
    top = level_ceiling(eig)
    if n == 1:
        return np.array([math.sqrt(LEVEL_LO * LEVEL_HI) * top])
    return np.geomspace(LEVEL_LO * top, LEVEL_HI * top, n)


def representation_residual(eig: Eigenpair1D, t_grid) -> float:
    """``max |F(U_t, psi_bar) - lambda_1|`` over the given levels."""
    levels = np.atleast_1d(np.asarray(t_grid, dtype=float))
    return max(abs(evaluate_F_1d(eig, eig.psi_bar, t).F - eig.lambda1) for t in levels)


def compute_I(eig: Eigenpair1D, psi, t: float) -> float:
    """``int_{U_t} (psi - psi_bar) psi_bar phi_1``; zero on the empty set above the maximum."""
    if float(t) >= eig.w_values[0]:
        return 0.0
    s = level_point(eig, t)

    def integrand(x):
        pb = np.asarray(eig.psi_bar(x), dtype=float)
        return (np.asarray(psi(x), dtype=float) - pb) * pb * phi1(x)

    return integrate_1d(integrand, float(eig.grid[0]), s, VOLUME_TOL)


def level_map_1d(eig: Eigenpair1D):
    """``t -> gamma(U_t)`` for the half-line eigenfunction."""
    return lambda t: float(measure_halfspace(level_point(eig, t)))


def bossel_test_function(level_map, symmetrized: Eigenpair1D):
    """``t -> b(r(t))`` with ``r(t)`` the half-space of the same measure as ``U_t``.

    ``b`` is the Riccati trace of the symmetrized problem, clamped to its grid.
    """
    lo, hi = float(symmetrized.grid[0]), symmetrized.sigma

    def psi(t):
        m = float(level_map(t))
        r = min(max(symmetrize(m), lo), hi)
        return float(symmetrized.psi_bar(r))

    return psi


def halfspace_F(eig: Eigenpair1D, r: float) -> float:
    """Functional of ``S_r = (-inf, r)`` inside the half-line problem with ``psi = b``."""
    r = min(float(r), eig.sigma)
    volume = _volume(eig.psi_bar, float(eig.grid[0]), r)
    if r < eig.sigma:
        boundary = float(eig.psi_bar(r)) * float(phi1(r))
    else:
        boundary = eig.beta * float(phi1(r))
    return (-volume + boundary) / float(measure_halfspace(r))


# ---------------------------------------------------------------------------------------------
# two dimensions

_GL2 = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])


def _weighted_length(p, q) -> np.ndarray:
    """phi-weighted lengths of segments ``p[i] -> q[i]`` (two-point Gauss rule)."""
    d = q - p
    L = np.hypot(d[:, 0], d[:, 1])
    acc = np.zeros(len(p))
    for s in _GL2:
        x = p + s * d
        acc += 0.5 * phi2(x[:, 0], x[:, 1])
    return acc * L


def _edge_part_above(p, q, up, uq, t):
    """Sub-segment of each edge on which the linear interpolant exceeds ``t``."""
    a = np.clip((t - up) / np.where(uq != up, uq - up, 1.0), 0.0, 1.0)
    above_p = up > t
    above_q = uq > t
    start = np.where(above_p[:, None], p, p + a[:, None] * (q - p))
    end = np.where(above_q[:, None], q, p + a[:, None] * (q - p))
    keep = above_p | above_q
    return start[keep], end[keep]


def _contour_segments(xy, tri, u, t):
    """Marching triangles: pieces of ``{u = t}`` inside each triangle."""
    ut = u[tri]
    above = ut > t
    n_above = above.sum(axis=1)
    cut = (n_above == 1) | (n_above == 2)
    tri, ut, above = tri[cut], ut[cut], above[cut]
    # the vertex on its own side of the level
    lone = np.where((above.sum(axis=1) == 1)[:, None], above, ~above).argmax(axis=1)
    rows = np.arange(len(tri))
    i0 = tri[rows, lone]
    i1 = tri[rows, (lone + 1) % 3]
    i2 = tri[rows, (lone + 2) % 3]

    def cross(i, j):
        a = (t - u[i]) / (u[j] - u[i])
        return xy[i] + a[:, None] * (xy[j] - xy[i])

    return cross(i0, i1), cross(i0, i2)


@dataclass(frozen=True)
class LevelComparison2D:
    levels: np.ndarray
    measures: np.ndarray
    radii: np.ndarray  # r(t): the half-space S_r has the measure of U_t
    F_domain: np.ndarray  # F_Omega(U_t, psi) with the Bossel test function
    F_symmetrized: np.ndarray  # F_{Omega#}(S_r, b)
    lambda_domain: float
    lambda_symmetrized: float
    tolerance: float

    @property
    def comparison_fraction(self) -> float:
        """Share of levels with ``F_{Omega#} <= F_Omega + tolerance``."""
        return float(np.mean(self.F_symmetrized <= self.F_domain + self.tolerance))

    @property
    def below_eigenvalue_fraction(self) -> float:
        """Share of levels with ``F_Omega(U_t, psi) <= lambda_1(Omega) + tolerance``."""
        return float(np.mean(self.F_domain <= self.lambda_domain + self.tolerance))


def compare_levels_2d(result: SpectralResult2D, symmetrized: Eigenpair1D, n_levels: int = 30,
                      tolerance: float = 1e-2) -> LevelComparison2D:
    """Evaluate both sides of the symmetrization comparison on sampled levels of a 2D eigenfunction.

    Superlevel sets come from the P1 interpolant: measures from the 7-point rule, interior
    boundaries by marching triangles, exterior boundaries from physical edges above the level.
    """
    mesh = result.mesh
    u = np.asarray(result.u_dofs, dtype=float)
    if u.sum() < 0:
        u = -u
    xy, tri = mesh.vertices, mesh.triangles

    # distribution function of u under gamma, from quadrature points
    area = mesh.areas()
    uq = u[tri] @ TRI_BARY.T  # (ntri, 7)
    pts = np.einsum("qk,tkd->tqd", TRI_BARY, xy[tri])
    wq = (area[:, None] * TRI_W[None, :]) * phi2(pts[..., 0], pts[..., 1])
    uq, wq = uq.ravel(), wq.ravel()
    order = np.argsort(uq)[::-1]
    u_sorted = uq[order]
    cum = np.cumsum(wq[order])

    def measure_above(t):
        k = np.searchsorted(-u_sorted, -np.asarray(t, dtype=float), side="left")
        return np.where(k > 0, cum[np.maximum(k - 1, 0)], 0.0)

    lo, hi = float(symmetrized.grid[0]), symmetrized.sigma

    def b_of_measure(m):
        r = np.clip(ndtri(np.clip(m, 1e-300, 1.0 - 1e-16)), lo, hi)
        return np.asarray(symmetrized.psi_bar(r), dtype=float)

    # psi at each quadrature point: b(r(u(x)))
    psi_sorted = b_of_measure(cum)  # measure of {u >= u_q}
    vol_cum = np.cumsum(psi_sorted**2 * wq[order])

    # levels below min(u) all give the whole domain, so the window starts there
    u_max = float(u.max())
    levels = np.geomspace(max(LEVEL_LO * u_max, float(u.min())), LEVEL_HI * u_max, n_levels)
    edges = mesh.physical_edges()
    beta = result.beta

    F_dom = np.empty(n_levels)
    F_sym = np.empty(n_levels)
    measures = np.empty(n_levels)
    radii = np.empty(n_levels)
    for i, t in enumerate(levels):
        k = np.searchsorted(-u_sorted, -t, side="left")
        m = float(cum[k - 1]) if k > 0 else 0.0
        volume = float(vol_cum[k - 1]) if k > 0 else 0.0
        b_t = float(b_of_measure(m))
        p, q = _contour_segments(xy, tri, u, t)
        interior = b_t * float(_weighted_length(p, q).sum())
        ep, eq = _edge_part_above(xy[edges[:, 0]], xy[edges[:, 1]], u[edges[:, 0]],
                                  u[edges[:, 1]], t)
        exterior = beta * float(_weighted_length(ep, eq).sum())
        measures[i] = m
        radii[i] = float(ndtri(m))
        F_dom[i] = (-volume + interior + exterior) / m
        F_sym[i] = halfspace_F(symmetrized, min(max(radii[i], lo), hi))
    return LevelComparison2D(levels, measures, radii, F_dom, F_sym, float(result.lambda1),
                             float(symmetrized.lambda1), float(tolerance))


__all__ = [
    "LevelSetDecomposition",
    "FunctionalValue",
    "LevelComparison2D",
    "bossel_test_function",
    "compare_levels_2d",
    "compute_I",
    "decompose_1d",
    "evaluate_F_1d",
    "halfspace_F",
    "level_ceiling",
    "level_map_1d",
    "level_point",
    "representation_residual",
    "sample_levels",
]
