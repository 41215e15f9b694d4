"""Weighted P1 finite elements for the first Robin eigenvalue on planar domains.

Discrete problem: ``A u = lam M u`` with

    A_ij = int grad(phi_i).grad(phi_j) g dx + beta int_{physical boundary} phi_i phi_j g ds
    M_ij = int phi_i phi_j g dx

where ``g`` is the standard Gaussian density. Edges created by truncating an unbounded
domain get the natural (zero-flux) condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.spatial import Delaunay

from .errors import MeshError, SolverError
from .gauss_geometry import ARTIFICIAL, PHYSICAL, Domain2D, Segment, phi2

SHIFT = -0.1
EIG_TOL = 1e-10
DENSE_LIMIT = 2000
MAX_ASPECT = 20.0
_MAX_ITER = 3000

# 7-point degree-5 rule on the reference triangle (barycentric coordinates, weights sum to 1)
_A1, _B1, _W1 = 0.059715871789770, 0.470142064105115, 0.132394152788506
_A2, _B2, _W2 = 0.797426985353087, 0.101286507323456, 0.125939180544827
TRI_BARY = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
    [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
])
TRI_W = np.array([0.225, _W1, _W1, _W1, _W2, _W2, _W2])
_EDGE_X, _EDGE_W = np.polynomial.legendre.leggauss(4)
_EDGE_S = 0.5 * (_EDGE_X + 1.0)
_EDGE_W = 0.5 * _EDGE_W


@dataclass
class Mesh2D:
    vertices: np.ndarray  # (n, 2)
    triangles: np.ndarray  # (m, 3), counterclockwise
    boundary_edges: np.ndarray  # (k, 2)
    boundary_flags: np.ndarray  # (k,) of "physical" | "artificial"
    h: float

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def aspect_ratios(self) -> np.ndarray:
        """Longest edge over ``2 sqrt(3)`` times the inradius; 1 for equilateral triangles."""
        p = self.vertices[self.triangles]
        e = np.stack([np.linalg.norm(p[:, (i + 1) % 3] - p[:, i], axis=1) for i in range(3)], axis=1)
        r_in = 2.0 * np.abs(self.areas()) / e.sum(axis=1)
        return e.max(axis=1) / (2.0 * math.sqrt(3.0) * r_in)

    def physical_edges(self) -> np.ndarray:
        return self.boundary_edges[self.boundary_flags == PHYSICAL]


def _segment_samples(seg: Segment, h: float) -> np.ndarray:
    spacing = h
    if seg.kind == "arc":
        # chord sagitta s^2 / (8 r) must stay below h^2 / 10
        spacing = min(h, h * math.sqrt(0.8 * seg.radius))
    n = max(int(math.ceil(seg.length / spacing - 1e-9)), 1 if seg.kind == "line" else 3)
    return seg.point(np.arange(n) / n)


def _hex_lattice(center, axis_angle, extent, h):
    k = int(math.ceil(extent / h)) + 2
    dy = h * math.sqrt(3.0) / 2.0
    j = np.arange(-k, k + 1)
    rows = []
    for jj in range(-int(math.ceil(extent / dy)) - 2, int(math.ceil(extent / dy)) + 3):
        x = (j + 0.5 * (jj % 2)) * h
        rows.append(np.stack([x, np.full_like(x, jj * dy, dtype=float)], axis=1))
    pts = np.concatenate(rows)
    c, s = math.cos(axis_angle), math.sin(axis_angle)
    rot = np.array([[c, -s], [s, c]])
    return pts @ rot.T + np.asarray(center)


def _mesh_rectangle(domain: Domain2D, h: float) -> Mesh2D:
    (x0, x1), (y0, y1) = domain.x_range, domain.y_range
    nx = max(int(math.ceil((x1 - x0) / h - 1e-9)), 1)
    ny = max(int(math.ceil((y1 - y0) / h - 1e-9)), 1)
    xs, ys = np.linspace(x0, x1, nx + 1), np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    verts = np.stack([X.ravel(), Y.ravel()], axis=1)

    def idx(i, j):
        return i * (ny + 1) + j

    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    I, J = I.ravel(), J.ravel()
    a, b, c, d = idx(I, J), idx(I + 1, J), idx(I + 1, J + 1), idx(I, J + 1)
    tris = np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])
    edges = []
    for i in range(nx):
        edges += [(idx(i, 0), idx(i + 1, 0)), (idx(i + 1, ny), idx(i, ny))]
    for j in range(ny):
        edges += [(idx(nx, j), idx(nx, j + 1)), (idx(0, j + 1), idx(0, j))]
    edges = np.array(edges)
    return Mesh2D(verts, tris, edges, np.full(len(edges), PHYSICAL, dtype=object), h)


def _lattice_frame(domain: Domain2D):
    """Anchor point, axis angle and extent so that rotating the domain rotates the lattice."""
    if domain.kind == "disk":
        cx, cy = domain.center
        return (cx, cy), math.atan2(cy, cx) if (cx or cy) else 0.0, domain.radius
    if domain.kind == "half_plane":
        ang = math.radians(domain.angle)
        # rows run parallel to the chord, first row h*sqrt(3)/2 inside it
        return ((domain.offset * math.cos(ang), domain.offset * math.sin(ang)),
                ang + math.pi / 2, 2 * domain.truncation_radius)
    v = domain.polygon_vertices()
    c = v.mean(axis=0)
    return tuple(c), 0.0, float(np.max(np.linalg.norm(v - c, axis=1)))


def mesh_domain(domain: Domain2D, h: float) -> Mesh2D:
    """Conforming triangulation with boundary edges flagged like the domain's segments."""
    if not h > 0.0:
        raise MeshError(f"mesh size must be positive, got {h}")
    if domain.kind == "rectangle":
        (x0, x1), (y0, y1) = domain.x_range, domain.y_range
        if h > max(x1 - x0, y1 - y0):
            raise MeshError("mesh size exceeds the rectangle")
        return _mesh_rectangle(domain, h)

    segs = domain.boundary_segments
    bpts, bflags = [], []
    for seg in segs:
        p = _segment_samples(seg, h)
        bpts.append(p)
        bflags += [seg.flag] * len(p)
    bpts = np.concatenate(bpts)
    nb = len(bpts)
    if nb < 3:
        raise MeshError("too few boundary points; decrease h")
    center, axis, extent = _lattice_frame(domain)
    lat = _hex_lattice(center, axis, extent, h)
    if domain.kind == "half_plane":
        ang = math.radians(domain.angle)
        n = np.array([math.cos(ang), math.sin(ang)])
        # shift rows so the first one sits h*sqrt(3)/2 behind the chord
        lat = lat - n * (h * math.sqrt(3.0) / 2.0)
    lat = lat[domain.contains(lat)]
    dist = np.full(len(lat), np.inf)
    for seg in segs:
        dist = np.minimum(dist, seg.distance(lat))
    lat = lat[dist > 0.55 * h]
    if len(lat) == 0 and nb < 4:
        raise MeshError("mesh size too large for the domain")
    pts = np.concatenate([bpts, lat])
    tri = Delaunay(pts).simplices
    p = pts[tri]
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    flip = area < 0
    tri[flip] = tri[flip][:, [0, 2, 1]]
    area = np.abs(area)
    cent = p.mean(axis=1)
    keep = (area > 1e-10 * h * h) & (domain.contains(cent) | (domain.kind != "polygon"))
    tri = tri[keep]

    expected = {}
    for i in range(nb):
        expected[frozenset((i, (i + 1) % nb))] = (i, (i + 1) % nb, bflags[i])
    e = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    key = np.sort(e, axis=1)
    uniq, counts = np.unique(key, axis=0, return_counts=True)
    found = {frozenset(map(int, k)) for k in uniq[counts == 1]}
    if found != set(expected):
        raise MeshError("triangulation does not recover the domain boundary; decrease h")
    edges = np.array([expected[k][:2] for k in sorted(expected, key=lambda k: expected[k][0])])
    flags = np.array([expected[k][2] for k in sorted(expected, key=lambda k: expected[k][0])],
                     dtype=object)
    mesh = Mesh2D(pts, tri, edges, flags, h)
    if np.max(mesh.aspect_ratios()) > MAX_ASPECT:
        raise MeshError("triangle aspect ratio above limit; decrease h")
    return mesh


# ---------------------------------------------------------------- assembly


def assemble(mesh: Mesh2D, beta: float):
    """Weighted stiffness (with Robin boundary term) and mass matrices in CSR form."""
    V, T = mesh.vertices, mesh.triangles
    p = V[T]  # (m, 3, 2)
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    area = 0.5 * det
    if np.any(area <= 0):
        raise SolverError("degenerate or inverted triangle in mesh")
    # gradients of the barycentric coordinates
    g = np.empty((len(T), 3, 2))
    g[:, 1, 0], g[:, 1, 1] = d2[:, 1] / det, -d2[:, 0] / det
    g[:, 2, 0], g[:, 2, 1] = -d1[:, 1] / det, d1[:, 0] / det
    g[:, 0] = -g[:, 1] - g[:, 2]
    xq = np.einsum("qk,mkd->mqd", TRI_BARY, p)
    wq = phi2(xq[..., 0], xq[..., 1]) * TRI_W[None, :] * area[:, None]  # (m, q)
    kloc = np.einsum("mid,mjd->mij", g, g) * wq.sum(axis=1)[:, None, None]
    mloc = np.einsum("mq,qi,qj->mij", wq, TRI_BARY, TRI_BARY)
    rows = np.repeat(T, 3, axis=1).ravel()
    cols = np.tile(T, (1, 3)).ravel()
    n = len(V)
    A = sp.coo_matrix((kloc.ravel(), (rows, cols)), shape=(n, n))
    M = sp.coo_matrix((mloc.ravel(), (rows, cols)), shape=(n, n))
    pe = mesh.physical_edges()
    if beta != 0.0 and len(pe):
        a, b = V[pe[:, 0]], V[pe[:, 1]]
        length = np.linalg.norm(b - a, axis=1)
        xs = a[:, None, :] + _EDGE_S[None, :, None] * (b - a)[:, None, :]
        ws = phi2(xs[..., 0], xs[..., 1]) * _EDGE_W[None, :] * length[:, None]
        basis = np.stack([1.0 - _EDGE_S, _EDGE_S], axis=1)  # (q, 2)
        bloc = beta * np.einsum("eq,qi,qj->eij", ws, basis, basis)
        br = np.repeat(pe, 2, axis=1).ravel()
        bc = np.tile(pe, (1, 2)).ravel()
        A = A + sp.coo_matrix((bloc.ravel(), (br, bc)), shape=(n, n))
    return A.tocsr(), M.tocsr()


@dataclass
class SpectralResult2D:
    domain: Domain2D
    beta: float
    lambda1: float
    u_dofs: np.ndarray
    mesh: Mesh2D
    residual: float
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    iterations: int = 0

    @property
    def dof_count(self) -> int:
        return len(self.u_dofs)


def _residual(A, M, u, lam):
    Au, Mu = A @ u, M @ u
    return float(np.linalg.norm(Au - lam * Mu) / (np.linalg.norm(Au) + abs(lam) * np.linalg.norm(Mu)))


def smallest_eigenpair(A, M, shift: float = SHIFT, tol: float = EIG_TOL, dense_limit: int = DENSE_LIMIT):
    """Smallest generalized eigenpair of the symmetric pencil (A, M)."""
    n = A.shape[0]
    if n < dense_limit:
        Ad, Md = A.toarray(), M.toarray()
        try:
            vals, vecs = sla.eigh(Ad, Md, subset_by_index=[0, 0])
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"mass matrix is singular: {exc}") from exc
        u = vecs[:, 0]
        lam = float(u @ Ad @ u / (u @ Md @ u))
        return lam, u, _residual(A, M, u, lam), 0
    try:
        lu = spla.splu((A - shift * M).tocsc())
    except RuntimeError as exc:
        raise SolverError(f"shifted matrix is singular: {exc}") from exc
    u = np.ones(n)
    res = math.inf
    lam = math.nan
    for it in range(1, _MAX_ITER + 1):
        u = lu.solve(M @ u)
        nrm = math.sqrt(float(u @ (M @ u)))
        if not nrm > 0.0:
            raise SolverError("inverse iteration collapsed")
        u /= nrm
        lam = float(u @ (A @ u))
        res = _residual(A, M, u, lam)
        if res <= tol:
            return lam, u, res, it
    raise SolverError(f"inverse iteration stalled at residual {res:.3e}")


def lambda1_2d(domain: Domain2D, beta: float, h: float, mesh: Mesh2D | None = None) -> SpectralResult2D:
    """First eigenvalue and positive eigenfunction, normalized ``int u^2 g dx = 1``."""
    if not beta >= 0.0:
        raise SolverError("Robin parameter must be >= 0")
    mesh = mesh if mesh is not None else mesh_domain(domain, h)
    A, M = assemble(mesh, beta)
    lam, u, res, it = smallest_eigenpair(A, M)
    if u.sum() < 0:
        u = -u
    u = u / math.sqrt(float(u @ (M @ u)))
    return SpectralResult2D(domain, float(beta), lam, u, mesh, res, A, M, it)


def richardson(coarse: float, fine: float) -> float:
    """Second-order Richardson extrapolation from spacings h and h/2."""
    return (4.0 * fine - coarse) / 3.0


def lambda1_2d_extrapolated(domain: Domain2D, beta: float, h: float):
    """``(extrapolated lambda, result at h, result at h/2)``."""
    r1 = lambda1_2d(domain, beta, h)
    r2 = lambda1_2d(domain, beta, h / 2)
    return richardson(r1.lambda1, r2.lambda1), r1, r2


# ---------------------------------------------------------------- mesh dump


def write_mesh(mesh: Mesh2D, path) -> None:
    lines = [f"v {x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines += [f"t {i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    lines += [f"e {i} {j} {f}" for (i, j), f in zip(mesh.boundary_edges.tolist(), mesh.boundary_flags)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path, h: float = math.nan) -> Mesh2D:
    verts, tris, edges, flags = [], [], [], []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        tag = parts[0]
        if tag == "v" and len(parts) == 3:
            verts.append((float(parts[1]), float(parts[2])))
        elif tag == "t" and len(parts) == 4:
            tris.append(tuple(int(x) for x in parts[1:]))
        elif tag == "e" and len(parts) == 4 and parts[3] in (PHYSICAL, ARTIFICIAL):
            edges.append((int(parts[1]), int(parts[2])))
            flags.append(parts[3])
        else:
            raise MeshError(f"{path}:{n}: malformed line {line!r}")
    return Mesh2D(np.array(verts, dtype=float).reshape(-1, 2), np.array(tris, dtype=int).reshape(-1, 3),
                  np.array(edges, dtype=int).reshape(-1, 2), np.array(flags, dtype=object), h)
