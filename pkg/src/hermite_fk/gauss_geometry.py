"""Gaussian measure, Gaussian perimeter and symmetrization of half-spaces and planar domains.

Planar domains carry their boundary as a list of oriented segments (counterclockwise, so
the domain lies to the left). Segments created by truncating an unbounded domain are
flagged ``artificial``; they never contribute to perimeter or to Robin boundary terms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import erfc as _erfc
from scipy.special import erfcinv as _erfcinv

from .errors import ConfigurationError, DomainError
from .special_fn import erf

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
DEFAULT_TRUNCATION_RADIUS = 6.0
QUAD_ORDER = 32
QUAD_TOL = 1e-9
_MAX_LEVELS = 12

PHYSICAL = "physical"
ARTIFICIAL = "artificial"

_GL_X, _GL_W = np.polynomial.legendre.leggauss(QUAD_ORDER)


def phi1(x):
    return INV_SQRT_2PI * np.exp(-0.5 * np.square(x))


def phi2(x, y):
    return INV_SQRT_2PI**2 * np.exp(-0.5 * (np.square(x) + np.square(y)))


# ---------------------------------------------------------------- half-spaces


@dataclass(frozen=True)
class HalfSpace:
    """``S_sigma = {x : x_1 < sigma}``."""

    sigma: float

    @property
    def measure(self) -> float:
        return measure_halfspace(self.sigma)

    @property
    def perimeter(self) -> float:
        return float(phi1(self.sigma))


def measure_halfspace(sigma):
    """``1/2 + erf(sigma/sqrt 2)/2``, evaluated through erfc to keep the left tail accurate."""
    if np.ndim(sigma) == 0:
        return 0.5 * math.erfc(-float(sigma) / SQRT2)
    return 0.5 * _erfc(-np.asarray(sigma, dtype=float) / SQRT2)


def symmetrize(s: float) -> float:
    """Threshold of the half-space whose Gaussian measure is ``s``."""
    if not 0.0 < s < 1.0:
        raise DomainError(f"Gaussian measure must lie in (0, 1), got {s!r}")
    # sqrt(2) erfinv(2s - 1), written with erfcinv so that tiny tails keep relative accuracy
    tail = min(s, 1.0 - s)
    x = float(_erfcinv(2.0 * tail))
    for _ in range(2):
        r = math.erfc(x) - 2.0 * tail
        if r == 0.0:
            break
        x += r / (2.0 / math.sqrt(math.pi) * math.exp(-x * x))
    return (-SQRT2 * x if s < 0.5 else SQRT2 * x) + 0.0


def isoperimetric_g(s: float) -> float:
    """Gaussian perimeter of the half-space of measure ``s``."""
    if not 0.0 < s < 1.0:
        raise DomainError(f"Gaussian measure must lie in (0, 1), got {s!r}")
    return float(phi1(symmetrize(s)))


# ---------------------------------------------------------------- quadrature helpers


def _gl_panels(a: float, b: float, n: int):
    """Nodes and weights of the composite Gauss-Legendre rule on [a, b] with n panels."""
    edges = np.linspace(a, b, n + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _refine(estimate, tol: float = QUAD_TOL) -> float:
    """Halve panels until two successive estimates agree to ``tol``."""
    n = 1
    prev = estimate(n)
    for _ in range(_MAX_LEVELS):
        n *= 2
        cur = estimate(n)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    return prev


def integrate_1d(f, a: float, b: float, tol: float = QUAD_TOL) -> float:
    """Adaptive composite Gauss-Legendre integral of a vectorized ``f`` over [a, b]."""
    if b == a:
        return 0.0

    def est(n):
        x, w = _gl_panels(a, b, n)
        return float(np.dot(w, f(x)))

    return _refine(est, tol)


# ---------------------------------------------------------------- boundary segments


@dataclass(frozen=True)
class Segment:
    """A line segment ``p0 -> p1`` or a counterclockwise circular arc."""

    kind: str  # "line" | "arc"
    flag: str
    p0: tuple[float, float] = (0.0, 0.0)
    p1: tuple[float, float] = (0.0, 0.0)
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 0.0
    theta0: float = 0.0
    theta1: float = 0.0

    @property
    def length(self) -> float:
        if self.kind == "line":
            return math.dist(self.p0, self.p1)
        return self.radius * (self.theta1 - self.theta0)

    def point(self, s):
        """Point at normalized arc-length parameter ``s`` in [0, 1]."""
        s = np.asarray(s, dtype=float)
        if self.kind == "line":
            x = self.p0[0] + s * (self.p1[0] - self.p0[0])
            y = self.p0[1] + s * (self.p1[1] - self.p0[1])
        else:
            th = self.theta0 + s * (self.theta1 - self.theta0)
            x = self.center[0] + self.radius * np.cos(th)
            y = self.center[1] + self.radius * np.sin(th)
        return np.stack([x, y], axis=-1)

    def distance(self, pts) -> np.ndarray:
        """Euclidean distance from points (shape (n, 2)) to the segment."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == "line":
            a = np.asarray(self.p0)
            d = np.asarray(self.p1) - a
            s = np.clip(((pts - a) @ d) / float(d @ d), 0.0, 1.0)
            return np.linalg.norm(pts - (a + s[:, None] * d), axis=1)
        rel = pts - np.asarray(self.center)
        th = np.mod(np.arctan2(rel[:, 1], rel[:, 0]) - self.theta0, 2 * np.pi) + self.theta0
        inside = th <= self.theta1 + 1e-14
        d_arc = np.abs(np.linalg.norm(rel, axis=1) - self.radius)
        ends = self.point(np.array([0.0, 1.0]))
        d_end = np.min(np.linalg.norm(pts[:, None, :] - ends[None, :, :], axis=2), axis=1)
        return np.where(inside, d_arc, d_end)

    def weighted_length(self) -> float:
        L = self.length
        if L == 0.0:
            return 0.0

        def f(s):
            p = self.point(s)
            return phi2(p[:, 0], p[:, 1]) * L

        return integrate_1d(f, 0.0, 1.0)

    def rotated(self, angle: float) -> "Segment":
        c, s = math.cos(angle), math.sin(angle)

        def rot(p):
            return (c * p[0] - s * p[1], s * p[0] + c * p[1])

        if self.kind == "line":
            return Segment("line", self.flag, p0=rot(self.p0), p1=rot(self.p1))
        return Segment(
            "arc", self.flag, center=rot(self.center), radius=self.radius,
            theta0=self.theta0 + angle, theta1=self.theta1 + angle,
        )


# ---------------------------------------------------------------- planar domains

KINDS = ("rectangle", "disk", "half_plane", "polygon")


@dataclass(frozen=True)
class Domain2D:
    """A corpus domain. ``angle`` is in degrees and is the direction of the outer normal
    of a half-plane ``{x : <x, n> < offset}``, truncated to the disk of radius
    ``truncation_radius`` about the origin."""

    kind: str
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    center: tuple[float, float] | None = None
    radius: float | None = None
    angle: float | None = None
    offset: float | None = None
    truncation_radius: float | None = None
    vertices: tuple[tuple[float, float], ...] | None = None
    boundary_segments: tuple[Segment, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown domain kind {self.kind!r}")
        object.__setattr__(self, "boundary_segments", tuple(self._build_segments()))

    # constructors
    @classmethod
    def rectangle(cls, x_range, y_range):
        return cls("rectangle", x_range=tuple(map(float, x_range)), y_range=tuple(map(float, y_range)))

    @classmethod
    def disk(cls, center, radius):
        return cls("disk", center=tuple(map(float, center)), radius=float(radius))

    @classmethod
    def half_plane(cls, angle=0.0, offset=0.0, truncation_radius=DEFAULT_TRUNCATION_RADIUS):
        return cls("half_plane", angle=float(angle), offset=float(offset),
                   truncation_radius=float(truncation_radius))

    @classmethod
    def polygon(cls, vertices):
        return cls("polygon", vertices=tuple(tuple(map(float, v)) for v in vertices))

    def _build_segments(self):
        k = self.kind
        if k == "rectangle":
            (x0, x1), (y0, y1) = self.x_range, self.y_range
            if not (x1 > x0 and y1 > y0):
                raise DomainError("degenerate rectangle")
            c = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
            return [Segment("line", PHYSICAL, p0=c[i], p1=c[(i + 1) % 4]) for i in range(4)]
        if k == "disk":
            if not self.radius > 0.0:
                raise DomainError("disk radius must be positive")
            return [Segment("arc", PHYSICAL, center=self.center, radius=self.radius,
                            theta0=0.0, theta1=2 * math.pi)]
        if k == "half_plane":
            R, a = self.truncation_radius, self.offset
            if not R > abs(a):
                raise DomainError("truncation radius must exceed |offset|")
            c = math.sqrt(R * R - a * a)
            thc = math.atan2(c, a)
            local = [
                Segment("line", PHYSICAL, p0=(a, -c), p1=(a, c)),
                Segment("arc", ARTIFICIAL, center=(0.0, 0.0), radius=R,
                        theta0=thc, theta1=2 * math.pi - thc),
            ]
            ang = math.radians(self.angle)
            return [s.rotated(ang) for s in local]
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise DomainError("polygon needs at least three 2D vertices")
        area = _signed_area(v)
        if abs(area) < 1e-14:
            raise DomainError("degenerate polygon")
        if area < 0:
            v = v[::-1]
        if _self_intersects(v):
            raise DomainError("polygon is self-intersecting")
        kc = _polygon_centroid(v)
        if not _in_kernel(v, kc):
            raise DomainError("polygon must be star-shaped with respect to its centroid")
        pts = [tuple(p) for p in v]
        n = len(pts)
        return [Segment("line", PHYSICAL, p0=pts[i], p1=pts[(i + 1) % n]) for i in range(n)]

    # geometry
    @property
    def is_half_plane(self) -> bool:
        return self.kind == "half_plane"

    def polygon_vertices(self) -> np.ndarray:
        """Counterclockwise vertex array for polygonal kinds."""
        if self.kind == "rectangle" or self.kind == "polygon":
            return np.array([s.p0 for s in self.boundary_segments])
        raise DomainError(f"{self.kind} has curved boundary")

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        if self.kind == "rectangle":
            (x0, x1), (y0, y1) = self.x_range, self.y_range
            return (x > x0) & (x < x1) & (y > y0) & (y < y1)
        if self.kind == "disk":
            return np.hypot(x - self.center[0], y - self.center[1]) < self.radius
        if self.kind == "half_plane":
            ang = math.radians(self.angle)
            proj = x * math.cos(ang) + y * math.sin(ang)
            return (proj < self.offset) & (np.hypot(x, y) < self.truncation_radius)
        v = self.polygon_vertices()
        inside = np.ones(len(pts), dtype=bool)
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0])
            inside &= cross > 0
        return inside if _is_convex(v) else _point_in_polygon(v, pts)

    def rotated(self, degrees: float) -> "Domain2D":
        """Rotation about the origin. Rectangles become polygons."""
        ang = math.radians(degrees)
        c, s = math.cos(ang), math.sin(ang)

        def rot(p):
            return (c * p[0] - s * p[1], s * p[0] + c * p[1])

        if self.kind == "disk":
            return Domain2D.disk(rot(self.center), self.radius)
        if self.kind == "half_plane":
            return Domain2D.half_plane(self.angle + degrees, self.offset, self.truncation_radius)
        return Domain2D.polygon([rot(p) for p in self.polygon_vertices()])

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        for key in ("x_range", "y_range", "center", "radius", "angle", "offset",
                    "truncation_radius", "vertices"):
            val = getattr(self, key)
            if val is not None:
                out[key] = [list(p) for p in val] if key == "vertices" else (
                    list(val) if isinstance(val, tuple) else val)
        return out


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _polygon_centroid(v: np.ndarray) -> np.ndarray:
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    a = 0.5 * cr.sum()
    return np.array([((x + xn) * cr).sum(), ((y + yn) * cr).sum()]) / (6.0 * a)


def _in_kernel(v: np.ndarray, p: np.ndarray) -> bool:
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        if (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) <= 0:
            return False
    return True


def _is_convex(v: np.ndarray) -> bool:
    n = len(v)
    for i in range(n):
        a, b, c = v[i], v[(i + 1) % n], v[(i + 2) % n]
        if (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) < 0:
            return False
    return True


def _point_in_polygon(v: np.ndarray, pts: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    n = len(v)
    for i in range(n):
        (x0, y0), (x1, y1) = v[i], v[(i + 1) % n]
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < xi)
    return inside


def _self_intersects(v: np.ndarray) -> bool:
    n = len(v)

    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            c, d = v[j], v[(j + 1) % n]
            if orient(a, b, c) * orient(a, b, d) < 0 and orient(c, d, a) * orient(c, d, b) < 0:
                return True
    return False


# ---------------------------------------------------------------- measure and perimeter


def _tensor_rect_measure(x0, x1, y0, y1, tol):
    def est(n):
        x, wx = _gl_panels(x0, x1, n)
        y, wy = _gl_panels(y0, y1, n)
        return float(np.dot(wx, phi1(x)) * np.dot(wy, phi1(y)))

    return _refine(est, tol)


def _triangle_measure(a, b, c, tol):
    # Duffy map of the unit square onto triangle (a, b, c)
    a, b, c = map(np.asarray, (a, b, c))
    jac = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    def est(n):
        u, wu = _gl_panels(0.0, 1.0, n)
        U, V = np.meshgrid(u, u, indexing="ij")
        W = np.outer(wu, wu) * U
        px = a[0] + U * (b[0] - a[0]) + U * V * (c[0] - b[0])
        py = a[1] + U * (b[1] - a[1]) + U * V * (c[1] - b[1])
        return float(np.sum(W * phi2(px, py)) * jac)

    return _refine(est, tol)


def measure_2d(domain: Domain2D, tol: float = QUAD_TOL) -> float:
    """Gaussian measure of a corpus domain (truncated domains: the truncated set)."""
    k = domain.kind
    if k == "rectangle":
        (x0, x1), (y0, y1) = domain.x_range, domain.y_range
        return _tensor_rect_measure(x0, x1, y0, y1, tol)
    if k == "disk":
        cx, cy = domain.center
        r = domain.radius

        def est(n):
            rho, wr = _gl_panels(0.0, r, n)
            m = 16 * n
            th = 2 * np.pi * np.arange(m) / m
            P, T = np.meshgrid(rho, th, indexing="ij")
            vals = phi2(cx + P * np.cos(T), cy + P * np.sin(T))
            return float(np.dot(wr * rho, vals.sum(axis=1)) * 2 * np.pi / m)

        return _refine(est, tol)
    if k == "half_plane":
        R, a = domain.truncation_radius, domain.offset

        # inner integral across the chord direction is an erf in closed form
        def f(x):
            return phi1(x) * erf(np.sqrt(np.maximum(R * R - x * x, 0.0)) / SQRT2)

        return integrate_1d(f, -R, a, tol)
    v = domain.polygon_vertices()
    c = _polygon_centroid(v)
    return float(sum(_triangle_measure(c, v[i], v[(i + 1) % len(v)], tol / len(v))
                     for i in range(len(v))))


def perimeter_2d(domain: Domain2D) -> float:
    """Gaussian perimeter counted over physical boundary segments only."""
    return float(sum(s.weighted_length() for s in domain.boundary_segments if s.flag == PHYSICAL))


def artificial_perimeter_2d(domain: Domain2D) -> float:
    return float(sum(s.weighted_length() for s in domain.boundary_segments if s.flag == ARTIFICIAL))


# ---------------------------------------------------------------- corpus files


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    domain: Domain2D
    beta: float


_REQUIRED = {
    "rectangle": ("x_range", "y_range"),
    "disk": ("center", "radius"),
    "half_plane": ("angle", "offset"),
    "polygon": ("vertices",),
}


def parse_entry(obj, index: int = 0) -> CorpusEntry:
    label = obj.get("name", f"#{index}") if isinstance(obj, dict) else f"#{index}"
    try:
        if not isinstance(obj, dict):
            raise ValueError("entry is not an object")
        name = obj["name"]
        kind = obj["kind"]
        if kind not in _REQUIRED:
            raise ValueError(f"unknown kind {kind!r}")
        for key in _REQUIRED[kind]:
            if key not in obj:
                raise ValueError(f"missing field {key!r}")
        beta = float(obj["beta"])
        if not beta > 0.0 or not math.isfinite(beta):
            raise ValueError(f"beta must be a positive real, got {obj['beta']!r}")
        if kind == "rectangle":
            dom = Domain2D.rectangle(obj["x_range"], obj["y_range"])
        elif kind == "disk":
            dom = Domain2D.disk(obj["center"], obj["radius"])
        elif kind == "half_plane":
            dom = Domain2D.half_plane(obj["angle"], obj["offset"],
                                      obj.get("truncation_radius", DEFAULT_TRUNCATION_RADIUS))
        else:
            dom = Domain2D.polygon(obj["vertices"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"corpus entry {label!r}: {exc}") from exc
    return CorpusEntry(name=str(name), domain=dom, beta=beta)


def load_corpus(path) -> list[CorpusEntry]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read corpus {path}: {exc}") from exc
    if not isinstance(data, list):
        raise ConfigurationError("corpus must be a JSON array of entries")
    entries = [parse_entry(obj, i) for i, obj in enumerate(data)]
    names = [e.name for e in entries]
    if len(set(names)) != len(names):
        raise ConfigurationError("corpus entry names must be unique")
    return entries


def dump_corpus(entries: Sequence[CorpusEntry], path) -> None:
    data = [{"name": e.name, **e.domain.to_json(), "beta": e.beta} for e in entries]
    Path(path).write_text(json.dumps(data, indent=2) + "\n")
