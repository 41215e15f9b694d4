"""First Robin eigenvalue of the Hermite operator on a half-line ``(-inf, sigma)``.

The eigenfunction ``w`` of ``-w'' + t w' = lam w`` with ``w'(sigma) + beta w(sigma) = 0`` is
tracked through its logarithmic derivative ``b(t) = -w'(t)/w(t)``, which obeys the Riccati
equation ``b' = t b + lam + b^2``. Far to the left ``w ~ |t|^lam``, so the flow is seeded
with ``b(-T) = lam/T``; errors in the seed are damped like ``exp(-(T^2 - t^2)/2)``.

The flow is integrated in the angle ``theta = atan(b)``,
``theta' = t sin(theta) cos(theta) + lam cos(theta)^2 + sin(theta)^2``, which stays smooth
where ``b`` blows up (an interior zero of ``w``). ``theta(sigma; lam)`` increases with ``lam``,
so the Robin condition ``theta(sigma) = atan(beta)`` is a bracketed scalar root problem.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.integrate import DOP853, solve_ivp, trapezoid
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import DomainError, SolverError
from .gauss_geometry import phi1

T_DEFAULT = 12.0
BETA_CAP = 1e8
RTOL = 1e-12
ATOL = 1e-14
GRID_STEP = 1e-3
_MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class HalfLineProblem:
    sigma: float
    beta: float

    def __post_init__(self):
        if not math.isfinite(self.sigma):
            raise DomainError("sigma must be finite")
        if not self.beta >= 0.0:
            raise DomainError(f"Robin parameter must be >= 0, got {self.beta!r}")


@dataclass
class RiccatiTrace:
    """``b(t) = -w'/w`` sampled on a uniform grid, with ``log w`` (unnormalized, 0 at ``-T``)."""

    lam: float
    grid: np.ndarray
    beta_values: np.ndarray
    blew_up: bool
    blowup_location: float | None
    log_w: np.ndarray
    _splines: tuple | None = field(default=None, repr=False)

    @property
    def end_value(self) -> float:
        return math.inf if self.blew_up else float(self.beta_values[-1])

    def _interp(self):
        if self._splines is None:
            t, b = self.grid, self.beta_values
            db = t * b + self.lam + b * b
            self._splines = (CubicHermiteSpline(t, b, db), CubicHermiteSpline(t, self.log_w, -b))
        return self._splines

    def beta_at(self, t):
        """Cubic Hermite interpolation using the exact slopes of the flow."""
        return self._interp()[0](t)

    def log_w_at(self, t):
        return self._interp()[1](t)


_TAB = (
    np.ascontiguousarray(DOP853.A[: DOP853.n_stages, : DOP853.n_stages]),
    np.ascontiguousarray(DOP853.B),
    np.ascontiguousarray(DOP853.C[: DOP853.n_stages]),
    np.ascontiguousarray(DOP853.E3),
    np.ascontiguousarray(DOP853.E5),
)


@njit(cache=True)
def _f_theta(t, th, lam):
    s = math.sin(th)
    c = math.cos(th)
    return t * s * c + lam * c * c + s * s


@njit(cache=True)
def _dop853(lam, grid, with_log, theta_cap, rtol, atol, A, B, C, E3, E5):
    """Adaptive DOP853 on ``theta`` (and ``log w`` when ``with_log``).

    Steps are clipped to land on every grid node, where the state is recorded. The run
    stops once theta reaches ``theta_cap``; the crossing is located by linear
    interpolation inside the last step.
    Returns (states, number of recorded nodes, blow-up location or nan).
    """
    ns = B.shape[0]
    n = grid.shape[0]
    nc = 2 if with_log else 1
    out = np.zeros((n, 2))
    th = math.atan(lam / (-grid[0]))
    lw = 0.0
    out[0, 0] = th
    K = np.zeros((ns + 1, 2))
    h = min(1e-2, grid[n - 1] - grid[0])
    t = grid[0]
    for i in range(1, n):
        t_end = grid[i]
        while t < t_end:
            rejected = False
            while True:
                if h < 1e-14 * max(1.0, abs(t)):
                    return out, i, np.nan
                hh = min(h, t_end - t)
                K[0, 0] = _f_theta(t, th, lam)
                if with_log:
                    K[0, 1] = -math.tan(th)
                for s in range(1, ns):
                    y0 = th
                    for j in range(s):
                        y0 += hh * A[s, j] * K[j, 0]
                    K[s, 0] = _f_theta(t + C[s] * hh, y0, lam)
                    if with_log:
                        K[s, 1] = -math.tan(y0)
                n0 = th
                n1 = lw
                for j in range(ns):
                    n0 += hh * B[j] * K[j, 0]
                    n1 += hh * B[j] * K[j, 1]
                K[ns, 0] = _f_theta(t + hh, n0, lam)
                if with_log:
                    K[ns, 1] = -math.tan(n0)
                e5n = 0.0
                e3n = 0.0
                for c in range(nc):
                    if c == 0:
                        sc = atol + max(abs(th), abs(n0)) * rtol
                    else:
                        sc = atol + max(abs(lw), abs(n1)) * rtol
                    a5 = 0.0
                    a3 = 0.0
                    for j in range(ns + 1):
                        a5 += K[j, c] * E5[j]
                        a3 += K[j, c] * E3[j]
                    e5n += (a5 / sc) ** 2
                    e3n += (a3 / sc) ** 2
                if e5n == 0.0 and e3n == 0.0:
                    err = 0.0
                else:
                    err = hh * e5n / math.sqrt((e5n + 0.01 * e3n) * nc)
                if err < 1.0:
                    fac = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** (-1.0 / 8.0))
                    if rejected:
                        fac = min(1.0, fac)
                    # a step shortened only to hit a node does not shrink the next one
                    h = max(h, hh * fac) if hh < h and fac >= 1.0 else hh * fac
                    if n0 >= theta_cap:
                        return out, i, t + hh * (theta_cap - th) / (n0 - th)
                    t = t + hh
                    th = n0
                    lw = n1
                    break
                h = hh * max(0.2, 0.9 * err ** (-1.0 / 8.0))
                rejected = True
        t = t_end
        out[i, 0] = th
        out[i, 1] = lw
    return out, n, np.nan


def _run(lam, grid, with_log, theta_cap):
    return _dop853(float(lam), np.ascontiguousarray(grid, dtype=float), with_log,
                   float(theta_cap), RTOL, ATOL, *_TAB)


def end_angle(lam: float, sigma: float, T: float = T_DEFAULT) -> float:
    """``atan b(sigma)`` continued through blow-ups; increasing in ``lam``."""
    out, k, _ = _run(lam, np.array([-T, sigma]), False, 1e300)
    if k < 2:
        raise SolverError("Riccati integration failed (step size underflow)")
    return float(out[1, 0])


def shoot_beta(lam: float, sigma: float, T: float = T_DEFAULT, beta_cap: float = BETA_CAP,
               grid_step: float = GRID_STEP) -> RiccatiTrace:
    """Integrate the Riccati flow from ``-T`` to ``sigma`` on a grid of spacing ``<= grid_step``.

    Integration stops when ``b`` exceeds ``beta_cap``, i.e. ``w`` reaches an interior zero.
    """
    if not lam >= 0.0:
        raise DomainError(f"lambda must be >= 0, got {lam!r}")
    if not sigma > -T:
        raise DomainError(f"sigma={sigma} must exceed the left truncation -T={-T}")
    lam = float(lam)
    n = max(int(math.ceil((sigma + T) / grid_step)) + 1, 2)
    grid = np.linspace(-T, sigma, n)
    out, k, loc = _run(lam, grid, True, math.atan(beta_cap))
    blew_up = not math.isnan(loc)
    if not blew_up and k < n:
        raise SolverError("Riccati integration failed (step size underflow)")
    b = np.tan(out[:k, 0])
    b[0] = lam / T
    return RiccatiTrace(lam, grid[:k], b, blew_up, float(loc) if blew_up else None,
                        out[:k, 1].copy())


@dataclass
class Eigenpair1D:
    problem: HalfLineProblem
    lambda1: float
    grid: np.ndarray
    w_values: np.ndarray
    trace: RiccatiTrace
    log_norm: float  # log w = trace.log_w - log_norm

    @property
    def sigma(self) -> float:
        return self.problem.sigma

    @property
    def beta(self) -> float:
        return self.problem.beta

    def w_at(self, t):
        return np.exp(self.trace.log_w_at(t) - self.log_norm)

    def psi_bar(self, t):
        """``|w'|/w``; equals the Riccati trace since ``w`` decreases."""
        return self.trace.beta_at(t)

    def boundary_residual(self) -> float:
        """``|w'(sigma) + beta w(sigma)| / w(sigma)``, fourth-order backward difference."""
        g, w = self.grid[-5:], self.w_values[-5:]
        h = g[-1] - g[-2]
        dw = (25 * w[4] - 48 * w[3] + 36 * w[2] - 16 * w[1] + 3 * w[0]) / (12 * h)
        return float(abs(dw + self.beta * w[4]) / w[4])


def solve_lambda1(problem: HalfLineProblem, tol: float = 1e-10,
                  T: float = T_DEFAULT) -> Eigenpair1D:
    """Smallest Robin eigenvalue: bisection to a 1e-3 bracket, then Brent polish."""
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    sigma, beta = problem.sigma, problem.beta
    if beta == 0.0:
        return eigenpair_from_lambda(problem, 0.0, T=T)
    target = math.atan(beta)

    def f(x):
        return end_angle(x, sigma, T) - target

    lo, hi = 0.0, 1.0
    f_lo, f_hi = f(lo), f(hi)
    n = 0
    while f_hi < 0.0:
        lo, f_lo = hi, f_hi
        hi *= 2.0
        f_hi = f(hi)
        n += 1
        if n > _MAX_DOUBLINGS:
            raise SolverError("could not bracket the first eigenvalue")
    if not f_lo < 0.0 <= f_hi:
        raise SolverError("bracket sign check failed")
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid < 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    lam = hi if f_hi == 0.0 else brentq(f, lo, hi, xtol=0.25 * tol, rtol=4 * np.finfo(float).eps)
    return eigenpair_from_lambda(problem, lam, T=T)


def eigenpair_from_lambda(problem: HalfLineProblem, lam: float,
                          T: float = T_DEFAULT) -> Eigenpair1D:
    """Reconstruct ``w`` from the Riccati trace and normalize ``int w^2 phi_1 = 1`` on [-T, sigma]."""
    trace = shoot_beta(lam, problem.sigma, T=T)
    if trace.blew_up:
        raise SolverError(f"lambda={lam} is past the Dirichlet eigenvalue for sigma={problem.sigma}")
    w_raw = np.exp(trace.log_w)
    norm2 = trapezoid(w_raw**2 * phi1(trace.grid), trace.grid)
    return Eigenpair1D(problem, float(lam), trace.grid, w_raw / math.sqrt(norm2), trace,
                       0.5 * math.log(norm2))


def dirichlet_lambda1(sigma: float, T: float = T_DEFAULT, tol: float = 1e-10,
                      beta_cap: float = BETA_CAP) -> float:
    """Smallest ``lam`` whose decaying solution vanishes at ``sigma``.

    Bisection on whether the Riccati trace blows up before reaching ``sigma``.
    """
    cap = math.atan(beta_cap)

    def blows(lam):
        return end_angle(lam, sigma, T) >= cap

    lo, hi = 0.0, 1.0
    n = 0
    while not blows(hi):
        lo, hi = hi, 2.0 * hi
        n += 1
        if n > _MAX_DOUBLINGS:
            raise SolverError("could not bracket the Dirichlet eigenvalue")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if blows(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def decaying_w(lam: float, t, T: float = T_DEFAULT) -> np.ndarray:
    """Decaying solution at ``t`` (any ``lam``), scaled to ``w(-T) = 1``.

    The Riccati trace carries ``w`` up to ``min(t)``; from there the linear equation
    ``w'' = t w' - lam w`` continues it through any zeros.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    order = np.argsort(t)
    ts = t[order]
    t0 = float(ts[0])
    trace = shoot_beta(lam, t0, T=T)
    if trace.blew_up:
        raise SolverError(f"decaying solution for lambda={lam} vanishes before t={t0}")
    w0 = math.exp(trace.log_w[-1])
    out = np.empty_like(ts)
    if ts[-1] > t0:
        sol = solve_ivp(lambda x, y: (y[1], x * y[1] - lam * y[0]), (t0, float(ts[-1])),
                        (w0, -trace.beta_values[-1] * w0), method="DOP853", t_eval=ts,
                        rtol=RTOL, atol=ATOL * w0)
        if not sol.success:
            raise SolverError(sol.message)
        out[:] = sol.y[0]
    else:
        out[:] = w0
    res = np.empty_like(out)
    res[order] = out
    return res


def rayleigh_oracle(problem: HalfLineProblem, grid_size: int = 4000, T: float = 8.0) -> float:
    """Smallest eigenvalue of the finite-difference Rayleigh quotient on ``[-T, sigma]``.

    Stiffness uses midpoint weights, mass the trapezoidal rule; the scaled tridiagonal
    matrix ``M^-1/2 K M^-1/2`` goes to LAPACK bisection. Second order in the spacing.
    """
    if grid_size < 100:
        raise DomainError(f"grid_size must be >= 100, got {grid_size}")
    if T < 6.0:
        raise DomainError(f"T must be >= 6, got {T}")
    sigma, beta = problem.sigma, problem.beta
    if not sigma > -T:
        raise DomainError("sigma must exceed -T")
    x = np.linspace(-T, sigma, grid_size + 1)
    h = x[1] - x[0]
    # 1/sqrt(2 pi) cancels from the quotient
    c = np.exp(-0.5 * (0.5 * (x[:-1] + x[1:])) ** 2) / h
    diag = np.zeros_like(x)
    diag[:-1] += c
    diag[1:] += c
    diag[-1] += beta * math.exp(-0.5 * sigma * sigma)
    m = h * np.exp(-0.5 * x * x)
    m[0] *= 0.5
    m[-1] *= 0.5
    s = np.sqrt(m)
    ev = eigh_tridiagonal(diag / m, -c / (s[:-1] * s[1:]), eigvals_only=True,
                          select="i", select_range=(0, 0), lapack_driver="stebz")
    return float(ev[0])


def _solve_one(args):
    sigma, beta, tol = args
    return solve_lambda1(HalfLineProblem(sigma, beta), tol=tol).lambda1


def lambda1_sweep(sigma_grid, beta: float, tol: float = 1e-10, workers: int | None = None):
    """``[(sigma, lambda1), ...]`` in input order."""
    sig = np.asarray(sigma_grid, dtype=float)
    if sig.ndim != 1 or np.any(np.diff(sig) <= 0):
        raise DomainError("sigma_grid must be strictly increasing")
    jobs = [(float(s), float(beta), tol) for s in sig]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            lams = list(pool.map(_solve_one, jobs))
    else:
        lams = [_solve_one(j) for j in jobs]
    return [(s, lam) for s, lam in zip(sig.tolist(), lams)]
