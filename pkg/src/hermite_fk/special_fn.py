"""Scalar special functions: erf, erfinv, 1/Gamma and the Hermite-function series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import DomainError, TruncationError

T_MAX_SERIES = 8.0
SERIES_RTOL = 1e-14
_MAX_TERMS = 2000

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def erf(x):
    """Error function. Scalars go through libm, arrays through scipy."""
    if np.ndim(x) == 0:
        return math.erf(float(x))
    return _sp.erf(np.asarray(x, dtype=float))


def erfinv(p: float) -> float:
    """Inverse error function on (-1, 1), polished by Newton steps on ``erf``."""
    p = float(p)
    if not -1.0 < p < 1.0 or math.isnan(p):
        raise DomainError(f"erfinv requires p in (-1, 1), got {p!r}")
    if p == 0.0:
        return 0.0
    if p < 0.0:
        return -erfinv(-p)
    x = float(_sp.erfinv(p))
    for _ in range(3):
        r = math.erf(x) - p
        if r == 0.0:
            break
        x -= r / (2.0 / math.sqrt(math.pi) * math.exp(-x * x))
    return x


def _sinpi(x: float) -> float:
    # sin(pi x) with argument reduction so that relative accuracy survives near integers
    k = round(x)
    s = math.sin(math.pi * (x - k))
    return -s if k % 2 else s


def _recip_gamma_lanczos(x: float) -> float:
    # valid for x >= 0.5
    xm = x - 1.0
    a = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        a += _LANCZOS_COEF[i] / (xm + i)
    t = xm + _LANCZOS_G + 0.5
    # split the power so that t**(x - 1/2) does not overflow before the exponential
    half = t ** (0.5 * (xm + 0.5))
    return math.exp(t) / half / half / (_SQRT_2PI * a)


def recip_gamma(x: float) -> float:
    """1/Gamma(x); exactly zero at the non-positive integers."""
    x = float(x)
    if math.isnan(x):
        return math.nan
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    if x >= 0.5:
        if x > 171.7:
            return 0.0
        return _recip_gamma_lanczos(x)
    # reflection: 1/Gamma(x) = Gamma(1 - x) sin(pi x) / pi
    rg = _recip_gamma_lanczos(1.0 - x)
    if rg == 0.0:
        return math.copysign(math.inf, _sinpi(x))
    return _sinpi(x) / (math.pi * rg)


def binom_general(lam: float, m: int) -> float:
    """Generalized binomial coefficient by the product recurrence."""
    if m < 0:
        return 0.0
    b = 1.0
    for k in range(1, m + 1):
        b *= (lam - k + 1) / k
    return b


@dataclass(frozen=True)
class SeriesEval:
    lam: float
    t: float
    terms_used: int
    value: float
    truncation_bound: float


def hermite_series_w(lam: float, t: float) -> SeriesEval:
    """Sum ``sum_m binom(lam, m) (t/sqrt 2)^m / Gamma((1 - lam + m)/2)`` with normalization 1.

    Consecutive same-parity terms satisfy ``|a_{m+2}/a_m| = t^2 |m - lam| / ((m+1)(m+2))``,
    so once ``m - 1 > lam`` the tail after index ``m`` is bounded by
    ``q (|a_{m-1}| + |a_m|) / (1 - q)`` with ``q = t^2 / (m + 1)``.

    This is the solution that stays polynomial as ``t -> +inf``. The decaying eigenfunction
    on a left half-line ``(-inf, sigma)`` is ``hermite_series_w(lam, -t)``.
    """
    lam = float(lam)
    t = float(t)
    if lam < 0.0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    if not abs(t) <= T_MAX_SERIES:
        raise TruncationError(
            f"|t| = {abs(t)} exceeds {T_MAX_SERIES}; integrate the ODE instead"
        )
    x = t / math.sqrt(2.0)
    t2 = t * t
    coef = 1.0  # binom(lam, m) * x**m
    total = 0.0
    prev = 0.0
    bound = math.inf
    m = 0
    while m < _MAX_TERMS:
        if m > 0:
            coef *= (lam - m + 1) / m * x
        a = coef * recip_gamma((1.0 - lam + m) / 2.0)
        total += a
        if m >= 1 and m - 1 > lam:
            q = t2 / (m + 1)
            if q < 1.0:
                bound = q * (abs(prev) + abs(a)) / (1.0 - q)
                if bound <= SERIES_RTOL * max(1.0, abs(total)):
                    break
        if coef == 0.0 and m > lam:
            # integer lam: every later binomial coefficient vanishes
            bound = 0.0
            break
        prev = a
        m += 1
    else:
        raise TruncationError(f"series did not converge in {_MAX_TERMS} terms")
    return SeriesEval(lam=lam, t=t, terms_used=m + 1, value=total, truncation_bound=bound)


def decaying_series_w(lam: float, t: float) -> float:
    """Value of the eigenfunction branch with polynomial growth as ``t -> -inf``."""
    return hermite_series_w(lam, -t).value
