"""Special functions used by the covariance series and planning formulas.

Bessel functions of the first kind are evaluated natively (ascending power
series for small arguments, Miller's downward recurrence with renormalization
otherwise) so results are bit-reproducible across installations. The Gaussian
tail function and its inverse build on the standard-library complementary
error function plus bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "BesselZeros",
    "bessel_j",
    "j1_zeros",
    "jm_prime_zeros",
    "gaussian_tail",
    "gaussian_tail_inv",
]

_SERIES_CUTOFF = 2.0
_RESCALE = 1e250


@dataclass(frozen=True)
class BesselZeros:
    """The first ``count`` positive zeros of J1, strictly increasing."""

    values: np.ndarray
    count: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size != self.count:
            raise ValueError("values must be a 1-D array of length count")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if not (np.all(v > 0) and np.all(np.diff(v) > 0)):
            raise ValueError("zeros must be positive and strictly increasing")
        object.__setattr__(self, "values", v)


def _series_jn(n: int, x: np.ndarray) -> np.ndarray:
    """Ascending power series, adequate for |x| <= ~2."""
    half = x / 2.0
    term = half**n / math.factorial(n)
    total = term.copy()
    z = half * half
    for j in range(1, 30):
        term = term * (-z) / (j * (j + n))
        total += term
        if np.all(np.abs(term) <= 1e-18 * (np.abs(total) + 1e-300)):
            break
    return total


def _miller_jn(n: int, x: np.ndarray) -> np.ndarray:
    """Downward recurrence normalized by J0 + 2*(J2 + J4 + ...) = 1."""
    xmax = float(np.max(x))
    nu = max(n, xmax)
    start = int(nu + 15.0 * nu ** (1.0 / 3.0) + 30)
    inv_x = 1.0 / x
    jp = np.zeros_like(x)
    jc = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    result = np.zeros_like(x)
    for k in range(start, 0, -1):
        jm = (2.0 * k) * inv_x * jc - jp
        jp, jc = jc, jm  # jc is now J_{k-1} (unnormalized)
        order = k - 1
        if order == n:
            result = jc.copy()
        if order > 0 and order % 2 == 0:
            norm += jc
        big = np.abs(jc) > _RESCALE
        if np.any(big):
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            jp *= scale
            jc *= scale
            norm *= scale
            result *= scale
    norm = jc + 2.0 * norm  # jc holds unnormalized J0
    return result / norm


def bessel_j(order: int, x):
    """Bessel function of the first kind J_order(x).

    ``x`` may be a scalar or an ndarray; negative arguments are handled via
    the parity J_n(-x) = (-1)^n J_n(x).
    """
    if order < 0 or order != int(order):
        raise ValueError("order must be a non-negative integer")
    order = int(order)
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("argument must be finite")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).copy()
    sign = np.where((arr < 0) & (order % 2 == 1), -1.0, 1.0)
    arr = np.abs(arr)
    out = np.empty_like(arr)

    small = arr <= _SERIES_CUTOFF
    if np.any(small):
        out[small] = _series_jn(order, arr[small])
    if np.any(~small):
        out[~small] = _miller_jn(order, arr[~small])
    out *= sign
    return float(out[0]) if scalar else out


def _jm_prime(m: int, x):
    """J_m'(x) via J_m'(x) = J_{m-1}(x) - (m/x) J_m(x)."""
    if m == 0:
        return -np.asarray(bessel_j(1, x))
    x = np.asarray(x, dtype=float)
    return bessel_j(m - 1, x) - (m / x) * bessel_j(m, x)


def _scan_and_bisect(f, start: float, step: float, count: int,
                     tol: float = 1e-12) -> np.ndarray:
    """First ``count`` sign-change roots of a vectorizable ``f``."""
    lo = np.empty(0)
    hi = np.empty(0)
    a = start
    while lo.size < count:
        grid = a + step * np.arange(0, 4 * (count - lo.size) + 64)
        vals = np.asarray(f(grid))
        flip = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        lo = np.concatenate([lo, grid[flip]])
        hi = np.concatenate([hi, grid[flip + 1]])
        a = grid[-1]
    lo, hi = lo[:count], hi[:count]
    flo = np.asarray(f(lo))
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        fm = np.asarray(f(mid))
        left = flo * fm < 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fm)
    return 0.5 * (lo + hi)


@lru_cache(maxsize=64)
def _j1_zero_values(count: int) -> tuple:
    vals = _scan_and_bisect(lambda t: bessel_j(1, t), 1.0, 0.5, count)
    return tuple(vals)


def j1_zeros(count: int) -> BesselZeros:
    """First ``count`` positive zeros of J1 (bisection to 1e-12)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return BesselZeros(values=np.array(_j1_zero_values(count)), count=count)


@lru_cache(maxsize=256)
def _jm_prime_zero_values(m: int, count: int) -> tuple:
    # first zero of J_m' lies just above m; the scan from near zero also
    # skips the trivial root at the origin
    vals = _scan_and_bisect(lambda t: _jm_prime(m, t), 0.25, 0.25, count)
    return tuple(vals)


def jm_prime_zeros(m: int, count: int) -> np.ndarray:
    """First ``count`` positive zeros of J_m' (the trivial x=0 excluded).

    Used for the radial eigenvalues of the reflecting-disc diffusion kernel.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if m == 0:
        return j1_zeros(count).values
    return np.array(_jm_prime_zero_values(m, count))


def gaussian_tail(x: float) -> float:
    """Q(x): probability that a standard normal exceeds x."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def gaussian_tail_inv(p: float) -> float:
    """Inverse of the Gaussian tail function, bisection plus Newton polish.

    Raises ValueError outside the open interval (0, 1).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("probability must lie strictly between 0 and 1")
    lo, hi = -40.0, 40.0
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if gaussian_tail(mid) > p:  # Q decreasing
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(2):
        q = gaussian_tail(x)
        pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        if pdf > 0.0:
            x += (q - p) / pdf
    return x
