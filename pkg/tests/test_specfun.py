import math

import numpy as np
import pytest

from mimo_energy import specfun


def series_j(order, x, terms=80):
    """Independent oracle: plain ascending power series (slow, exact for
    moderate arguments)."""
    total = 0.0
    for j in range(terms):
        total += ((-1) ** j * (x / 2.0) ** (order + 2 * j)
                  / (math.factorial(j) * math.factorial(j + order)))
    return total


def test_j0_j1_at_zero():
    assert specfun.bessel_j(0, 0.0) == 1.0
    assert specfun.bessel_j(1, 0.0) == 0.0


def test_j0_at_first_j1_zero():
    # value from the series oracle at 3.8317
    assert specfun.bessel_j(0, 3.8317) == pytest.approx(series_j(0, 3.8317),
                                                        abs=1e-12)
    assert specfun.bessel_j(0, 3.8317) == pytest.approx(-0.4028, abs=5e-5)


@pytest.mark.parametrize("order", [0, 1, 2, 7])
def test_bessel_matches_series_oracle(order):
    # the plain-series oracle itself cancels catastrophically past x ~ 15,
    # so probe the switchover region only; larger x is cross-checked below
    for x in (0.3, 1.9, 5.5, 11.7, 13.4):
        assert specfun.bessel_j(order, x) == pytest.approx(
            series_j(order, x), rel=1e-9, abs=5e-13)


def test_bessel_large_argument_against_scipy():
    sp = pytest.importorskip("scipy.special")
    xs = np.array([12.5, 50.0, 137.0, 200.0, 630.0])
    for order in (0, 1, 3, 12, 21):
        mine = specfun.bessel_j(order, xs)
        ref = sp.jv(order, xs)
        assert np.allclose(mine, ref, rtol=1e-10, atol=1e-12)


def test_bessel_negative_and_array_arguments():
    assert specfun.bessel_j(1, -3.0) == -specfun.bessel_j(1, 3.0)
    assert specfun.bessel_j(2, -3.0) == specfun.bessel_j(2, 3.0)
    arr = specfun.bessel_j(0, np.array([0.5, 3.0]))
    assert arr.shape == (2,)


def test_bessel_rejects_bad_input():
    with pytest.raises(ValueError):
        specfun.bessel_j(-1, 1.0)
    with pytest.raises(ValueError):
        specfun.bessel_j(0, np.inf)


def test_j0_derivative_is_minus_j1():
    rng = np.random.default_rng(7)
    xs = rng.uniform(0.05, 40.0, 100)
    h = 1e-6
    for x in xs:
        fd = (specfun.bessel_j(0, x + h) - specfun.bessel_j(0, x - h)) / (2 * h)
        assert fd == pytest.approx(-specfun.bessel_j(1, x), abs=1e-6)


def bisect_oracle(f, lo, hi, tol=1e-13):
    flo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if flo * f(mid) < 0:
            hi = mid
        else:
            lo, flo = mid, f(mid)
    return 0.5 * (lo + hi)


def test_j1_zeros_against_bisection_oracle():
    zeros = specfun.j1_zeros(2)
    # brackets found by scanning sign changes of the series oracle
    first = bisect_oracle(lambda t: series_j(1, t), 3.5, 4.0)
    second = bisect_oracle(lambda t: series_j(1, t), 6.8, 7.3)
    assert zeros.values[0] == pytest.approx(first, abs=1e-11)
    assert zeros.values[1] == pytest.approx(second, abs=1e-11)
    assert first == pytest.approx(3.83171, abs=1e-5)
    assert second == pytest.approx(7.01559, abs=1e-5)


def test_j1_zeros_ordering_and_residual():
    zeros = specfun.j1_zeros(60)
    v = zeros.values
    assert np.all(np.diff(v) > 0) and np.all(v > 0)
    assert np.max(np.abs(specfun.bessel_j(1, v))) < 1e-12
    # asymptotic spacing approaches pi
    spacing = np.diff(v)[10:]
    assert np.all(np.abs(spacing - np.pi) < 0.05 * np.pi)


def test_j1_zeros_match_fine_scan_brackets():
    zeros = specfun.j1_zeros(12).values
    grid = np.arange(0.1, zeros[-1] + 1.0, 0.1)
    vals = specfun.bessel_j(1, grid)
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    assert flips.size >= 12
    for z, i in zip(zeros, flips[:12]):
        assert grid[i] < z < grid[i + 1]


def test_jm_prime_zeros_are_roots():
    for m in (1, 3, 20):
        zs = specfun.jm_prime_zeros(m, 6)
        assert np.all(np.diff(zs) > 0)
        deriv = specfun.bessel_j(m - 1, zs) - m / zs * specfun.bessel_j(m, zs)
        assert np.max(np.abs(deriv)) < 1e-11
        assert zs[0] > m * 0.99  # first extremum sits above the order


def test_gaussian_tail_basics():
    assert specfun.gaussian_tail(0.0) == pytest.approx(0.5, abs=1e-15)
    assert specfun.gaussian_tail_inv(0.5) == pytest.approx(0.0, abs=1e-12)
    # frozen from bisection on the complementary error integral
    assert specfun.gaussian_tail_inv(0.01) == pytest.approx(2.3263478740,
                                                            abs=1e-9)


def test_gaussian_tail_inverse_round_trip():
    for p in (0.1, 0.01, 0.001):
        x = specfun.gaussian_tail_inv(p)
        assert abs(specfun.gaussian_tail(x) - p) < 1e-10


def test_gaussian_tail_inv_strictly_decreasing_and_domain():
    ps = np.linspace(0.01, 0.99, 25)
    xs = [specfun.gaussian_tail_inv(p) for p in ps]
    assert np.all(np.diff(xs) < 0)
    with pytest.raises(ValueError):
        specfun.gaussian_tail_inv(0.0)
    with pytest.raises(ValueError):
        specfun.gaussian_tail_inv(1.0)


def test_bessel_zeros_type_invariants():
    with pytest.raises(ValueError):
        specfun.BesselZeros(values=np.array([2.0, 1.0]), count=2)
    with pytest.raises(ValueError):
        specfun.BesselZeros(values=np.array([-1.0]), count=1)
