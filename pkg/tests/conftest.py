"""Shared independent oracles for the test suite.

These deliberately avoid the library's fast paths: norms by direct
loops, Haar coefficients by explicit pairing against sampled basis
functions, convolutions by O(N^2) sums, set measures by rational
arithmetic.  Tests compare the production code against them.
"""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from haarlab.dyadic import DyadicCube, SignPattern, all_sign_patterns, haar_function
from haarlab.grid import GridFunction


def direct_lp_norm(u: GridFunction, p: float) -> float:
    total = 0.0
    flat = u.values.reshape(-1, u.d) if u.d > 1 else u.values.reshape(-1, 1)
    for row in flat:
        if u.d == 1:
            mag = abs(row[0])
        elif np.isinf(u.q):
            mag = max(abs(x) for x in row)
        else:
            mag = sum(abs(x) ** u.q for x in row) ** (1.0 / u.q)
        total += mag**p
    return (total * 2.0 ** (-u.J * u.n)) ** (1.0 / p)


def direct_inner_product(u: GridFunction, v: GridFunction) -> float:
    total = 0.0
    for a, b in zip(u.values.ravel(), v.values.ravel()):
        total += a * b
    return total * 2.0 ** (-u.J * u.n)


def brute_force_haar_coefficients(u: GridFunction):
    """Pairing against every explicitly sampled basis function."""
    out = {}
    for j in range(u.J):
        for eps in all_sign_patterns(u.n):
            for k in itertools.product(range(2**j), repeat=u.n):
                Q = DyadicCube(j, k)
                h = haar_function(Q, eps, u.J)
                coeff = direct_inner_product(u, h) * 2.0 ** (j * u.n)
                out[(j, k, eps.eps)] = coeff
    out["mean"] = float(u.values.mean())
    return out


def direct_circular_convolution(a: np.ndarray, b: np.ndarray, J: int) -> np.ndarray:
    """O(N^2) Riemann-weighted circular convolution."""
    n = a.ndim
    N = a.shape[0]
    out = np.zeros_like(a)
    for x in itertools.product(range(N), repeat=n):
        acc = 0.0
        for y in itertools.product(range(N), repeat=n):
            z = tuple((xi - yi) % N for xi, yi in zip(x, y))
            acc += a[y] * b[z]
        out[x] = acc * 2.0 ** (-J * n)
    return out


def rational_quadrature_power(samples, J: int, n: int, p: int) -> Fraction:
    """Exact ``2^{-Jn} sum |u|^p`` for Fraction-valued samples, integer p."""
    total = Fraction(0)
    for v in samples:
        total += abs(Fraction(v)) ** p
    return total / Fraction(2 ** (J * n))


def lattice_ring_cover_oracle(Q: DyadicCube, eps: SignPattern, lam: int, J: int):
    """Independent full-mode cover enumeration.

    Distances from a candidate cube to the discontinuity set are exact:
    every rectangle of the set is sampled on its own dyadic lattice at
    the candidate scale (the minimizing point of an axis-aligned
    configuration lies on that lattice).
    """
    n = Q.n
    s = Q.j + lam
    side = Q.sidelength
    side_e = 2.0**-s
    lo = [c * side for c in Q.k]
    hi = [l + side for l in lo]
    threshold = np.sqrt(n) * 2.0**-lam * side
    rects = []
    for a in range(n):
        planes = [lo[a], hi[a]]
        if eps.eps[a] == 1:
            planes.append(lo[a] + side / 2)
        for c in planes:
            rects.append((a, c))

    def rect_points(a, c):
        axes = []
        for i in range(n):
            if i == a:
                axes.append(np.array([c]))
            else:
                axes.append(lo[i] + side_e * np.arange(int(round(side / side_e)) + 1))
        return itertools.product(*axes)

    def point_box_dist(point, e):
        sq = 0.0
        for i, p_i in enumerate(point):
            best = np.inf
            for shift in (-1.0, 0.0, 1.0):
                b_lo = e[i] * side_e + shift
                b_hi = b_lo + side_e
                gap = max(0.0, b_lo - p_i, p_i - b_hi)
                best = min(best, gap)
            sq += best * best
        return np.sqrt(sq)

    cover = set()
    pad = int(np.ceil(threshold / side_e)) + 1
    base = [c << lam for c in Q.k]
    ranges = [range(b - pad, b + 2**lam + pad) for b in base]
    for e in itertools.product(*ranges):
        dmin = min(
            point_box_dist(pt, e) for a, c in rects for pt in rect_points(a, c)
        )
        if dmin <= threshold:
            cover.add(tuple(c % 2**s for c in e))
    return cover


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
