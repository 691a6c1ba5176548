import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from haarlab.dyadic import (
    DyadicCube,
    HaarCoefficients,
    SignPattern,
    all_sign_patterns,
    conditional_expectation,
    haar_analysis,
    haar_function,
    haar_synthesis,
    scale_coefficients,
    single_scale_synthesis,
)
from haarlab.grid import GridFunction, constant_function, inner_product, lp_norm
from conftest import brute_force_haar_coefficients


def test_haar_function_defining_case():
    h = haar_function(DyadicCube(0, (0,)), SignPattern((1,)), 1)
    assert np.array_equal(h.values, [1.0, -1.0])


def test_haar_function_checkerboard():
    h = haar_function(DyadicCube(0, (0, 0)), SignPattern((1, 1)), 1)
    assert np.array_equal(h.values, [[1.0, -1.0], [-1.0, 1.0]])


def test_haar_function_support_and_values(rng):
    J = 5
    for _ in range(50):
        j = int(rng.integers(0, J))
        k = tuple(int(c) for c in rng.integers(0, 2**j, size=2))
        eps = all_sign_patterns(2)[int(rng.integers(0, 3))]
        Q = DyadicCube(j, k)
        h = haar_function(Q, eps, J)
        assert set(np.unique(h.values)) <= {-1.0, 0.0, 1.0}
        one = constant_function(2, J, 1.0)
        assert inner_product(h, one) == pytest.approx(0.0, abs=1e-14)
        assert inner_product(h, h) == pytest.approx(Q.measure, abs=1e-14)


def test_haar_function_unresolvable_scale():
    with pytest.raises(ValueError, match="unresolvable scale"):
        haar_function(DyadicCube(3, (0, 0)), SignPattern((1, 0)), 3)


def test_haar_function_zero_pattern_rejected():
    with pytest.raises(ValueError, match="nonzero"):
        haar_function(DyadicCube(0, (0, 0)), SignPattern((0, 0)), 2)


def test_analysis_of_constant():
    u = constant_function(2, 3, 2.5)
    c = haar_analysis(u)
    assert c.mean == pytest.approx(2.5, abs=1e-15)
    for lev in c.levels.values():
        for arr in lev.values():
            assert np.max(np.abs(arr)) < 1e-14


def test_analysis_of_single_haar_has_one_entry():
    J = 4
    Q = DyadicCube(2, (1, 2))
    eps = SignPattern((1, 1))
    c = haar_analysis(haar_function(Q, eps, J))
    entries = list(c.items(tol=1e-12))
    assert len(entries) == 1
    (cube, pat), val = entries[0]
    assert (cube, pat) == (Q, eps)
    assert val == pytest.approx(1.0, abs=1e-13)
    assert c.mean == pytest.approx(0.0, abs=1e-14)


def test_analysis_matches_brute_force(rng):
    u = GridFunction(2, 3, rng.standard_normal((8, 8)))
    c = haar_analysis(u)
    oracle = brute_force_haar_coefficients(u)
    for key, val in oracle.items():
        if key == "mean":
            assert c.mean == pytest.approx(val, abs=1e-12)
        else:
            j, k, eps = key
            assert c.get(DyadicCube(j, k), SignPattern(eps)) == pytest.approx(val, abs=1e-12)


def test_synthesis_of_mean_only():
    c = HaarCoefficients(2, 3)
    c.mean = 1.0
    u = haar_synthesis(c, 2, 3)
    assert np.allclose(u.values, 1.0)


def test_roundtrip_and_parseval(rng):
    for _ in range(100):
        u = GridFunction(2, 3, rng.standard_normal((8, 8)))
        c = haar_analysis(u)
        v = haar_synthesis(c, 2, 3)
        assert np.max(np.abs(u.values - v.values)) < 1e-12
        assert abs(c.norm2_sq() - lp_norm(u, 2.0) ** 2) < 1e-12


def test_synthesis_rejects_unresolvable():
    c = HaarCoefficients(2, 5)
    c.set_level(4, SignPattern((1, 0)), np.ones((16, 16)))
    with pytest.raises(ValueError, match="unresolvable"):
        haar_synthesis(c, 2, 4)


@given(arrays(np.float64, (4, 4), elements=st.floats(-100, 100)))
@settings(max_examples=25, deadline=None)
def test_roundtrip_hypothesis(vals):
    u = GridFunction(2, 2, vals)
    v = haar_synthesis(haar_analysis(u), 2, 2)
    assert np.max(np.abs(u.values - v.values)) <= 1e-10 * max(1.0, np.max(np.abs(vals)))


def test_biorthogonality_exhaustive():
    n, J = 2, 3
    basis = []
    for j in range(J):
        for eps in all_sign_patterns(n):
            for k in itertools.product(range(2**j), repeat=n):
                Q = DyadicCube(j, k)
                basis.append((Q, eps, haar_function(Q, eps, J).values.ravel()))
    mat = np.array([b[2] for b in basis])
    gram = mat @ mat.T * 2.0 ** (-J * n)
    expected = np.diag([b[0].measure for b in basis])
    assert np.max(np.abs(gram - expected)) < 1e-13


def test_tower_property(rng):
    u = GridFunction(2, 4, rng.standard_normal((16, 16)))
    for i, j in itertools.product(range(5), repeat=2):
        a = conditional_expectation(conditional_expectation(u, j), i)
        b = conditional_expectation(u, min(i, j))
        assert np.array_equal(a.values, b.values)


def test_conditional_expectation_extremes(rng):
    u = GridFunction(2, 3, rng.standard_normal((8, 8)))
    assert np.array_equal(conditional_expectation(u, 3).values, u.values)
    assert np.allclose(conditional_expectation(u, 0).values, u.values.mean())
    with pytest.raises(ValueError):
        conditional_expectation(u, 4)


def test_conditional_expectation_contracts(rng):
    for _ in range(50):
        u = GridFunction(2, 3, rng.standard_normal((8, 8)))
        j = int(np.random.default_rng(int(abs(u.values[0, 0]) * 1e6)).integers(0, 4))
        for p in (1.5, 2.0, 3.0):
            assert lp_norm(conditional_expectation(u, j), p) <= lp_norm(u, p) + 1e-12


def test_scale_coefficients_match_full_analysis(rng):
    u = GridFunction(2, 4, rng.standard_normal((16, 16)))
    c = haar_analysis(u)
    for j in range(4):
        for eps in all_sign_patterns(2):
            np.testing.assert_allclose(
                scale_coefficients(u, j, eps), c.levels[j][eps.eps], atol=1e-13)


def test_single_scale_synthesis_matches_sum(rng):
    J = 4
    coeffs = rng.standard_normal((4, 4))
    eps = SignPattern((1, 1))
    direct = np.zeros((16, 16))
    for k in itertools.product(range(4), repeat=2):
        direct += coeffs[k] * haar_function(DyadicCube(2, k), eps, J).values
    v = single_scale_synthesis(coeffs, 2, eps, 2, J)
    assert np.max(np.abs(v.values - direct)) < 1e-13


def test_coefficients_csv_roundtrip(tmp_path, rng):
    u = GridFunction(2, 3, rng.standard_normal((8, 8)))
    c = haar_analysis(u)
    path = tmp_path / "coeffs.csv"
    c.write_csv(path)
    c2 = HaarCoefficients.read_csv(path, 2, 3)
    v = haar_synthesis(c2, 2, 3)
    assert np.max(np.abs(u.values - v.values)) < 1e-12
    header = path.read_text().splitlines()[0]
    assert header == "j,k_1,k_2,eps_1,eps_2,value"


def test_cube_validation():
    with pytest.raises(ValueError):
        DyadicCube(2, (4, 0))
    with pytest.raises(ValueError):
        DyadicCube(-1, (0,))
    assert DyadicCube(3, (1, 2)).ancestor(2) == DyadicCube(1, (0, 0))
