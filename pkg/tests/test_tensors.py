import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vlinetomo import DomainError, GridField, NumericError, SymTensor, mixed_power, pair, sym_power
from vlinetomo.tensors import AnalyticField, MAX_RANK, ZeroField, contraction_weights, pixel_centers

vec = st.tuples(st.floats(-2, 2), st.floats(-2, 2)).map(np.array)


def brute_contract(f: SymTensor, factors):
    """Full Einstein contraction of ``f`` with the symmetrized product of ``factors``."""
    full = f.full()
    m = f.m
    total = 0.0
    perms = list(itertools.permutations(range(m)))
    for idx in itertools.product((0, 1), repeat=m):
        sym = np.mean([np.prod([factors[p][idx[i]] for i, p in enumerate(perm)]) for perm in perms])
        total += full[idx] * sym
    return total


def test_sym_power_axes():
    np.testing.assert_array_equal(sym_power((1.0, 0.0), 3).comp, [1, 0, 0, 0])
    np.testing.assert_array_equal(sym_power((0.0, 1.0), 2).comp, [0, 0, 1])


def test_sym_power_diagonal_self_pairing():
    u = sym_power((1.0, 1.0), 2)
    np.testing.assert_array_equal(u.comp, [1, 1, 1])
    assert pair(u, u) == 4.0


def test_mixed_power_reduces_to_pure_powers():
    u, v = np.array([0.3, -0.8]), np.array([0.6, 0.1])
    np.testing.assert_allclose(mixed_power(u, v, 0, 3).comp, sym_power(u, 3).comp)
    np.testing.assert_allclose(mixed_power(u, v, 3, 3).comp, sym_power(v, 3).comp)


def test_mixed_power_off_diagonal_example():
    w = mixed_power((1.0, 0.0), (0.0, 1.0), 1, 2)
    np.testing.assert_allclose(w.comp, [0, 0.5, 0])
    f = SymTensor(2, [0.7, 1.9, -0.4])
    assert pair(f, w) == pytest.approx(1.9)


@pytest.mark.parametrize("k", [-1, 4])
def test_mixed_power_rejects_k(k):
    with pytest.raises(DomainError):
        mixed_power((1.0, 0.0), (0.0, 1.0), k, 3)


def test_pair_examples():
    f = SymTensor(2, [0.0, 1.0, 0.0])
    assert pair(f, sym_power((1.0, 1.0), 2)) == pytest.approx(2.0)
    assert pair(f, SymTensor(2, np.zeros(3))) == 0.0
    with pytest.raises(DomainError):
        pair(f, sym_power((1.0, 0.0), 3))


def test_rank_limits():
    with pytest.raises(DomainError):
        sym_power((1.0, 0.0), MAX_RANK + 1)
    with pytest.raises(DomainError):
        SymTensor(2, [1.0, 2.0])


@settings(max_examples=80, deadline=None)
@given(a=vec, b=vec, m=st.integers(1, 5))
def test_pair_of_powers_is_power_of_dot(a, b, m):
    expected = float(a @ b) ** m
    got = pair(sym_power(a, m), sym_power(b, m))
    assert got == pytest.approx(expected, rel=1e-12, abs=1e-12 * max(1.0, np.linalg.norm(a) ** m * np.linalg.norm(b) ** m))


@settings(max_examples=40, deadline=None)
@given(a=vec, b=vec, m=st.integers(1, 4))
def test_pair_matches_brute_force(a, b, m):
    f = sym_power(a, m)
    assert pair(f, sym_power(b, m)) == pytest.approx(brute_contract(f, [b] * m), rel=1e-10, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(u=vec, v=vec, m=st.integers(1, 4), data=st.data())
def test_mixed_power_is_symmetrized_product(u, v, m, data):
    k = data.draw(st.integers(0, m))
    comp = data.draw(st.lists(st.floats(-1, 1), min_size=m + 1, max_size=m + 1))
    f = SymTensor(m, comp)
    expected = brute_contract(f, [v] * k + [u] * (m - k))
    # slot order of the factors must not matter
    shuffled = brute_contract(f, [u] * (m - k) + [v] * k)
    got = pair(f, mixed_power(u, v, k, m))
    assert got == pytest.approx(expected, rel=1e-10, abs=1e-10)
    assert shuffled == pytest.approx(expected, rel=1e-10, abs=1e-10)


def test_contraction_weights_broadcast():
    a = np.array([[1.0, 0.0], [0.0, 1.0]])
    w = contraction_weights(a, np.array([0.0, 1.0]), 1, 2)
    assert w.shape == (2, 3)
    np.testing.assert_allclose(w[0], [0, 1, 0])
    np.testing.assert_allclose(w[1], [0, 0, 1])


def _blob(m, R):
    comps = [lambda x, y, k=k: (k + 1) * np.exp(-(x**2 + y**2) / 0.1) for k in range(m + 1)]
    return AnalyticField(comps, R)


def test_field_zero_outside_support():
    f = _blob(2, 0.5)
    theta = np.linspace(0, 2 * np.pi, 50)
    for r in (0.5000001, 0.51, 3.0):
        assert np.all(f.evaluate(r * np.cos(theta), r * np.sin(theta)) == 0.0)
    # exactly on the boundary circle
    assert np.all(f.evaluate(np.array([0.5, 0.0, -0.3]), np.array([0.0, -0.5, 0.4])) == 0.0)
    assert np.all(f.evaluate(0.1, 0.0)[:, ...] > 0)


def test_field_rejects_non_finite():
    f = AnalyticField([lambda x, y: np.full_like(x, np.nan)], 1.0)
    with pytest.raises(NumericError):
        f.evaluate(0.1, 0.1)


def test_field_arithmetic():
    f = _blob(1, 0.8)
    g = 2.0 * f + ZeroField(1, 0.8)
    np.testing.assert_allclose(g.evaluate(0.2, -0.1), 2 * f.evaluate(0.2, -0.1))
    with pytest.raises(DomainError):
        f + _blob(2, 0.8)


def test_grid_field_reproduces_nodes_and_support():
    n, extent = 32, 1.0
    data = np.random.default_rng(0).normal(size=(3, n, n))
    g = GridField(data, extent, R_support=0.7)
    xs = pixel_centers(n, extent)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    inside = X**2 + Y**2 < 0.49
    vals = g.evaluate(X, Y)
    np.testing.assert_allclose(vals[:, inside], data[:, inside])
    assert np.all(vals[:, ~inside] == 0.0)


def test_grid_field_bilinear_is_exact_for_linear_data():
    n, extent = 16, 1.0
    xs = pixel_centers(n, extent)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    data = np.stack([2 * X - 3 * Y + 1])
    g = GridField(data, extent, R_support=2 * extent)
    pts = np.random.default_rng(2).uniform(xs[0], xs[-1], size=(50, 2))
    np.testing.assert_allclose(g.evaluate(pts[:, 0], pts[:, 1])[0], 2 * pts[:, 0] - 3 * pts[:, 1] + 1, atol=1e-12)


def test_rasterize_orientation():
    f = AnalyticField([lambda x, y: x + 10 * y], 2.0)
    r = f.rasterize(4, 1.0)[0]
    # rows follow y, columns follow x
    assert r[0, 1] - r[0, 0] == pytest.approx(0.5)
    assert r[1, 0] - r[0, 0] == pytest.approx(5.0)
    assert math.isclose(pixel_centers(4, 1.0)[0], -0.75)
