import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vlinetomo import (
    CoverageError,
    DomainError,
    Scene,
    VLineSinogram,
    build_matrix_A,
    combine_to_lines,
    fbp_invert,
    make_phantom,
    reconstruct_full,
    relative_errors,
    solve_components,
    sweep,
    uniform_d_grid,
    uniform_phi_grid,
)
from vlinetomo.full_recon import CombinationRule, ramp_filter
from vlinetomo.phantoms import default_full_spec
from vlinetomo.tensors import pixel_centers


def test_matrix_examples_at_zero_angle():
    np.testing.assert_array_equal(build_matrix_A(1, 0.0), [[0, 1], [1, 0]])
    np.testing.assert_allclose(build_matrix_A(2, 0.0), [[0, 0, 1], [0, 1, 0], [1, 0, 0]], atol=1e-16)


@settings(max_examples=50, deadline=None)
@given(m=st.integers(1, 5), psi=st.floats(0, 2 * math.pi))
def test_matrix_is_involution(m, psi):
    A = build_matrix_A(m, psi)
    assert np.abs(A @ A - np.eye(m + 1)).max() < 1e-12


def test_combination_rule_signs():
    assert CombinationRule(2).term_signs == (1.0, 1.0, -1.0)
    assert CombinationRule(3).term_signs == (1.0, -1.0, -1.0)
    assert CombinationRule(3).parity == "odd"
    assert [CombinationRule(3).channel_sign(k) for k in range(4)] == [1, -1, 1, -1]


def _empty(m=2, n_phi=8, n_d=9, d=None, phi=None):
    scene = Scene(1.0, math.pi / 3)
    phi = uniform_phi_grid(n_phi) if phi is None else phi
    d = uniform_d_grid(n_d, 2.0) if d is None else d
    return VLineSinogram(scene, m, phi, d, np.zeros((m + 1, phi.size, d.size)))


def test_zero_data_gives_zero_everything():
    lines = combine_to_lines(_empty())
    assert not lines.data.any()
    assert not solve_components(lines).data.any()
    assert not reconstruct_full(_empty(), n=16).data.any()


def test_line_lattice():
    lines = combine_to_lines(_empty(n_d=17))
    theta = math.pi / 3
    assert np.abs(lines.p_grid).max() == pytest.approx(math.sin(theta))
    np.testing.assert_allclose(np.diff(lines.p_grid), 2 * math.sin(theta) / 16)
    np.testing.assert_allclose(lines.psi_grid, uniform_phi_grid(8) + theta + math.pi / 2)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_phi=7),
        dict(d=np.array([0.0, 0.5, 2.0])),
        dict(d=np.linspace(0, 1.9, 9)),
        dict(phi=np.sort(np.random.default_rng(0).uniform(0, 2 * np.pi, 8))),
    ],
)
def test_coverage_errors(kwargs):
    with pytest.raises(CoverageError):
        combine_to_lines(_empty(**kwargs))


def test_solve_components_kind_check():
    lines = combine_to_lines(_empty())
    radon = solve_components(lines)
    assert radon.kind == "radon"
    with pytest.raises(DomainError):
        solve_components(radon)


def _gaussians(centers, widths, amps):
    def image(X, Y):
        return sum(a * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / w**2) for (cx, cy), w, a in zip(centers, widths, amps))

    def sino(psi, p):
        out = 0.0
        for (cx, cy), w, a in zip(centers, widths, amps):
            shift = cx * np.cos(psi)[:, None] + cy * np.sin(psi)[:, None]
            out = out + a * math.sqrt(math.pi) * w * np.exp(-((p[None, :] - shift) ** 2) / w**2)
        return out

    return image, sino


def _fbp_error(image, sino, n_views, n=128, n_p=512, filter="ramp"):
    psi = math.pi * np.arange(n_views) / n_views
    p = np.linspace(-1, 1, n_p)
    est = fbp_invert(psi, p, sino(psi, p), n=n, extent=1.0, filter=filter)
    xs = pixel_centers(n, 1.0)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    inside = X**2 + Y**2 <= 1.0  # filtered tails are truncated beyond the scanned disk
    ref = image(X, Y)
    return np.linalg.norm((est - ref)[inside]) / np.linalg.norm(ref[inside])


def test_fbp_smooth_disk():
    image, sino = _gaussians([(0.0, 0.0)], [0.3], [1.0])
    assert _fbp_error(image, sino, 360, n=256) < 0.02


def test_fbp_error_decreases_with_views():
    image, sino = _gaussians([(0.2, -0.1), (-0.3, 0.25), (0.1, 0.4)], [0.12, 0.2, 0.08], [1.0, -0.5, 0.8])
    errs = [_fbp_error(image, sino, v) for v in (90, 180, 360)]
    assert errs[0] > errs[1] > errs[2]


def test_fbp_full_turn_matches_half_turn():
    image, sino = _gaussians([(0.1, 0.2)], [0.2], [1.0])
    p = np.linspace(-1, 1, 257)
    half = math.pi * np.arange(90) / 90
    full = 2 * math.pi * np.arange(180) / 180
    a = fbp_invert(half, p, sino(half, p), n=32)
    b = fbp_invert(full, p, sino(full, p), n=32)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_hann_filter_smooths():
    image, sino = _gaussians([(0.0, 0.0)], [0.3], [1.0])
    assert _fbp_error(image, sino, 180, filter="hann") < 0.05
    with pytest.raises(DomainError):
        ramp_filter(np.zeros((2, 8)), 0.1, "shepp")


def test_fbp_rejects_bad_grids():
    p = np.linspace(-1, 1, 33)
    with pytest.raises(CoverageError):
        fbp_invert(np.linspace(0, 1, 10), p, np.zeros((10, 33)), n=8)
    psi = math.pi * np.arange(10) / 10
    with pytest.raises(DomainError):
        fbp_invert(psi, np.sort(np.random.default_rng(1).uniform(-1, 1, 33)), np.zeros((10, 33)), n=8)
    with pytest.raises(DomainError):
        fbp_invert(psi, p, np.zeros((9, 33)), n=8)


def test_fbp_linearity():
    rng = np.random.default_rng(5)
    psi = math.pi * np.arange(20) / 20
    p = np.linspace(-1, 1, 41)
    a, b = rng.normal(size=(2, 20, 41))
    lhs = fbp_invert(psi, p, 2 * a - 3 * b, n=16)
    rhs = 2 * fbp_invert(psi, p, a, n=16) - 3 * fbp_invert(psi, p, b, n=16)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_combination_linearity():
    rng = np.random.default_rng(2)
    x, y = (_empty(m=3), _empty(m=3))
    x.data[:] = rng.normal(size=x.data.shape)
    y.data[:] = rng.normal(size=y.data.shape)
    s = VLineSinogram(x.scene, 3, x.phi_grid, x.d_grid, 1.5 * x.data + y.data)
    lhs = solve_components(combine_to_lines(s)).data
    rhs = 1.5 * solve_components(combine_to_lines(x)).data + solve_components(combine_to_lines(y)).data
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


@pytest.mark.parametrize("m", [1, 2])
def test_reconstruction_small_grid(scene, m):
    field = make_phantom(default_full_spec(m, scene.R, scene.theta))
    sino = sweep(field, scene, uniform_phi_grid(180), uniform_d_grid(257, 2.0))
    est = reconstruct_full(sino, n=64)
    ref = field.rasterize(64, scene.R)
    l2, _ = relative_errors(est.data, ref)
    assert est.data.shape == (m + 1, 64, 64)
    assert np.all(l2 <= 0.05)
