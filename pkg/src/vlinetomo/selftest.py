"""Fast invariant checks behind ``vlinetomo selftest``."""

from __future__ import annotations

import math

import numpy as np

from .forward import line_batch, sweep, uniform_phi_grid, vline_batch
from .full_recon import build_matrix_A
from .geometry import Scene, scattered_line_coords
from .io import decode_sinogram, encode_sinogram
from .mellin import KernelH, mellin
from .phantoms import default_full_spec, make_phantom


def check_involution():
    rng = np.random.default_rng(7)
    worst = 0.0
    for m in range(1, 6):
        for psi in rng.uniform(0, 2 * np.pi, 100):
            A = build_matrix_A(m, psi)
            worst = max(worst, np.abs(A @ A - np.eye(m + 1)).max())
    return worst < 1e-12, f"max |A^2 - I| = {worst:.2e}"


def check_boundary_identities():
    scene = Scene(1.0, math.pi / 3)
    phi = uniform_phi_grid(36)
    worst = 0.0
    for m in (1, 2, 3):
        field = make_phantom(default_full_spec(m, scene.R, scene.theta))
        V = vline_batch(field, scene, phi, 2 * scene.R)
        X = line_batch(field, phi + math.pi / 2, 0.0)
        signs = np.array([(-1.0) ** k for k in range(m + 1)])
        signs[m] = (-1.0) ** m
        worst = max(worst, np.abs(V - signs * X).max() / np.abs(V).max())
    return worst <= 1e-5, f"max relative mismatch {worst:.2e}"


def check_line_containment():
    scene = Scene(1.0, math.pi / 5)
    rng = np.random.default_rng(3)
    phi = rng.uniform(0, 2 * np.pi, 200)
    d = rng.uniform(0, 2, 200)
    psi, p = scattered_line_coords(scene, phi, d)
    vertex = (scene.R - d)[:, None] * np.stack([np.cos(phi), np.sin(phi)], axis=1)
    v = -np.stack([np.cos(phi + scene.theta), np.sin(phi + scene.theta)], axis=1)
    normal = np.stack([np.cos(psi), np.sin(psi)], axis=1)
    worst = 0.0
    for s in (0.0, 0.3):
        pts = vertex + s * v
        worst = max(worst, np.abs(np.sum(pts * normal, axis=1) - p).max())
    return worst < 1e-10, f"max distance to line {worst:.2e}"


def check_mellin_properties():
    tests = [lambda r: np.exp(-r), lambda r: np.exp(-(r**2)), lambda r: r * np.exp(-2 * r)]
    worst = 0.0
    for f in tests:
        for s in (1.5, 2.0 + 1.0j, 3.0 - 2.0j):
            a = mellin(lambda r: r**2 * f(r), s)
            b = mellin(f, s + 2)
            worst = max(worst, abs(a - b))
    return worst < 1e-8, f"max |P[r^k f](s) - P f(s+k)| = {worst:.2e}"


def check_kernel_branches():
    worst = 0.0
    for theta in (math.pi / 6, math.pi / 3):
        t = np.linspace(0.05, 1 / math.sin(theta) - 0.05, 101)
        for n in (0, 1, 3):
            K = KernelH(n, theta)
            worst = max(worst, np.abs(K(t) - K.geometric(t)).max())
    return worst < 1e-8, f"branch formulas vs arc-length kernel {worst:.2e}"


def check_file_round_trip():
    scene = Scene(1.0, math.pi / 3)
    field = make_phantom(default_full_spec(1, scene.R, scene.theta))
    sino = sweep(field, scene, uniform_phi_grid(8), np.linspace(0, 2, 9))
    blob = encode_sinogram(sino)
    back = decode_sinogram(blob)
    ok = np.array_equal(back.data, sino.data) and encode_sinogram(back) == blob
    return ok, "bitwise round trip"


CHECKS = [
    ("involution A^2 = I", check_involution),
    ("d = 2R boundary identities", check_boundary_identities),
    ("scattered leg on its line", check_line_containment),
    ("Mellin scaling property", check_mellin_properties),
    ("kernel h_n branches", check_kernel_branches),
    ("sinogram file round trip", check_file_round_trip),
]


def run(stream=print):
    """Run every check, printing one PASS/FAIL line each; return True if all pass."""
    all_ok = True
    for name, fn in CHECKS:
        ok, detail = fn()
        all_ok &= bool(ok)
        stream(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return all_ok
