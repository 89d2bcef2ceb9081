"""Rank-m reconstruction from full-diameter V-line data (vertices with ``0 <= d <= 2R``).

Three V-line samples combine into a straight-line transform on the line
carrying the scattered leg::

    (-1)^k X_k(psi_phi, p_d) = D_k(phi, d) + (-1)^m D_k(phi + pi, 2R - d) - D_k(phi, 2R)

where ``D_k`` is V-line channel ``k`` (``k`` perpendicular factors), ``X_k``
the line channel with ``k`` normal factors, ``psi_phi = phi + theta + pi/2``
and ``p_d = -(R - d) sin(theta)``.  Per line, the channels relate to the
component Radon transforms through an involutive matrix ``A(psi)``; each
component is then inverted by filtered backprojection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import CoverageError, DomainError, NumericError
from .forward import LineSinogram, VLineSinogram, _run_rows
from .geometry import line_frame
from .tensors import GridField, _check_rank, contraction_weights, pixel_centers

FILTERS = ("ramp", "hann")


@dataclass(frozen=True)
class CombinationRule:
    """Signs of ``[D(phi, d), D(phi + pi, 2R - d), D(phi, 2R)]`` and the output sign per channel."""

    m: int

    @property
    def parity(self):
        return "even" if self.m % 2 == 0 else "odd"

    @property
    def term_signs(self):
        return (1.0, 1.0 if self.m % 2 == 0 else -1.0, -1.0)

    def channel_sign(self, k):
        return -1.0 if k % 2 else 1.0


def _grid_checks(vsino: VLineSinogram):
    R = vsino.scene.R
    phi = vsino.phi_grid
    d = vsino.d_grid
    n_phi = phi.size
    if n_phi < 2 or n_phi % 2:
        raise CoverageError(f"need an even number of phi samples to pair phi with phi + pi, got {n_phi}")
    step = 2 * np.pi / n_phi
    if not np.allclose(np.diff(phi), step, rtol=0, atol=1e-9):
        raise CoverageError("phi grid must be uniform over a full turn")
    tol = 1e-9 * R
    if d.size < 2 or abs(d[0]) > tol or abs(d[-1] - 2 * R) > tol:
        raise CoverageError("d grid must run from 0 to 2R")
    if not np.allclose(d + d[::-1], 2 * R, rtol=0, atol=tol):
        raise CoverageError("d grid must be symmetric about R so that 2R - d is sampled")
    if np.any(np.diff(d) <= 0):
        raise CoverageError("d grid must be strictly increasing")


def combine_to_lines(vsino: VLineSinogram) -> LineSinogram:
    """Line transforms ``I, K^(k), J`` on the lines carrying the scattered legs.

    The output lattice is ``psi_j = phi_j + theta + pi/2`` by
    ``p_i = (d_i - R) sin(theta)``, which is regular whenever the input is.
    """
    _grid_checks(vsino)
    scene = vsino.scene
    m = vsino.m
    rule = CombinationRule(m)
    a, b, c = rule.term_signs
    half = vsino.phi_grid.size // 2
    data = vsino.data
    partner = np.roll(data, -half, axis=1)[:, :, ::-1]  # D(phi + pi, 2R - d)
    edge = data[:, :, -1:]  # D(phi, 2R)
    comb = a * data + b * partner + c * edge
    signs = np.array([rule.channel_sign(k) for k in range(m + 1)])
    out = signs[:, None, None] * comb
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite values in combined line data")
    psi = vsino.phi_grid + scene.theta + math.pi / 2
    p = (vsino.d_grid - scene.R) * math.sin(scene.theta)
    return LineSinogram(
        psi_grid=psi,
        p_grid=p,
        data=np.ascontiguousarray(out),
        m=m,
        kind="transforms",
        meta={"R": scene.R, "theta": scene.theta},
    )


def build_matrix_A(m: int, psi: float):
    """``A[r, j]``: weight of component ``j`` in line channel ``r`` (``r`` normal factors).

    Multiplicities ``C(m, j)`` are folded into the entries, so ``Y = A X``
    with ``X`` the component Radon values.  ``A @ A = I``.
    """
    m = _check_rank(m)
    w, wp = line_frame(float(psi))
    return np.stack([contraction_weights(wp, w, r, m) for r in range(m + 1)])


def matrix_A_stack(m, psi_grid):
    """``A(psi)`` for every angle in ``psi_grid``: shape ``(n_psi, m+1, m+1)``."""
    w, wp = line_frame(np.asarray(psi_grid, dtype=float))
    return np.stack([contraction_weights(wp, w, r, m) for r in range(m + 1)], axis=-2)


def solve_components(lsino: LineSinogram) -> LineSinogram:
    """Component Radon sinograms ``X = A(psi) Y`` from line-transform channels ``Y``."""
    if lsino.kind != "transforms":
        raise DomainError("solve_components expects line-transform channels")
    if not np.all(np.isfinite(lsino.data)):
        raise NumericError("non-finite line data")
    A = matrix_A_stack(lsino.m, lsino.psi_grid)
    X = np.einsum("jrc,cjp->rjp", A, lsino.data)
    return LineSinogram(
        psi_grid=lsino.psi_grid,
        p_grid=lsino.p_grid,
        data=np.ascontiguousarray(X),
        m=lsino.m,
        kind="radon",
        meta=dict(lsino.meta),
    )


# ---------------------------------------------------------------------------
# filtered backprojection


def _uniform_step(grid, name):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DomainError(f"{name} grid needs at least two samples")
    step = (grid[-1] - grid[0]) / (grid.size - 1)
    if not step > 0 or not np.allclose(np.diff(grid), step, rtol=1e-9, atol=1e-12 * abs(step)):
        raise DomainError(f"{name} grid must be uniform and increasing")
    return step


def ramp_filter(sino, dp, filter="ramp"):
    """Filter each row of ``sino`` (views x p) with the band-limited ramp.

    The spatial Ram-Lak kernel is applied by zero-padded FFT convolution, so
    there is no wrap-around and no DC bias.  ``filter="hann"`` multiplies the
    response by a raised cosine vanishing at Nyquist.
    """
    if filter not in FILTERS:
        raise DomainError(f"unknown filter {filter!r}; expected one of {FILTERS}")
    sino = np.asarray(sino, dtype=float)
    n = sino.shape[-1]
    size = 1 << int(math.ceil(math.log2(2 * n)))
    k = np.arange(size)
    k = np.where(k <= size // 2, k, k - size)
    h = np.zeros(size)
    h[0] = 1.0 / (4 * dp * dp)
    odd = k % 2 != 0
    h[odd] = -1.0 / (math.pi**2 * k[odd] ** 2 * dp * dp)
    H = np.fft.fft(h).real * dp
    if filter == "hann":
        H *= 0.5 * (1 + np.cos(2 * np.pi * np.fft.fftfreq(size)))
    out = np.fft.ifft(np.fft.fft(sino, size, axis=-1) * H, axis=-1).real
    return out[..., :n]


def fbp_invert(psi_grid, p_grid, sino, n: int = 256, extent: float = 1.0, filter: str = "ramp"):
    """Filtered backprojection of one Radon sinogram onto an ``n x n`` raster.

    ``psi_grid`` must cover a half or a full turn uniformly (any offset);
    ``p_grid`` must be uniform.  The raster holds pixel centres over
    ``[-extent, extent]^2`` with index order ``[row=y, col=x]``.

    Returns
    -------
    numpy.ndarray
        Array of shape ``(n, n)``.
    """
    psi_grid = np.asarray(psi_grid, dtype=float)
    p_grid = np.asarray(p_grid, dtype=float)
    sino = np.asarray(sino, dtype=float)
    if sino.shape != (psi_grid.size, p_grid.size):
        raise DomainError(f"sinogram shape {sino.shape} does not match grids ({psi_grid.size}, {p_grid.size})")
    if not np.all(np.isfinite(sino)):
        raise NumericError("non-finite sinogram values")
    dpsi = _uniform_step(psi_grid, "psi")
    dp = _uniform_step(p_grid, "p")
    span = dpsi * psi_grid.size
    if not (math.isclose(span, math.pi, rel_tol=1e-9) or math.isclose(span, 2 * math.pi, rel_tol=1e-9)):
        raise CoverageError(f"views must cover pi or 2 pi uniformly, got span {span:.6g}")
    filtered = ramp_filter(sino, dp, filter)
    xs = pixel_centers(n, extent)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    X = X.ravel()
    Y = Y.ravel()
    acc = np.zeros(X.size)
    # sequential accumulation keeps the result independent of scheduling
    for j, psi in enumerate(psi_grid):
        s = X * math.cos(psi) + Y * math.sin(psi)
        acc += np.interp(s, p_grid, filtered[j], left=0.0, right=0.0)
    # both half- and full-turn coverage reduce to (pi / n_views) * sum
    return (acc * (math.pi / psi_grid.size)).reshape(n, n)


def reconstruct_full(vsino: VLineSinogram, n: int = 256, filter: str = "ramp", threads: int = 1) -> GridField:
    """Recover all ``m + 1`` components on an ``n x n`` raster over ``[-R, R]^2``.

    The field must be supported in ``D_{R sin(theta)}``; the output is masked
    to that disk.
    """
    scene = vsino.scene
    radon_sino = solve_components(combine_to_lines(vsino))
    R = scene.R

    def component(k):
        return fbp_invert(radon_sino.psi_grid, radon_sino.p_grid, radon_sino.data[k], n=n, extent=R, filter=filter)

    comps = np.stack(_run_rows(component, vsino.m + 1, threads))
    rho = R * math.sin(scene.theta)
    xs = pixel_centers(n, R)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    comps[:, X**2 + Y**2 > rho**2] = 0.0
    return GridField(comps, extent=R, R_support=rho)
