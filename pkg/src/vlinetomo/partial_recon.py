"""Rank-2 reconstruction from half-diameter V-line data (vertices with ``d <= R``).

Data are reparametrized by ``t = R - d`` and expanded in angular Fourier
series ``F_n(t)`` (longitudinal), ``G_n(t)`` (transverse), ``H_n(t)`` (mixed).
Writing ``P = f11 - f22 - 2i f12``, ``Q = f11 - f22 + 2i f12`` and
``S = f11 + f22`` with angular modes ``p_n, q_n, s_n``, the broken-ray
integrals decouple into

    F_{n+2} - G_{n+2} - 2i H_{n+2} = V[p_n; +2 theta](t)
    F_{n-2} - G_{n-2} + 2i H_{n-2} = V[q_n; -2 theta](t)
    F_n + G_n                       = V[s_n; 0](t)

with ``V[g; c](t) = int_t^R g(r) dr + {r g x h_n^c}(t)``, where ``h_n^c`` is
the scattered-leg kernel carrying the constant phase ``e^{ic}``.  Each
equation is solved by Mellin division
``P g(s) = P D(s-1) / (1/(s-1) + P h_n^c(s-1))`` and contour inversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exceptions import ConditioningError, CoverageError, DomainError, NumericError
from .forward import VLineSinogram, _run_rows
from .mellin import MellinContext, kernel_mellin, mellin_samples
from .tensors import GridField, pixel_centers

# combination basis: name -> (mode shift of the data, kernel phase in units of theta)
BASIS = {"p": (+2, +2), "q": (-2, -2), "s": (0, 0)}


@dataclass
class FourierDataSeries:
    modes: np.ndarray  # n = -N..N
    t_grid: np.ndarray  # ascending, t = R - d
    F: np.ndarray  # (2N+1, n_t)
    G: np.ndarray
    H: np.ndarray

    @property
    def N(self):
        return int(self.modes[-1])

    def get(self, name, n):
        if abs(n) > self.N:
            raise CoverageError(f"mode {n} not available (|n| <= {self.N})")
        return getattr(self, name)[n + self.N]

    def resynthesize(self, phi):
        """Re-sum the three series at angles ``phi``: returns ``(3, len(phi), n_t)`` real data."""
        phi = np.asarray(phi, dtype=float)
        basis = np.exp(1j * np.outer(phi, self.modes))
        return np.stack([(basis @ X).real for X in (self.F, self.G, self.H)])


@dataclass
class FieldFourierSeries:
    modes: np.ndarray
    r_grid: np.ndarray
    a: np.ndarray  # (2N+1, n_r) modes of f11
    b: np.ndarray  # f12
    c: np.ndarray  # f22
    report: dict = field(default_factory=dict)

    def component(self, k):
        return (self.a, self.b, self.c)[k]

    def synthesize(self, x, y):
        """Evaluate ``(f11, f12, f22)`` at Cartesian points by angular resynthesis."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y).ravel()
        beta = np.arctan2(y, x).ravel()
        rg = np.concatenate([[0.0], self.r_grid])
        out = np.zeros((3, r.size))
        phase = np.exp(1j * np.outer(beta, self.modes))  # (pts, modes)
        for k, coef in enumerate((self.a, self.b, self.c)):
            # value at r=0 extrapolated from the first sample for n=0, zero otherwise
            c0 = np.concatenate([np.where(self.modes == 0, coef[:, 0], 0.0)[:, None], coef], axis=1)
            re = np.stack([np.interp(r, rg, c0[j].real, right=0.0) for j in range(coef.shape[0])], axis=1)
            im = np.stack([np.interp(r, rg, c0[j].imag, right=0.0) for j in range(coef.shape[0])], axis=1)
            out[k] = np.sum((re + 1j * im) * phase, axis=1).real
        return out.reshape((3,) + x.shape)


def data_fourier(vsino: VLineSinogram, N: int) -> FourierDataSeries:
    """Angular Fourier coefficients ``(1/2 pi) int X(phi, t) e^{-i n phi} dphi`` of L, T, M data."""
    if vsino.m != 2:
        raise DomainError(f"half-data reconstruction is implemented for rank 2, got m={vsino.m}")
    phi = vsino.phi_grid
    n_phi = phi.size
    if N < 0:
        raise DomainError("mode cap N must be non-negative")
    if n_phi < 4 * N:
        raise DomainError(f"aliasing guard: need n_phi >= 4N = {4 * N}, got {n_phi}")
    step = 2 * np.pi / n_phi
    if not np.allclose(np.diff(phi), step, rtol=0, atol=1e-9):
        raise DomainError("phi grid must be uniform over [0, 2pi)")
    d = vsino.d_grid
    R = vsino.scene.R
    t = R - d
    order = np.argsort(t)
    t = t[order]
    modes = np.arange(-N, N + 1)
    shift = np.exp(-1j * modes * phi[0])
    out = []
    # channels: L (0), M (1), T (2)
    for ch in (0, 2, 1):
        spec = np.fft.fft(vsino.data[ch][:, order], axis=0) / n_phi
        out.append(spec[modes % n_phi] * shift[:, None])
    F, G, H = out
    return FourierDataSeries(modes=modes, t_grid=t, F=F, G=G, H=H)


def combine_modes(series: FourierDataSeries, n: int):
    """Data combinations isolating the f11, f12, f22 modes of order ``n``.

    Returns ``(D_a, D_b, D_c)``::

        D_a = (2F_n + F_{n+2} + F_{n-2}) + (2G_n - G_{n+2} - G_{n-2}) + 2i (H_{n-2} - H_{n+2})
        D_b = (F_{n-2} - F_{n+2}) - (G_{n-2} - G_{n+2}) + 2i (H_{n-2} + H_{n+2})
        D_c = (2F_n - F_{n-2} - F_{n+2}) + (2G_n + G_{n-2} + G_{n+2}) + 2i (H_{n+2} - H_{n-2})
    """
    F = lambda k: series.get("F", k)  # noqa: E731
    G = lambda k: series.get("G", k)  # noqa: E731
    H = lambda k: series.get("H", k)  # noqa: E731
    D_a = (2 * F(n) + F(n + 2) + F(n - 2)) + (2 * G(n) - G(n + 2) - G(n - 2)) + 2j * (H(n - 2) - H(n + 2))
    D_b = (F(n - 2) - F(n + 2)) - (G(n - 2) - G(n + 2)) + 2j * (H(n - 2) + H(n + 2))
    D_c = (2 * F(n) - F(n - 2) - F(n + 2)) + (2 * G(n) + G(n - 2) + G(n + 2)) + 2j * (H(n + 2) - H(n - 2))
    return D_a, D_b, D_c


def split_modes(series: FourierDataSeries, n: int):
    """Data for the decoupled unknowns ``(p_n, q_n, s_n)``.

    ``D_a = D_p + D_q + 2 D_s``, ``D_b = D_q - D_p`` and ``D_c = 2 D_s - D_p - D_q``.
    """
    g = series.get
    D_p = g("F", n + 2) - g("G", n + 2) - 2j * g("H", n + 2)
    D_q = g("F", n - 2) - g("G", n - 2) + 2j * g("H", n - 2)
    D_s = g("F", n) + g("G", n)
    return D_p, D_q, D_s


def assemble_components(p, q, s):
    """``(a, b, c)`` from ``p = a - c - 2ib``, ``q = a - c + 2ib``, ``s = a + c``."""
    a = (p + q) / 4 + s / 2
    c = s / 2 - (p + q) / 4
    b = (q - p) / 4j
    return a, b, c


# ---------------------------------------------------------------------------
# forward oracle for the decoupled equations


@lru_cache(maxsize=8)
def _gauss(nodes):
    return np.polynomial.legendre.leggauss(nodes)


def leg_integral(g, t, n, theta, phase=0.0, r_cut=None, nodes=400):
    """``e^{i phase} int_I g(r) e^{i n beta} ds`` along the scattered leg of ``B(0, t)``.

    Direct arc-length quadrature (Gauss-Legendre) on the leg: an independent
    route to ``{r g x h_n}(t)``.  ``g`` is a callable of ``r``; ``r_cut`` is the
    radius beyond which ``g`` vanishes.
    """
    t = float(t)
    if r_cut is None:
        raise DomainError("r_cut (support radius of g) is required")
    st, ct = math.sin(theta), math.cos(theta)
    # |P(s)|^2 = t^2 - 2 t s cos(theta) + s^2 <= r_cut^2
    disc = r_cut**2 - (t * st) ** 2
    if disc <= 0:
        return 0j
    s0 = max(0.0, t * ct - math.sqrt(disc))
    s1 = t * ct + math.sqrt(disc)
    if s1 <= s0:
        return 0j
    x, w = _gauss(nodes)
    # split at the closest point to the origin, where r(s) has its minimum
    pieces = [(s0, s1)]
    sm = t * ct
    if s0 < sm < s1:
        pieces = [(s0, sm), (sm, s1)]
    total = 0j
    for a, b in pieces:
        s = 0.5 * (b - a) * x + 0.5 * (a + b)
        px = t - s * ct
        py = -s * st
        r = np.hypot(px, py)
        beta = np.arctan2(py, px)
        total += 0.5 * (b - a) * np.sum(w * g(r) * np.exp(1j * n * beta))
    return np.exp(1j * phase) * total


def volterra_forward(g, t_grid, n, theta, phase=0.0, R=1.0, r_cut=None, nodes=400):
    """``V[g; phase](t) = int_t^R g dr + e^{i phase} int_I g e^{i n beta} ds`` on ``t_grid``."""
    r_cut = R if r_cut is None else r_cut
    x, w = _gauss(nodes)
    out = np.zeros(len(t_grid), dtype=complex)
    for i, t in enumerate(t_grid):
        hi = min(R, r_cut)
        first = 0j
        if hi > t:
            r = 0.5 * (hi - t) * x + 0.5 * (hi + t)
            first = 0.5 * (hi - t) * np.sum(w * g(r))
        out[i] = first + leg_integral(g, t, n, theta, phase, r_cut=r_cut, nodes=nodes)
    return out


# ---------------------------------------------------------------------------
# Mellin-domain solver


def default_r_grid(R, n_r=512):
    return R * np.arange(1, n_r + 1) / n_r


def _solve_many(D, t_grid, modes, theta, ctx, phases, scale, r_grid, threads=1):
    """Solve ``scale * V[g_j; phase_j] = D_j`` for several right-hand sides.

    ``D`` has shape ``(n_t, J)``; ``modes``/``phases`` have length ``J``.
    Returns ``(g, min |denominator|, s at the minimum)`` with ``g`` of shape
    ``(n_r, J)``.  Shared matrices are built once; columns are then solved
    one at a time, so the arithmetic does not depend on ``threads``.
    """
    s = ctx.s
    W = mellin_samples(t_grid, np.eye(t_grid.size), s - 1)  # (n_s, n_t)
    uniq, inv = np.unique(modes, return_inverse=True)
    Ph = kernel_mellin(theta, uniq, s - 1, T=ctx.T_max)  # (n_s, n_uniq)
    r_grid = np.asarray(r_grid, dtype=float)
    if np.any(r_grid <= 0):
        raise DomainError("radial output grid must be positive")
    back = np.exp(-np.multiply.outer(np.log(r_grid), s)) * (ctx.weights() / (2 * np.pi))[None, :]
    inv_s1 = 1.0 / (s - 1)

    def column(j):
        den = inv_s1 + np.exp(1j * phases[j]) * Ph[:, inv[j]]
        mags = np.abs(den)
        k = int(np.argmin(mags))
        Pg = (W @ D[:, j]) / (scale * den)
        return back @ Pg, mags[k], s[k]

    cols = _run_rows(column, D.shape[1], threads)
    g = np.stack([c[0] for c in cols], axis=1)
    return g, np.array([c[1] for c in cols]), np.array([c[2] for c in cols])


UNITS = {"a": 1j, "b": 1j, "c": 1.0}


def solve_mode(D, t_grid, n, theta, ctx: MellinContext | None = None, which=None, phase=None, scale=None, r_grid=None, R=None):
    """Recover ``q`` from ``D(t) = scale * [int_t^R q dr + {r q x h_n}(t)]``.

    ``{r q x h_n}(t) = int q(r) h_n(t/r) dr`` with ``h_n`` carrying the
    constant phase ``e^{i phase}`` (default ``theta``).  ``which`` in
    ``{"a", "b", "c"}`` selects ``scale = 4 i`` (a, b) or ``4`` (c); otherwise
    ``scale`` defaults to 4.  ``D`` is sampled on ``t_grid`` and taken as zero
    beyond it.  Returns ``q`` on ``r_grid`` (default: 512 uniform radii on
    ``(0, R]``).

    Raises
    ------
    ConditioningError
        If ``|1/(s-1) + P h_n(s-1)|`` drops below ``ctx.min_denominator`` on the contour.
    """
    if which is not None:
        if which not in UNITS:
            raise DomainError(f"which must be one of a, b, c; got {which!r}")
        if scale is not None:
            raise DomainError("pass either which or scale, not both")
        scale = 4 * UNITS[which]
    scale = 4.0 if scale is None else scale
    ctx = MellinContext() if ctx is None else ctx
    t_grid = np.asarray(t_grid, dtype=float)
    D = np.asarray(D, dtype=complex)
    if D.shape != t_grid.shape:
        raise DomainError("D and t_grid must have the same length")
    if not np.all(np.isfinite(D)):
        raise NumericError("non-finite data passed to solve_mode")
    R = float(t_grid[-1]) if R is None else R
    r_grid = default_r_grid(R) if r_grid is None else np.asarray(r_grid, dtype=float)
    phase = theta if phase is None else phase
    if not np.any(D):
        return np.zeros(r_grid.shape, dtype=complex)
    g, mag, s_bad = _solve_many(D[:, None], t_grid, np.array([n]), theta, ctx, [phase], scale, r_grid)
    if mag[0] < ctx.min_denominator:
        raise ConditioningError(
            f"denominator 1/(s-1) + P h_n(s-1) nearly vanishes (|.|={mag[0]:.3g}) at s={s_bad[0]:.6g}",
            s=complex(s_bad[0]),
        )
    return g[:, 0]


def reconstruct_partial(
    vsino: VLineSinogram, N: int = 32, ctx: MellinContext | None = None, r_grid=None, n_raster=256, threads: int = 1
):
    """Recover the modes of ``f11, f12, f22`` and a Cartesian raster of the field.

    Uses modes up to ``N`` of the data; components are recovered for
    ``|n| <= N - 2``.  Returns ``(FieldFourierSeries, GridField)``.
    """
    ctx = MellinContext() if ctx is None else ctx
    scene = vsino.scene
    R = scene.R
    theta = scene.theta
    d = vsino.d_grid
    if d.min() > 1e-12 * R or d.max() < R * (1 - 1e-12):
        raise CoverageError("half-data reconstruction needs d to cover [0, R]")
    keep = d <= R * (1 + 1e-12)
    vs = VLineSinogram(scene, vsino.m, vsino.phi_grid, d[keep], vsino.data[:, :, keep])
    series = data_fourier(vs, N)
    M = N - 2
    if M < 0:
        raise DomainError("N must be at least 2")
    modes = np.arange(-M, M + 1)
    r_grid = default_r_grid(R) if r_grid is None else np.asarray(r_grid, dtype=float)

    rhs, mode_list, phase_list = [], [], []
    for name in ("p", "q", "s"):
        _, ph = BASIS[name]
        for n in modes:
            D_p, D_q, D_s = split_modes(series, n)
            rhs.append({"p": D_p, "q": D_q, "s": D_s}[name])
            mode_list.append(n)
            phase_list.append(ph * theta)
    D = np.stack(rhs, axis=1)
    g, mags, s_bad = _solve_many(D, series.t_grid, np.array(mode_list), theta, ctx, phase_list, 1.0, r_grid, threads)
    bad = mags < ctx.min_denominator
    report = {"ill_conditioned": []}
    for j in np.flatnonzero(bad):
        g[:, j] = 0.0
        report["ill_conditioned"].append((int(mode_list[j]), complex(s_bad[j])))
    # data beyond t = R are unavailable and taken as zero; exact when supp f lies in D_{R sin theta}
    edge = np.abs(D[-1]).max() / max(np.abs(D).max(), 1e-300)
    report["edge_data_ratio"] = float(edge)
    J = modes.size
    p, q, s = g[:, :J].T, g[:, J : 2 * J].T, g[:, 2 * J :].T
    a, b, c = assemble_components(p, q, s)
    result = FieldFourierSeries(modes=modes, r_grid=r_grid, a=a, b=b, c=c, report=report)
    xs = pixel_centers(n_raster, R)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    comps = result.synthesize(X, Y)
    comps[:, X**2 + Y**2 > R**2] = 0.0
    return result, GridField(comps, extent=R, R_support=R)
