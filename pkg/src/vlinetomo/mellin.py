"""Mellin transform numerics and the scattered-leg kernel ``h_n``.

``P f(s) = int_0^inf p^(s-1) f(p) dp``.  Three evaluation routes are provided:

* :func:`mellin` - adaptive quadrature of a callable;
* :func:`mellin_samples` - exact moments of the piecewise-linear interpolant
  of sampled data (product integration), stable for large ``Im s``;
* :func:`kernel_mellin` - Gauss-Legendre panels tailored to ``h_n``.

:func:`inverse_mellin` evaluates the Bromwich-type line integral
``(1/2 pi i) int_{sigma0 - iT}^{sigma0 + iT} r^(-s) F(s) ds`` by the trapezoid rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .exceptions import DomainError, NumericError
from .geometry import psi_of


@dataclass(frozen=True)
class MellinContext:
    """Contour and quadrature settings for Mellin inversion.

    ``sigma0`` is the abscissa of the inversion contour, ``T_max`` its
    half-length in ``Im s`` and ``dtau`` the trapezoid step.
    """

    sigma0: float = 2.0
    T_max: float = 200.0
    dtau: float = 0.05
    taper: float = 0.0
    min_denominator: float = 1e-8

    def __post_init__(self):
        if not self.sigma0 > 1:
            raise DomainError(f"contour abscissa must exceed 1, got sigma0={self.sigma0}")
        if not (self.T_max > 0 and self.dtau > 0):
            raise DomainError("T_max and dtau must be positive")
        if self.dtau > self.T_max:
            raise DomainError("dtau must not exceed T_max")
        if not 0 <= self.taper < 1:
            raise DomainError("taper fraction must lie in [0, 1)")

    @property
    def tau(self):
        n = int(round(self.T_max / self.dtau))
        return self.dtau * np.arange(-n, n + 1)

    @property
    def s(self):
        return self.sigma0 + 1j * self.tau

    def weights(self):
        """Trapezoid weights in ``tau`` times an optional cosine taper near ``+-T_max``."""
        tau = self.tau
        w = np.full(tau.size, self.dtau)
        w[0] *= 0.5
        w[-1] *= 0.5
        if self.taper > 0:
            edge = (1 - self.taper) * self.T_max
            x = np.clip((np.abs(tau) - edge) / (self.T_max - edge), 0.0, 1.0)
            w *= 0.5 * (1 + np.cos(np.pi * x))
        return w


# ---------------------------------------------------------------------------
# general-purpose transforms


def _complex_quad(fn, a, b, points=None, epsabs=1e-13, epsrel=1e-12, limit=400):
    kw = dict(epsabs=epsabs, epsrel=epsrel, limit=limit)
    if points is not None and np.isfinite(a) and np.isfinite(b):
        kw["points"] = points
    re, err_re = integrate.quad(lambda x: np.real(fn(x)), a, b, **kw)
    im, err_im = integrate.quad(lambda x: np.imag(fn(x)), a, b, **kw)
    return re + 1j * im, math.hypot(err_re, err_im)


def mellin(fn, s, support=None, points=None):
    """Mellin transform of a callable ``fn`` on ``(0, inf)`` at complex ``s``.

    ``support=(a, b)`` limits integration for compactly supported functions.
    Raises :class:`NumericError` when the integral does not converge at ``s``.
    """
    s = complex(s)
    a, b = (0.0, np.inf) if support is None else support

    def integrand(p):
        return p ** (s - 1) * fn(p) if p > 0 else 0.0

    if a == 0.0 and s.real <= 0:
        # only compactly supported functions vanishing near 0 are safe here
        near = abs(fn(1e-12))
        if near > 0:
            raise NumericError(f"Mellin integral diverges at the origin for Re(s)={s.real}")
    pieces = [(a, min(b, 1.0)), (max(a, 1.0), b)] if a < 1.0 < b else [(a, b)]
    total = 0j
    err = 0.0
    for lo, hi in pieces:
        if hi <= lo:
            continue
        pts = None if points is None else [p for p in points if lo < p < hi]
        val, e = _complex_quad(integrand, lo, hi, points=pts or None)
        total += val
        err += e
    if not np.isfinite(total) or err > 1e-6 * max(1.0, abs(total)):
        raise NumericError(f"Mellin integral failed to converge at s={s} (error estimate {err:.3g})")
    return total


def mult_convolve(f, g, s, support=None, points=None):
    """Multiplicative convolution ``{f x g}(s) = int_0^inf f(r) g(s/r) dr/r``."""
    if not s > 0:
        raise DomainError(f"multiplicative convolution needs s > 0, got {s!r}")
    a, b = (0.0, np.inf) if support is None else support

    def integrand(r):
        return f(r) * g(s / r) / r if r > 0 else 0.0

    val, _ = _complex_quad(integrand, a, b, points=points)
    return val.real if val.imag == 0 else val


def mellin_samples(t, values, s):
    """Mellin transform of the piecewise-linear interpolant of samples.

    ``values`` may carry trailing axes: shape ``(len(t), ...)``.  The
    interpolant is taken as zero outside ``[t[0], t[-1]]``.  Exact moments
    ``int t^(s-1)`` and ``int t^s`` over each cell keep the result accurate
    however fast ``t^(i Im s)`` oscillates.  Returns shape ``(len(s), ...)``.
    """
    t = np.asarray(t, dtype=float)
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0) or t[0] < 0:
        raise DomainError("t must be a strictly increasing, non-negative 1-D grid")
    if t[0] == 0 and np.any(s.real <= 0):
        raise DomainError("Mellin transform of data touching t=0 needs Re(s) > 0")
    W = _hat_moments(t, s)  # (n_s, n_t)
    values = np.asarray(values)
    flat = values.reshape(t.size, -1)
    out = W @ flat
    return out.reshape((s.size,) + values.shape[1:])


def _pow(t, z):
    """``t ** z`` for real ``t >= 0`` and complex ``z`` with ``0 ** z = 0`` (Re z > 0)."""
    pos = t > 0
    out = np.zeros((z.size, t.size), dtype=complex)
    out[:, pos] = np.exp(np.multiply.outer(z, np.log(t[pos])))
    return out


def _hat_moments(t, s):
    a = t[:-1]
    b = t[1:]
    dt = b - a
    M0 = (_pow(b, s) - _pow(a, s)) / s[:, None]  # int t^(s-1)
    M1 = (_pow(b, s + 1) - _pow(a, s + 1)) / (s + 1)[:, None]  # int t^s
    rising = (M1 - a * M0) / dt  # weight of the right node of each cell
    falling = (b * M0 - M1) / dt  # weight of the left node
    W = np.zeros((s.size, t.size), dtype=complex)
    W[:, :-1] += falling
    W[:, 1:] += rising
    return W


def inverse_mellin(F, r, ctx: MellinContext):
    """Invert samples ``F`` taken at ``ctx.s`` (shape ``(n_s, ...)``) at radii ``r``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("inverse Mellin transform is evaluated at r > 0 only")
    s = ctx.s
    kern = np.exp(-np.multiply.outer(np.log(r), s)) * ctx.weights()[None, :]
    F = np.asarray(F)
    flat = F.reshape(s.size, -1)
    out = kern @ flat / (2 * np.pi)
    return out.reshape(r.shape + F.shape[1:])


# ---------------------------------------------------------------------------
# scattered-leg kernel


class KernelH:
    """Angular-mode kernel of the scattered leg, ``h_n(t)``.

    Evaluated with the branch expressions
    ``(-1)^n e^{i c} e^{i n psi(t)} A(t)`` on ``0 < t <= 1`` and that term
    minus ``e^{i c} e^{i n (2 theta - psi(t))} B(t)`` on ``1 < t < 1/sin(theta)``,
    zero beyond, with ``psi(t) = arcsin(t sin theta) + theta`` and the chain-rule
    arc-length factors ``A``, ``B``.  ``phase`` is the constant ``c``.

    At the endpoint ``t = 1/sin(theta)`` the kernel has an integrable
    square-root singularity; the value there is reported as 0.
    """

    def __init__(self, n: int, theta: float, phase: float | None = None):
        if not 0 < theta < math.pi / 2:
            raise DomainError(f"theta must lie in (0, pi/2), got {theta!r}")
        self.n = int(n)
        self.theta = float(theta)
        self.phase = self.theta if phase is None else float(phase)
        self.t_max = 1.0 / math.sin(self.theta)

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0) or np.any(~np.isfinite(t)):
            raise DomainError("kernel h_n is defined for finite t > 0")
        return t

    def __call__(self, t):
        t = self._check(t)
        n, th = self.n, self.theta
        st = math.sin(th)
        out = np.zeros(t.shape, dtype=complex)
        inner = t < self.t_max
        tt = t[inner]
        psi = psi_of(tt, th)
        root = np.sqrt(1.0 - (tt * st) ** 2)
        A = (1 + tt * np.cos(psi) + tt**2 * np.sin(psi) * st / root) / np.sqrt(1 + tt**2 + 2 * tt * np.cos(psi))
        val = (-1) ** n * np.exp(1j * n * psi) * A
        mid = tt > 1
        if np.any(mid):
            tm = tt[mid]
            rm = root[mid]
            # 2 theta - psi = theta - arcsin(t sin theta), formed without subtracting near t = 1
            gam = np.arcsin(st * (1 - tm) * (1 + tm) / (rm + tm * math.cos(th)))
            # 1 - t cos g and 1 + t^2 - 2 t cos g rewritten without cancellation near t = 1
            half = np.sin(gam / 2) ** 2
            num = (1 - tm) + 2 * tm * half + tm**2 * np.sin(gam) * st / rm
            dist = np.sqrt((1 - tm) ** 2 + 4 * tm * half)
            # removable 0/0 at t = 1 exactly; the limit is -1/sqrt(1 - sin^2 theta)
            B = np.where(dist > 0, num / np.where(dist > 0, dist, 1.0), -1.0 / rm)
            val[mid] -= np.exp(1j * n * gam) * B
        out[inner] = np.exp(1j * self.phase) * val
        return out

    def geometric(self, t):
        """Same kernel from the closed-form arc-length density ``1/sqrt(1 - t^2 sin^2 theta)``."""
        t = self._check(t)
        n, th = self.n, self.theta
        out = np.zeros(t.shape, dtype=complex)
        inner = t < self.t_max
        tt = t[inner]
        psi = psi_of(tt, th)
        w = 1.0 / np.sqrt(1.0 - (tt * math.sin(th)) ** 2)
        val = (-1) ** n * np.exp(1j * n * psi) * w
        mid = tt > 1
        val[mid] += np.exp(1j * n * (2 * th - psi[mid])) * w[mid]
        out[inner] = np.exp(1j * self.phase) * val
        return out

    def mellin(self, z, T_max=None):
        """``P h_n(z)`` for ``Re z > 0``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        T = float(np.max(np.abs(z.imag))) if T_max is None else float(T_max)
        return np.exp(1j * self.phase) * kernel_mellin(self.theta, [self.n], z, T)[:, 0]


def kernel_h(n: int, theta: float, phase: float | None = None) -> KernelH:
    return KernelH(n, theta, phase)


_GL_ORDER = 16
_TAIL_U = -12.0


@lru_cache(maxsize=16)
def _kernel_nodes(theta: float, T: float):
    """Nodes (log t), weights and mode-independent pieces for ``P h_n``.

    On ``(e^U, 1]`` the substitution ``t = e^u`` resolves the oscillation of
    ``t^(i tau)``; on ``[1, 1/sin theta]`` the substitution
    ``t = sin(v)/sin(theta)`` removes the square-root singularity.
    """
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    T = max(T, 1.0)
    # outer piece: u in [U, 0]
    n_u = max(8, int(math.ceil(abs(_TAIL_U) * T / 3.0)))
    edges = np.linspace(_TAIL_U, 0.0, n_u + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    u = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wu = (half[:, None] * w[None, :]).ravel()
    # integrand t^(z-1) h dt = e^{z u} h du; the arc-length density is folded into the weights
    logt_out = u
    t_out = np.exp(u)
    jac_out = wu / np.sqrt(1.0 - (t_out * math.sin(theta)) ** 2)
    psi_out = psi_of(t_out, theta)
    # inner piece: v in [theta, pi/2]
    span = math.log(1.0 / math.sin(theta))
    n_v = max(8, int(math.ceil(T * span / 3.0)) + 8)
    edges = np.linspace(theta, math.pi / 2, n_v + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    v = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wv = (half[:, None] * w[None, :]).ravel()
    tv = np.sin(v) / math.sin(theta)
    # t^(z-1) h dt with w(t) dt = dv / sin(theta): weight t^(z-1) dv / sin(theta)
    logt_in = np.log(tv)
    jac_in = wv / math.sin(theta)
    psi_in = v + theta
    return logt_out, jac_out, psi_out, logt_in, jac_in, psi_in


_KERNEL_CACHE: dict = {}
_KERNEL_CACHE_MAX = 512


def kernel_mellin(theta, modes, z, T=None, chunk=256):
    """Mellin transforms ``P h_n(z)`` (phase factor excluded) for several modes.

    Returns shape ``(len(z), len(modes))``.  Requires ``Re z > 0``.  Columns
    are cached per ``(theta, T, z, n)``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.real <= 0):
        raise DomainError("P h_n(z) needs Re z > 0")
    modes = np.asarray(modes, dtype=int)
    T = float(np.max(np.abs(z.imag))) if T is None else float(T)
    # quantize so the node cache is reused
    T = float(2 ** math.ceil(math.log2(max(T, 1.0))))
    zkey = (z.size, hash(z.tobytes()))
    keys = [(float(theta), T, zkey, int(n)) for n in modes]
    missing = sorted({n for n, k in zip(modes.tolist(), keys) if k not in _KERNEL_CACHE})
    if missing:
        if len(_KERNEL_CACHE) + len(missing) > _KERNEL_CACHE_MAX:
            _KERNEL_CACHE.clear()
        cols = _kernel_mellin_uncached(float(theta), np.array(missing), z, T, chunk)
        for j, n in enumerate(missing):
            _KERNEL_CACHE[(float(theta), T, zkey, n)] = cols[:, j]
    return np.stack([_KERNEL_CACHE[k] for k in keys], axis=1)


def _kernel_mellin_uncached(theta, modes, z, T, chunk):
    logt_out, jac_out, psi_out, logt_in, jac_in, psi_in = _kernel_nodes(float(theta), T)
    sign = np.where(modes % 2 == 0, 1.0, -1.0)
    # mode-dependent kernel values at the nodes (without the t^(z-1) factor)
    K_out = (sign[None, :] * np.exp(1j * np.outer(psi_out, modes)) * jac_out[:, None])
    K_in = (
        sign[None, :] * np.exp(1j * np.outer(psi_in, modes))
        + np.exp(1j * np.outer(2 * theta - psi_in, modes))
    ) * jac_in[:, None]
    out = np.empty((z.size, modes.size), dtype=complex)
    for i in range(0, z.size, chunk):
        zz = z[i : i + chunk]
        E_out = np.exp(np.multiply.outer(zz, logt_out))  # t^z (du measure)
        E_in = np.exp(np.multiply.outer(zz - 1, logt_in))  # t^(z-1) (dv measure)
        out[i : i + chunk] = E_out @ K_out + E_in @ K_in
    # analytic tail on (0, e^U): h ~ (-1)^n e^{i n theta} (1 + i n sin(theta) t)
    tU = math.exp(_TAIL_U)
    h0 = sign * np.exp(1j * modes * theta)
    h1 = h0 * 1j * modes * math.sin(theta)
    out += np.outer(tU**z / z, h0) + np.outer(tU ** (z + 1) / (z + 1), h1)
    return out
