"""Symmetric m-tensors in the plane and tensor fields on a disk.

A symmetric m-tensor in 2D has m + 1 independent entries.  Entry ``k`` stores
``f_{1..1 2..2}`` with ``k`` indices equal to 2; the multiplicity ``C(m, k)``
of that entry in the full tensor is applied by :func:`pair`, not in storage.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, Sequence

import numpy as np

from .exceptions import DomainError, NumericError

MAX_RANK = 8


def _check_rank(m):
    if not isinstance(m, (int, np.integer)) or m < 0:
        raise DomainError(f"rank must be a non-negative integer, got {m!r}")
    if m > MAX_RANK:
        raise DomainError(f"rank {m} exceeds the supported maximum {MAX_RANK}")
    return int(m)


def binomials(m):
    return np.array([comb(m, k) for k in range(m + 1)], dtype=float)


@dataclass(frozen=True)
class SymTensor:
    m: int
    comp: np.ndarray

    def __post_init__(self):
        _check_rank(self.m)
        comp = np.asarray(self.comp, dtype=float)
        if comp.shape != (self.m + 1,):
            raise DomainError(f"rank-{self.m} tensor needs {self.m + 1} components, got shape {comp.shape}")
        object.__setattr__(self, "comp", comp)

    def full(self):
        """Dense ``2 x ... x 2`` array with all index permutations filled in."""
        out = np.empty((2,) * self.m)
        for idx in np.ndindex(*out.shape):
            out[idx] = self.comp[sum(idx)]
        return out


def contraction_weights(a, b, k, m):
    """Coefficients of ``z**j`` in ``(a1 + a2 z)**(m-k) * (b1 + b2 z)**k``.

    Entry ``j`` is the weight of component ``j`` in the full contraction of a
    symmetric tensor with ``b^k a^(m-k)``; multiplicities are included.
    ``a`` and ``b`` may be stacks of vectors (last axis of length 2); the
    result then has shape ``a.shape[:-1] + (m + 1,)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
    poly = np.zeros(shape + (m + 1,))
    poly[..., 0] = 1.0
    deg = 0
    factors = [a] * (m - k) + [b] * k
    for f in factors:
        c0 = f[..., 0][..., None]
        c1 = f[..., 1][..., None]
        nxt = poly * c0
        nxt[..., 1 : deg + 2] += poly[..., : deg + 1] * c1
        poly = nxt
        deg += 1
    return poly


def sym_power(u, m: int) -> SymTensor:
    """``u^m``: entry ``k`` is ``u1^(m-k) u2^k``."""
    m = _check_rank(m)
    u = np.asarray(u, dtype=float)
    k = np.arange(m + 1)
    return SymTensor(m, u[0] ** (m - k) * u[1] ** k)


def mixed_power(u, v, k: int, m: int) -> SymTensor:
    """Symmetrization of ``v^k u^(m-k)`` in component storage."""
    m = _check_rank(m)
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= m:
        raise DomainError(f"k must satisfy 0 <= k <= m={m}, got {k!r}")
    w = contraction_weights(u, v, int(k), m)
    return SymTensor(m, w / binomials(m))


def pair(f: SymTensor, w: SymTensor) -> float:
    """Full index contraction ``f_{i1..im} w^{i1..im}``."""
    if f.m != w.m:
        raise DomainError(f"rank mismatch: {f.m} vs {w.m}")
    return float(np.sum(binomials(f.m) * f.comp * w.comp))


class TensorField:
    """Symmetric m-tensor field supported in the closed disk of radius ``R_support``.

    Subclasses implement :meth:`_components`, returning an array of shape
    ``(m + 1,) + x.shape``.  :meth:`evaluate` zeroes everything outside the
    support.
    """

    kind = "abstract"

    def __init__(self, m: int, R_support: float):
        self.m = _check_rank(m)
        if not (np.isfinite(R_support) and R_support > 0):
            raise DomainError(f"support radius must be positive, got {R_support!r}")
        self.R_support = float(R_support)

    def _components(self, x, y):
        raise NotImplementedError

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        inside = x * x + y * y < self.R_support**2
        out = np.zeros((self.m + 1,) + x.shape)
        if np.any(inside):
            vals = self._components(x[inside], y[inside])
            if not np.all(np.isfinite(vals)):
                raise NumericError("tensor field produced non-finite values")
            out[:, inside] = vals
        return out

    def at(self, point) -> SymTensor:
        vals = self.evaluate(np.asarray(point[0]), np.asarray(point[1]))
        return SymTensor(self.m, vals.reshape(self.m + 1))

    def rasterize(self, n: int, extent: float):
        """Sample on the pixel centres of an ``n x n`` grid covering ``[-extent, extent]^2``."""
        xs = pixel_centers(n, extent)
        X, Y = np.meshgrid(xs, xs, indexing="xy")
        return self.evaluate(X, Y)

    def __add__(self, other):
        return SumField([self, other])

    def __mul__(self, scale):
        return ScaledField(self, float(scale))

    __rmul__ = __mul__


def pixel_centers(n, extent):
    step = 2.0 * extent / n
    return -extent + (np.arange(n) + 0.5) * step


class AnalyticField(TensorField):
    """Field with closed-form component callables ``g_k(x, y)``."""

    kind = "analytic"

    def __init__(self, components: Sequence[Callable], R_support: float):
        super().__init__(len(components) - 1, R_support)
        self.components = list(components)

    def _components(self, x, y):
        return np.stack([np.broadcast_to(np.asarray(g(x, y), dtype=float), x.shape) for g in self.components])


class SumField(TensorField):
    kind = "analytic"

    def __init__(self, fields):
        ranks = {f.m for f in fields}
        if len(ranks) != 1:
            raise DomainError(f"cannot add fields of different ranks {sorted(ranks)}")
        super().__init__(fields[0].m, max(f.R_support for f in fields))
        self.fields = list(fields)

    def _components(self, x, y):
        return sum(f.evaluate(x, y) for f in self.fields)


class ScaledField(TensorField):
    kind = "analytic"

    def __init__(self, field: TensorField, scale: float):
        super().__init__(field.m, field.R_support)
        self.field = field
        self.scale = scale

    def _components(self, x, y):
        return self.scale * self.field.evaluate(x, y)


class ZeroField(TensorField):
    kind = "analytic"

    def _components(self, x, y):
        return np.zeros((self.m + 1,) + x.shape)


class GridField(TensorField):
    """Field given by ``m + 1`` rasters on pixel centres over ``[-extent, extent]^2``.

    Bilinear interpolation; samples outside the raster or outside
    ``R_support`` are exactly zero.  Raster index order is ``[row=y, col=x]``.
    """

    kind = "grid"

    def __init__(self, data, extent: float, R_support: float | None = None):
        data = np.asarray(data, dtype=float)
        if data.ndim != 3 or data.shape[1] != data.shape[2]:
            raise DomainError(f"grid data must have shape (m+1, n, n), got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise NumericError("grid field contains non-finite values")
        super().__init__(data.shape[0] - 1, extent if R_support is None else R_support)
        self.data = data
        self.extent = float(extent)
        self.n = data.shape[1]

    def _components(self, x, y):
        n = self.n
        step = 2.0 * self.extent / n
        fx = (x + self.extent) / step - 0.5
        fy = (y + self.extent) / step - 0.5
        ix = np.floor(fx).astype(int)
        iy = np.floor(fy).astype(int)
        tx = fx - ix
        ty = fy - iy
        out = np.zeros((self.m + 1,) + x.shape)
        for dx, dy, wgt in ((0, 0, (1 - tx) * (1 - ty)), (1, 0, tx * (1 - ty)), (0, 1, (1 - tx) * ty), (1, 1, tx * ty)):
            jx = ix + dx
            jy = iy + dy
            ok = (jx >= 0) & (jx < n) & (jy >= 0) & (jy < n)
            jxc = np.clip(jx, 0, n - 1)
            jyc = np.clip(jy, 0, n - 1)
            out += np.where(ok, wgt, 0.0) * self.data[:, jyc, jxc]
        return out
