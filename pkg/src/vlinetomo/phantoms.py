"""Smooth, compactly supported test fields.

Every profile is built from the C-infinity bump ``exp(1 - 1/(1 - x^2))`` on
``|x| < 1`` (zero elsewhere), so fields are exactly zero outside their support
and the integrands of all transforms are smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DomainError
from .tensors import TensorField

KINDS = ("bump-sum", "radial", "harmonic", "scalar-disk")


def bump(x):
    """``exp(1 - 1/(1 - x^2))`` for ``|x| < 1``; peak value 1 at ``x = 0``."""
    x = np.asarray(x, dtype=float)
    q = 1.0 - x * x
    out = np.zeros_like(q)
    inside = q > 0
    out[inside] = np.exp(1.0 - 1.0 / q[inside])
    return out


def _smooth_unit(x):
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_step(x):
    """C-infinity step: 0 for ``x <= 0``, 1 for ``x >= 1``, ``S(x) + S(1 - x) = 1``."""
    x = np.asarray(x, dtype=float)
    a = _smooth_unit(x)
    b = _smooth_unit(1.0 - x)
    return a / (a + b)


def ring(r, radius, width):
    """Radial bump centred on ``radius``; a plain centred bump when ``radius == 0``."""
    return bump((np.asarray(r, dtype=float) - radius) / width)


@dataclass
class Lobe:
    amplitudes: Sequence[float]
    width: float
    center: Sequence[float] = (0.0, 0.0)
    radius: float = 0.0
    mode: int = 0
    phases: Sequence[float] | None = None


@dataclass
class PhantomSpec:
    m: int
    kind: str
    support_radius: float
    lobes: list = field(default_factory=list)

    def validate(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown phantom kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.m, int) or self.m < 0:
            raise DomainError(f"rank must be a non-negative integer, got {self.m!r}")
        if not self.support_radius > 0:
            raise DomainError("support_radius must be positive")
        if not self.lobes:
            raise DomainError("phantom needs at least one lobe")
        if self.kind == "scalar-disk" and self.m != 0:
            raise DomainError("scalar-disk phantoms have rank 0")
        tol = 1e-12 * self.support_radius
        for i, lobe in enumerate(self.lobes):
            if not lobe.width > 0:
                raise DomainError(f"lobe {i}: width must be positive")
            if len(lobe.amplitudes) != self.m + 1:
                raise DomainError(f"lobe {i}: expected {self.m + 1} amplitudes, got {len(lobe.amplitudes)}")
            if self.kind == "bump-sum":
                outer = math.hypot(*lobe.center) + lobe.width
            else:
                outer = lobe.radius + lobe.width
            if outer > self.support_radius + tol:
                raise DomainError(f"lobe {i} reaches radius {outer:.6g} outside support {self.support_radius:.6g}")
            if self.kind in ("radial", "harmonic") and 0 < lobe.radius < lobe.width:
                raise DomainError(f"lobe {i}: ring overlaps the origin (radius < width), profile would not be smooth")
            if self.kind == "harmonic":
                if lobe.mode != 0 and lobe.radius < lobe.width:
                    raise DomainError(f"lobe {i}: harmonic mode {lobe.mode} needs a ring away from the origin")
                if lobe.phases is not None and len(lobe.phases) != self.m + 1:
                    raise DomainError(f"lobe {i}: expected {self.m + 1} phases")
        return self


class PhantomField(TensorField):
    """Analytic field generated from a :class:`PhantomSpec`."""

    kind = "analytic"

    def __init__(self, spec: PhantomSpec):
        spec.validate()
        super().__init__(spec.m, spec.support_radius)
        self.spec = spec

    def _components(self, x, y):
        spec = self.spec
        out = np.zeros((spec.m + 1,) + x.shape)
        r = np.hypot(x, y)
        if spec.kind == "bump-sum":
            for lobe in spec.lobes:
                prof = bump(np.hypot(x - lobe.center[0], y - lobe.center[1]) / lobe.width)
                out += np.asarray(lobe.amplitudes, dtype=float)[:, None] * prof
        elif spec.kind == "radial":
            for lobe in spec.lobes:
                out += np.asarray(lobe.amplitudes, dtype=float)[:, None] * ring(r, lobe.radius, lobe.width)
        elif spec.kind == "harmonic":
            beta = np.arctan2(y, x)
            for lobe in spec.lobes:
                prof = ring(r, lobe.radius, lobe.width)
                phases = np.zeros(spec.m + 1) if lobe.phases is None else np.asarray(lobe.phases, dtype=float)
                amps = np.asarray(lobe.amplitudes, dtype=float)
                out += amps[:, None] * prof * np.cos(lobe.mode * beta + phases[:, None])
        else:  # scalar-disk
            for lobe in spec.lobes:
                # smooth indicator of the disk |x| < radius, edge spread over [radius - width, radius + width]
                out[0] += lobe.amplitudes[0] * smooth_step((lobe.radius + lobe.width - r) / (2 * lobe.width))
        return out

    def fourier_coefficients(self, n, r):
        """Angular Fourier coefficients ``(1/2pi) int f_k(beta, r) e^{-i n beta} d beta``.

        Returns an array of shape ``(m + 1, len(r))``.  Exact for the radial,
        harmonic and scalar-disk kinds; bump sums use a 1e-10-accurate
        trapezoid rule in ``beta``.
        """
        spec = self.spec
        r = np.asarray(r, dtype=float)
        out = np.zeros((spec.m + 1,) + r.shape, dtype=complex)
        inside = r < spec.support_radius
        if spec.kind == "bump-sum":
            return angular_fourier(self, r, [n])[:, 0]
        for lobe in spec.lobes:
            amps = np.asarray(lobe.amplitudes, dtype=float)
            if spec.kind == "scalar-disk":
                if n == 0:
                    out[0] += amps[0] * smooth_step((lobe.radius + lobe.width - r) / (2 * lobe.width))
                continue
            prof = ring(r, lobe.radius, lobe.width)
            mode = lobe.mode if spec.kind == "harmonic" else 0
            phases = np.zeros(spec.m + 1) if lobe.phases is None else np.asarray(lobe.phases, dtype=float)
            if mode == 0:
                if n == 0:
                    out += (amps * np.cos(phases))[:, None] * prof
            elif n == mode:
                out += (amps * np.exp(1j * phases) / 2)[:, None] * prof
            elif n == -mode:
                out += (amps * np.exp(-1j * phases) / 2)[:, None] * prof
        return np.where(inside, out, 0.0)


def angular_fourier(field: TensorField, r, modes, n_angles: int = 1024):
    """Numerical angular Fourier coefficients of every component.

    Returns shape ``(m + 1, len(modes), len(r))``.  The trapezoid rule in
    angle is spectrally accurate for smooth fields.
    """
    r = np.asarray(r, dtype=float)
    beta = 2 * np.pi * np.arange(n_angles) / n_angles
    X = r[None, :] * np.cos(beta)[:, None]
    Y = r[None, :] * np.sin(beta)[:, None]
    vals = field.evaluate(X, Y)  # (m+1, n_angles, n_r)
    spec = np.fft.fft(vals, axis=1) / n_angles
    modes = np.asarray(modes, dtype=int)
    return spec[:, modes % n_angles, :]


def make_phantom(spec: PhantomSpec) -> PhantomField:
    return PhantomField(spec)


# ---------------------------------------------------------------------------
# ready-made specs used by tests, the CLI and the acceptance suite


def default_full_spec(m: int = 2, R: float = 1.0, theta: float = math.pi / 3) -> PhantomSpec:
    """Bump sum inside ``D_{0.4 R sin(theta)}``, distinct content per component."""
    rho = 0.4 * R * math.sin(theta)
    rng = np.random.default_rng(20240501 + m)
    lobes = [
        Lobe(center=(0.25 * rho, 0.2 * rho), width=0.55 * rho, amplitudes=list(rng.uniform(0.5, 1.5, m + 1))),
        Lobe(center=(-0.35 * rho, -0.1 * rho), width=0.5 * rho, amplitudes=list(rng.uniform(-1.0, 1.0, m + 1))),
        Lobe(center=(0.0, -0.45 * rho), width=0.4 * rho, amplitudes=list(rng.uniform(-1.0, 1.0, m + 1))),
    ]
    return PhantomSpec(m=m, kind="bump-sum", support_radius=rho, lobes=lobes).validate()


def default_partial_spec(R: float = 1.0) -> PhantomSpec:
    """Rank-2 field inside ``D_{0.8 R}`` with angular modes ``|n| <= 4``."""
    rho = 0.8 * R
    lobes = [
        Lobe(mode=0, radius=0.0, width=0.45 * R, amplitudes=[1.0, 0.3, 0.8]),
        Lobe(mode=1, radius=0.45 * R, width=0.3 * R, amplitudes=[0.6, -0.4, 0.5], phases=[0.3, 1.1, -0.7]),
        Lobe(mode=2, radius=0.5 * R, width=0.25 * R, amplitudes=[0.5, 0.7, -0.4], phases=[-0.2, 0.4, 1.3]),
        Lobe(mode=3, radius=0.55 * R, width=0.25 * R, amplitudes=[-0.4, 0.3, 0.6], phases=[0.9, -1.0, 0.2]),
        Lobe(mode=4, radius=0.55 * R, width=0.25 * R, amplitudes=[0.3, 0.5, -0.3], phases=[1.5, 0.0, -0.5]),
    ]
    return PhantomSpec(m=2, kind="harmonic", support_radius=rho, lobes=lobes).validate()
