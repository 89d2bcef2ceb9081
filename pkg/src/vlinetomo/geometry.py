"""Broken-ray and straight-line geometry on a disk of radius ``R``.

A broken ray ``(phi, d)`` starts at ``x_phi = R (cos phi, sin phi)`` on the
boundary, travels a distance ``d`` along the diameter in direction
``u_phi = -(cos phi, sin phi)`` and then continues forever along
``v_phi = -(cos(phi + theta), sin(phi + theta))``.  Straight lines are
``{y : y . (cos psi, sin psi) = p}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Scene:
    """Disk radius ``R`` and the fixed scattering angle ``theta``."""

    R: float = 1.0
    theta: float = math.pi / 3

    def __post_init__(self):
        if not (np.isfinite(self.R) and self.R > 0):
            raise DomainError(f"disk radius must be positive, got R={self.R!r}")
        if not (0.0 < self.theta < math.pi / 2):
            raise DomainError(f"scattering angle must lie in (0, pi/2), got {self.theta!r}")


def _rot90(v):
    """Rotate a vector (or stack of vectors, last axis) counterclockwise by pi/2."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


@dataclass(frozen=True)
class BrokenRay:
    phi: float
    d: float
    scene: Scene
    x_phi: np.ndarray = field(repr=False)
    u_phi: np.ndarray = field(repr=False)
    v_phi: np.ndarray = field(repr=False)
    u_perp: np.ndarray = field(repr=False)
    v_perp: np.ndarray = field(repr=False)
    vertex: np.ndarray = field(repr=False)

    def first_leg(self, s):
        """Points ``x_phi + s u_phi`` for ``0 <= s <= d``."""
        s = np.asarray(s, dtype=float)
        return self.x_phi + s[..., None] * self.u_phi

    def second_leg(self, s):
        """Points ``vertex + s v_phi`` for ``s >= 0``."""
        s = np.asarray(s, dtype=float)
        return self.vertex + s[..., None] * self.v_phi


@dataclass(frozen=True)
class LineCoords:
    psi: float
    p: float

    @property
    def normal(self):
        return np.array([math.cos(self.psi), math.sin(self.psi)])

    @property
    def direction(self):
        # w_perp, the integration direction of the ray transforms
        return np.array([-math.sin(self.psi), math.cos(self.psi)])

    def distance(self, points):
        """Unsigned distance of ``points`` (..., 2) to the line."""
        points = np.asarray(points, dtype=float)
        return np.abs(points @ self.normal - self.p)


def _check_d(scene, d):
    d = np.asarray(d, dtype=float)
    tol = 1e-12 * scene.R
    if np.any(~np.isfinite(d)) or np.any(d < -tol) or np.any(d > 2 * scene.R + tol):
        raise DomainError(f"d must lie in [0, 2R] = [0, {2 * scene.R}], got {d!r}")
    return np.clip(d, 0.0, 2 * scene.R)


def _check_phi(phi):
    phi = np.asarray(phi, dtype=float)
    if np.any(~np.isfinite(phi)):
        raise DomainError(f"phi must be finite, got {phi!r}")
    return phi


def broken_ray(scene: Scene, phi: float, d: float) -> BrokenRay:
    phi = float(_check_phi(phi))
    d = float(_check_d(scene, d))
    c, s = math.cos(phi), math.sin(phi)
    ct, st = math.cos(phi + scene.theta), math.sin(phi + scene.theta)
    x_phi = scene.R * np.array([c, s])
    u = -np.array([c, s])
    v = -np.array([ct, st])
    return BrokenRay(
        phi=phi,
        d=d,
        scene=scene,
        x_phi=x_phi,
        u_phi=u,
        v_phi=v,
        u_perp=_rot90(u),
        v_perp=_rot90(v),
        vertex=x_phi + d * u,
    )


def broken_ray_arrays(scene: Scene, phi, d):
    """Vectorized broken-ray frames.

    Returns ``(vertex, u, v)`` with shape ``broadcast(phi, d).shape + (2,)``.
    """
    phi = _check_phi(phi)
    d = _check_d(scene, d)
    phi, d = np.broadcast_arrays(phi, d)
    radial = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    u = -radial
    v = -np.stack([np.cos(phi + scene.theta), np.sin(phi + scene.theta)], axis=-1)
    vertex = (scene.R - d)[..., None] * radial
    return vertex, u, v


def scattered_line_coords(scene: Scene, phi, d):
    """Line ``(psi, p)`` that contains the second leg of ``BR(phi, d)``.

    ``psi = phi + theta + pi/2`` and ``p = -(R - d) sin(theta)``; with this
    normal the integration direction ``w_perp`` equals ``v_phi``.
    Scalar inputs give a :class:`LineCoords`, array inputs a ``(psi, p)`` pair.
    """
    phi_a = _check_phi(phi)
    d_a = _check_d(scene, d)
    psi = phi_a + scene.theta + math.pi / 2
    p = (scene.R - d_a) * math.sin(math.pi + scene.theta)
    if psi.ndim == 0 and p.ndim == 0:
        return LineCoords(float(psi), float(p))
    return np.broadcast_arrays(psi, p)


def line_frame(psi):
    """Normal ``w`` and direction ``w_perp`` for line angles ``psi``."""
    psi = np.asarray(psi, dtype=float)
    w = np.stack([np.cos(psi), np.sin(psi)], axis=-1)
    return w, _rot90(w)


def chord_interval(origin, direction, radius, lo=-np.inf, hi=np.inf):
    """Parameter interval where ``origin + s*direction`` (unit direction) lies in the disk.

    The interval is intersected with ``[lo, hi]``.  Empty intersections come
    back with ``s0 == s1``.  Works on stacked inputs (last axis of length 2).
    """
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    b = np.sum(origin * direction, axis=-1)
    c = np.sum(origin * origin, axis=-1) - radius * radius
    disc = b * b - c
    root = np.sqrt(np.maximum(disc, 0.0))
    s0 = np.maximum(-b - root, lo)
    s1 = np.minimum(-b + root, hi)
    empty = (disc <= 0.0) | (s1 <= s0)
    s0 = np.where(empty, 0.0, s0)
    s1 = np.where(empty, 0.0, s1)
    return s0, s1


def psi_of(tau, theta):
    """``psi(tau) = arcsin(tau sin(theta)) + theta`` for ``0 <= tau <= 1/sin(theta)``."""
    arg = np.clip(np.asarray(tau, dtype=float) * math.sin(theta), -1.0, 1.0)
    return np.arcsin(arg) + theta


@dataclass(frozen=True)
class ScatteredLegParam:
    """Polar description of the scattered leg of the rotated broken ray ``B(0, t)``.

    The vertex sits at ``(t, 0)`` and the leg runs along ``-(cos theta, sin theta)``.
    It is split at its closest point to the origin, radius ``t sin(theta)``:
    the inner piece ``I_1`` (radii ``t sin(theta) .. t``) and the outer piece
    ``I_2`` (radii ``t sin(theta) .. r_max``).
    """

    t: float
    theta: float
    r_max: float

    @property
    def r_min(self):
        return self.t * math.sin(self.theta)

    @property
    def inner_range(self):
        return (self.r_min, self.t)

    @property
    def outer_range(self):
        return (self.r_min, max(self.r_min, self.r_max))

    def beta_inner(self, r):
        r = np.asarray(r, dtype=float)
        tau = np.where(r > 0, self.t / np.where(r > 0, r, 1.0), 1.0)
        return 2 * self.theta - psi_of(tau, self.theta)

    def beta_outer(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            tau = np.where(r > 0, self.t / np.where(r > 0, r, 1.0), 0.0)
        return math.pi + psi_of(tau, self.theta)

    def arc_weight(self, r):
        """``|ds/dr| = 1 / sqrt(1 - (t/r)^2 sin^2 theta)``, identical on both pieces."""
        r = np.asarray(r, dtype=float)
        q = (self.t * math.sin(self.theta) / r) ** 2
        return 1.0 / np.sqrt(1.0 - q)

    def arc_weight_chain_rule(self, r, branch):
        """Arc-length density from the chain rule on ``s^2 = r^2 + t^2 - 2rt cos(beta)``.

        Signed: negative on the inner piece, where ``s`` decreases as ``r`` grows.
        """
        r = np.asarray(r, dtype=float)
        t, th = self.t, self.theta
        tau = t / r
        psi = psi_of(tau, th)
        root = np.sqrt(1.0 - tau * tau * math.sin(th) ** 2)
        if branch == "inner":
            beta = 2 * th - psi
            num = r - t * np.cos(beta) + (t * t / r) * np.sin(beta) * math.sin(th) / root
        elif branch == "outer":
            beta = math.pi + psi
            num = r - t * np.cos(beta) - (t * t / r) * np.sin(beta) * math.sin(th) / root
        else:
            raise DomainError(f"branch must be 'inner' or 'outer', got {branch!r}")
        den = np.sqrt(r * r + t * t - 2 * r * t * np.cos(beta))
        return num / den

    def point(self, r, branch):
        """Cartesian point of the leg at radius ``r`` on the given piece."""
        r = np.asarray(r, dtype=float)
        beta = self.beta_inner(r) if branch == "inner" else self.beta_outer(r)
        return np.stack([r * np.cos(beta), r * np.sin(beta)], axis=-1)

    def contains(self, points, atol=1e-10):
        points = np.asarray(points, dtype=float)
        # line through (t, 0) with direction (cos theta, sin theta)
        n = np.array([-math.sin(self.theta), math.cos(self.theta)])
        dist = np.abs((points - np.array([self.t, 0.0])) @ n)
        return dist <= atol


def scattered_leg_polar(scene: Scene, t: float) -> ScatteredLegParam:
    if not np.isfinite(t) or t < 0:
        raise DomainError(f"t must be non-negative, got {t!r}")
    if t > scene.R * (1 + 1e-12):
        raise DomainError(f"t must not exceed R={scene.R}, got {t!r}")
    return ScatteredLegParam(t=float(min(t, scene.R)), theta=scene.theta, r_max=scene.R)
