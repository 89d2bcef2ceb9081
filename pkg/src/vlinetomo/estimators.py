"""Scikit-learn style wrappers around the forward model and both reconstructions.

``VLineProjector`` is a transformer mapping tensor fields to V-line
sinograms.  ``FullDataReconstructor`` and ``HalfDataReconstructor`` are
fitted on a sinogram; ``predict`` returns component rasters and
``transform`` the reconstructed field.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DomainError
from .forward import add_noise, sweep, uniform_d_grid, uniform_phi_grid
from .full_recon import FILTERS, combine_to_lines, reconstruct_full, solve_components
from .geometry import Scene
from .mellin import MellinContext
from .partial_recon import default_r_grid, reconstruct_partial
from .validation import (
    check_choice,
    check_field,
    check_positive_float,
    check_positive_int,
    check_vline_sinogram,
)


class VLineProjector(TransformerMixin, BaseEstimator):
    """Forward V-line projector on a uniform ``phi x d`` grid.

    Parameters
    ----------
    R, theta : float
        Disk radius and scattering angle.
    n_phi, n_d : int
        Grid sizes.  ``phi`` is uniform on ``[0, 2 pi)``.
    coverage : {"full", "half"}
        ``d`` spans ``[0, 2R]`` or ``[0, R]``.
    h : float or None
        Quadrature step; ``None`` means ``R / 512``.
    noise_sigma, seed
        Optional additive Gaussian noise.
    threads : int
        Worker threads for the sweep (results do not depend on it).
    """

    def __init__(self, R=1.0, theta=math.pi / 3, n_phi=360, n_d=256, coverage="full", h=None, noise_sigma=0.0, seed=0, threads=1):
        self.R = R
        self.theta = theta
        self.n_phi = n_phi
        self.n_d = n_d
        self.coverage = coverage
        self.h = h
        self.noise_sigma = noise_sigma
        self.seed = seed
        self.threads = threads

    def fit(self, X=None, y=None):
        self.scene_ = Scene(check_positive_float(self.R, "R"), float(self.theta))
        check_choice(self.coverage, "coverage", ("full", "half"))
        d_max = 2 * self.scene_.R if self.coverage == "full" else self.scene_.R
        self.phi_grid_ = uniform_phi_grid(check_positive_int(self.n_phi, "n_phi"))
        self.d_grid_ = uniform_d_grid(check_positive_int(self.n_d, "n_d", 2), d_max)
        if self.h is not None:
            check_positive_float(self.h, "h")
        if not self.noise_sigma >= 0:
            raise DomainError(f"noise_sigma must be non-negative, got {self.noise_sigma!r}")
        return self

    def transform(self, X):
        check_is_fitted(self, "scene_")
        field = check_field(X)
        sino = sweep(field, self.scene_, self.phi_grid_, self.d_grid_, self.h, threads=self.threads)
        if self.noise_sigma > 0:
            sino = add_noise(sino, self.noise_sigma, self.seed)
        return sino


class FullDataReconstructor(BaseEstimator):
    """Reconstruction from V-line data over ``d in [0, 2R]``.

    Attributes
    ----------
    lines_ : LineSinogram
        Combined line-transform channels.
    radon_ : LineSinogram
        Component Radon sinograms.
    field_ : GridField
        Reconstructed field, masked to ``D_{R sin(theta)}``.
    """

    def __init__(self, n_pixels=256, filter="ramp", threads=1):
        self.n_pixels = n_pixels
        self.filter = filter
        self.threads = threads

    def fit(self, X, y=None):
        sino = check_vline_sinogram(X, d_max=2.0)
        check_positive_int(self.n_pixels, "n_pixels", 2)
        check_choice(self.filter, "filter", FILTERS)
        self.lines_ = combine_to_lines(sino)
        self.radon_ = solve_components(self.lines_)
        self.field_ = reconstruct_full(sino, n=self.n_pixels, filter=self.filter, threads=self.threads)
        self.m_ = sino.m
        return self

    def predict(self, X=None):
        """Component rasters ``(m + 1, n, n)``; refits when ``X`` is given."""
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "field_")
        return self.field_.data

    def transform(self, X):
        return self.fit(X).field_


class HalfDataReconstructor(BaseEstimator):
    """Rank-2 reconstruction from V-line data over ``d in [0, R]``.

    Attributes
    ----------
    modes_ : FieldFourierSeries
        Recovered angular modes of ``f11, f12, f22`` for ``|n| <= N - 2``.
    field_ : GridField
        Cartesian resynthesis.
    report_ : dict
        Ill-conditioned modes (zeroed) and the relative data level at ``t = R``.
    """

    def __init__(self, N=32, sigma0=2.0, T_max=200.0, dtau=0.05, n_radial=512, n_pixels=256, threads=1):
        self.N = N
        self.sigma0 = sigma0
        self.T_max = T_max
        self.dtau = dtau
        self.n_radial = n_radial
        self.n_pixels = n_pixels
        self.threads = threads

    def fit(self, X, y=None):
        sino = check_vline_sinogram(X, m=2, d_max=1.0)
        ctx = MellinContext(sigma0=float(self.sigma0), T_max=float(self.T_max), dtau=float(self.dtau))
        r_grid = default_r_grid(sino.scene.R, check_positive_int(self.n_radial, "n_radial", 2))
        self.modes_, self.field_ = reconstruct_partial(
            sino,
            N=check_positive_int(self.N, "N", 2),
            ctx=ctx,
            r_grid=r_grid,
            n_raster=check_positive_int(self.n_pixels, "n_pixels", 2),
            threads=self.threads,
        )
        self.report_ = self.modes_.report
        return self

    def predict(self, X=None):
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "field_")
        return self.field_.data

    def transform(self, X):
        return self.fit(X).field_


def relative_errors(estimate, reference, mask=None):
    """Per-component relative L2 and L-infinity errors between two raster stacks."""
    estimate = np.asarray(estimate, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if estimate.shape != reference.shape:
        raise DomainError(f"shape mismatch {estimate.shape} vs {reference.shape}")
    if mask is not None:
        estimate = estimate[:, mask]
        reference = reference[:, mask]
    diff = (estimate - reference).reshape(estimate.shape[0], -1)
    ref = reference.reshape(reference.shape[0], -1)
    l2 = np.linalg.norm(diff, axis=1) / np.maximum(np.linalg.norm(ref, axis=1), np.finfo(float).tiny)
    linf = np.abs(diff).max(axis=1) / np.maximum(np.abs(ref).max(axis=1), np.finfo(float).tiny)
    return l2, linf
