"""Input checks shared by the estimators and the CLI."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import DomainError, NumericError
from .forward import LineSinogram, VLineSinogram
from .tensors import TensorField


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_positive_float(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_choice(value, name, choices):
    if value not in choices:
        raise DomainError(f"{name} must be one of {tuple(choices)}, got {value!r}")
    return value


def check_field(field, m=None) -> TensorField:
    if not isinstance(field, TensorField):
        raise DomainError(f"expected a TensorField, got {type(field).__name__}")
    if m is not None and field.m != m:
        raise DomainError(f"expected a rank-{m} field, got rank {field.m}")
    return field


def check_vline_sinogram(sino, m=None, d_max=None) -> VLineSinogram:
    """Validate a V-line sinogram: type, rank, finiteness and d coverage.

    ``d_max`` is the largest vertex distance the caller needs, in units of R.
    """
    if not isinstance(sino, VLineSinogram):
        raise DomainError(f"expected a VLineSinogram, got {type(sino).__name__}")
    if m is not None and sino.m != m:
        raise DomainError(f"expected rank-{m} data, got rank {sino.m}")
    if not np.all(np.isfinite(sino.data)):
        raise NumericError("sinogram contains non-finite values")
    if d_max is not None and sino.d_grid.max() < d_max * sino.scene.R * (1 - 1e-12):
        raise DomainError(f"d grid ends at {sino.d_grid.max():.6g}, need {d_max} R")
    return sino


def check_line_sinogram(sino, kind=None) -> LineSinogram:
    if not isinstance(sino, LineSinogram):
        raise DomainError(f"expected a LineSinogram, got {type(sino).__name__}")
    if kind is not None and sino.kind != kind:
        raise DomainError(f"expected a {kind!r} line sinogram, got {sino.kind!r}")
    if not np.all(np.isfinite(sino.data)):
        raise NumericError("sinogram contains non-finite values")
    return sino
