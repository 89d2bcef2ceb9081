"""Tensor tomography with V-line (broken-ray) transforms in the disk."""

from .estimators import FullDataReconstructor, HalfDataReconstructor, VLineProjector, relative_errors
from .exceptions import (
    ConditioningError,
    ConfigError,
    CoverageError,
    DomainError,
    FileFormatError,
    NumericError,
    VLineError,
)
from .forward import (
    LineSinogram,
    VLineSinogram,
    add_noise,
    line_batch,
    radon,
    ray_longitudinal,
    ray_mixed,
    ray_transverse,
    sweep,
    sweep_lines,
    uniform_d_grid,
    uniform_phi_grid,
    vline_batch,
    vline_longitudinal,
    vline_mixed,
    vline_transverse,
)
from .full_recon import build_matrix_A, combine_to_lines, fbp_invert, reconstruct_full, solve_components
from .geometry import Scene, broken_ray, scattered_leg_polar, scattered_line_coords
from .io import RunConfig, read_raster, read_sinogram, write_raster, write_sinogram
from .mellin import KernelH, MellinContext, inverse_mellin, kernel_h, mellin, mult_convolve
from .partial_recon import (
    FieldFourierSeries,
    FourierDataSeries,
    combine_modes,
    data_fourier,
    reconstruct_partial,
    solve_mode,
    volterra_forward,
)
from .phantoms import Lobe, PhantomSpec, default_full_spec, default_partial_spec, make_phantom
from .tensors import GridField, SymTensor, TensorField, mixed_power, pair, sym_power

__version__ = "0.1.0"

__all__ = [
    "add_noise",
    "broken_ray",
    "build_matrix_A",
    "combine_modes",
    "combine_to_lines",
    "ConditioningError",
    "ConfigError",
    "CoverageError",
    "data_fourier",
    "default_full_spec",
    "default_partial_spec",
    "DomainError",
    "fbp_invert",
    "FieldFourierSeries",
    "FileFormatError",
    "FourierDataSeries",
    "FullDataReconstructor",
    "GridField",
    "HalfDataReconstructor",
    "inverse_mellin",
    "kernel_h",
    "KernelH",
    "line_batch",
    "LineSinogram",
    "Lobe",
    "make_phantom",
    "mellin",
    "MellinContext",
    "mixed_power",
    "mult_convolve",
    "NumericError",
    "pair",
    "PhantomSpec",
    "radon",
    "ray_longitudinal",
    "ray_mixed",
    "ray_transverse",
    "read_raster",
    "read_sinogram",
    "reconstruct_full",
    "reconstruct_partial",
    "relative_errors",
    "RunConfig",
    "scattered_leg_polar",
    "scattered_line_coords",
    "Scene",
    "solve_components",
    "solve_mode",
    "sweep",
    "sweep_lines",
    "sym_power",
    "SymTensor",
    "TensorField",
    "uniform_d_grid",
    "uniform_phi_grid",
    "vline_batch",
    "vline_longitudinal",
    "vline_mixed",
    "vline_transverse",
    "VLineError",
    "VLineProjector",
    "VLineSinogram",
    "volterra_forward",
    "write_raster",
    "write_sinogram",
]

