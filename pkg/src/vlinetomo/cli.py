"""Command-line interface.

Exit codes: 0 success, 1 failed self-test, 2 invalid input (arguments,
files, configuration), 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import selftest
from .estimators import relative_errors
from .exceptions import DomainError, NumericError
from .forward import add_noise, sweep, sweep_lines, uniform_d_grid, uniform_phi_grid
from .full_recon import combine_to_lines, reconstruct_full, solve_components
from .io import (
    MAGIC,
    RunConfig,
    read_phantom_spec,
    read_raster,
    read_sinogram,
    write_pgm,
    write_phantom_spec,
    write_raster,
    write_sinogram,
)
from .mellin import MellinContext
from .partial_recon import default_r_grid, reconstruct_partial
from .phantoms import default_full_spec, default_partial_spec, make_phantom
from .tensors import GridField, pixel_centers
from .validation import check_vline_sinogram


def _config(args):
    return RunConfig.read(args.config) if args.config else RunConfig()


def cmd_phantom(args):
    cfg = _config(args)
    if args.preset == "full":
        spec = default_full_spec(args.m, cfg.R, cfg.theta)
    else:
        spec = default_partial_spec(cfg.R)
    write_phantom_spec(args.out, spec)
    if args.raster:
        field = make_phantom(spec)
        grid = GridField(field.rasterize(cfg.fbp_size, cfg.R), extent=cfg.R, R_support=cfg.R)
        write_raster(args.raster, grid, cfg.R, cfg.theta)
    return 0


def cmd_forward(args):
    cfg = _config(args)
    field = make_phantom(read_phantom_spec(args.phantom))
    if args.kind == "vline":
        d_max = 2 * cfg.R if args.coverage == "full" else cfg.R
        sino = sweep(field, cfg.scene, uniform_phi_grid(cfg.n_phi), uniform_d_grid(cfg.n_d, d_max), cfg.h, args.threads)
    else:
        psi = np.pi * np.arange(cfg.n_psi) / cfg.n_psi
        p = np.linspace(-cfg.R, cfg.R, cfg.n_p)
        sino = sweep_lines(field, psi, p, cfg.h, radon=args.kind == "radon", threads=args.threads)
        sino.meta.update(R=cfg.R, theta=cfg.theta)
    if cfg.noise_sigma > 0:
        sino = add_noise(sino, cfg.noise_sigma, cfg.seed)
    write_sinogram(args.out, sino)
    return 0


def cmd_reconstruct_full(args):
    cfg = _config(args)
    sino = check_vline_sinogram(read_sinogram(args.sinogram), d_max=2.0)
    if args.radon_out:
        write_sinogram(args.radon_out, solve_components(combine_to_lines(sino)))
    field = reconstruct_full(sino, n=cfg.fbp_size, filter=cfg.fbp_filter, threads=args.threads)
    write_raster(args.out, field, sino.scene.R, sino.scene.theta)
    return 0


def cmd_reconstruct_partial(args):
    cfg = _config(args)
    sino = check_vline_sinogram(read_sinogram(args.sinogram), m=2, d_max=1.0)
    ctx = MellinContext(sigma0=cfg.sigma0, T_max=cfg.T_max, dtau=cfg.dtau)
    modes, field = reconstruct_partial(
        sino, N=cfg.N, ctx=ctx, r_grid=default_r_grid(sino.scene.R), n_raster=cfg.fbp_size, threads=args.threads
    )
    for n, s in modes.report["ill_conditioned"]:
        print(f"warning: mode {n} zeroed, near-singular denominator at s={s:.6g}", file=sys.stderr)
    write_raster(args.out, field, sino.scene.R, sino.scene.theta)
    if args.modes_out:
        with open(args.modes_out, "w") as fh:
            fh.write("n,r,a_re,a_im,b_re,b_im,c_re,c_im\n")
            for j, n in enumerate(modes.modes):
                for i, r in enumerate(modes.r_grid):
                    vals = [modes.a[j, i], modes.b[j, i], modes.c[j, i]]
                    parts = ",".join(f"{v.real:.17g},{v.imag:.17g}" for v in vals)
                    fh.write(f"{n},{r:.17g},{parts}\n")
    return 0


def _load_reference(path, like: GridField):
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return read_raster(path).data
    field = make_phantom(read_phantom_spec(path))
    return field.rasterize(like.n, like.extent)


def cmd_compare(args):
    est = read_raster(args.estimate)
    ref = _load_reference(args.reference, est)
    if ref.shape != est.data.shape:
        raise DomainError(f"reference raster shape {ref.shape} differs from estimate {est.data.shape}")
    mask = None
    if args.mask_radius is not None:
        xs = pixel_centers(est.n, est.extent)
        X, Y = np.meshgrid(xs, xs, indexing="xy")
        mask = X**2 + Y**2 <= args.mask_radius**2
    l2, linf = relative_errors(est.data, ref, mask)
    print("component,rel_l2,rel_linf")
    for k in range(l2.size):
        print(f"{k},{l2[k]:.17g},{linf[k]:.17g}")
    return 0


def cmd_render(args):
    grid = read_raster(args.raster)
    for k in range(grid.m + 1):
        path = Path(f"{args.out_prefix}_f{k}.pgm")
        write_pgm(path, grid.data[k])
        print(path)
    return 0


def cmd_selftest(args):
    return 0 if selftest.run() else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="vlinetomo", description="V-line tensor tomography toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, threads=False):
        p.add_argument("--config", help="key=value run configuration")
        if threads:
            p.add_argument("--threads", type=int, default=1, help="worker threads (output does not depend on it)")

    p = sub.add_parser("phantom", help="write a phantom spec and optionally its raster")
    common(p)
    p.add_argument("--preset", choices=("full", "partial"), default="full")
    p.add_argument("--m", type=int, default=2, help="rank for the full-data preset")
    p.add_argument("--out", required=True, help="phantom spec path")
    p.add_argument("--raster", help="optional raster output path")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("forward", help="simulate V-line (or line) data for a phantom")
    common(p, threads=True)
    p.add_argument("--phantom", required=True)
    p.add_argument("--kind", choices=("vline", "lines", "radon"), default="vline")
    p.add_argument("--coverage", choices=("full", "half"), default="full", help="d over [0, 2R] or [0, R]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("reconstruct-full", help="reconstruct from data over d in [0, 2R]")
    common(p, threads=True)
    p.add_argument("--sinogram", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--radon-out", help="also write component Radon sinograms")
    p.set_defaults(func=cmd_reconstruct_full)

    p = sub.add_parser("reconstruct-partial", help="rank-2 reconstruction from data over d in [0, R]")
    common(p, threads=True)
    p.add_argument("--sinogram", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--modes-out", help="CSV of recovered angular modes")
    p.set_defaults(func=cmd_reconstruct_partial)

    p = sub.add_parser("compare", help="relative L2 / L-inf errors as CSV")
    p.add_argument("--reference", required=True, help="raster file or phantom spec")
    p.add_argument("--estimate", required=True, help="raster file")
    p.add_argument("--mask-radius", type=float, help="compare only inside this radius")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("render", help="write one 16-bit PGM per component")
    p.add_argument("--raster", required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("selftest", help="run invariant checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
