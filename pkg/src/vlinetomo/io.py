"""File formats: binary sinogram/raster container, key=value configs, phantom specs, PGM.

Binary container layout (little-endian)::

    offset  size  field
    0       4     magic b"VLSG"
    4       2     version (u16, currently 1)
    6       1     kind (u8): 0 V-line, 1 line transforms, 2 component Radon, 3 raster
    7       1     m (u8)
    8       8     R (f64)
    16      8     theta (f64)
    24      4     channels (u32)
    28      4     n1 (u32)
    32      4     n2 (u32)
    36      8     aux0 (f64): raster extent, NaN otherwise
    44      8     aux1 (f64): raster support radius, NaN otherwise
    52      8*n1  first grid (phi, psi or x)
    ...     8*n2  second grid (d, p or y)
    ...     8*channels*n1*n2  payload, channel-major
    end-4   4     CRC32 of all preceding bytes (u32)
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, FileFormatError
from .forward import LineSinogram, VLineSinogram
from .geometry import Scene
from .phantoms import KINDS, Lobe, PhantomSpec
from .tensors import GridField, pixel_centers

MAGIC = b"VLSG"
VERSION = 1
KIND_VLINE, KIND_LINES, KIND_RADON, KIND_RASTER = 0, 1, 2, 3
_HEADER = struct.Struct("<4sHBBddIIIdd")


def _encode(kind, m, R, theta, grid1, grid2, payload, aux=(math.nan, math.nan)):
    grid1 = np.ascontiguousarray(grid1, dtype="<f8")
    grid2 = np.ascontiguousarray(grid2, dtype="<f8")
    payload = np.ascontiguousarray(payload, dtype="<f8")
    channels = payload.shape[0]
    if payload.shape != (channels, grid1.size, grid2.size):
        raise FileFormatError(f"payload shape {payload.shape} does not match grids ({grid1.size}, {grid2.size})")
    head = _HEADER.pack(MAGIC, VERSION, kind, m, R, theta, channels, grid1.size, grid2.size, aux[0], aux[1])
    body = head + grid1.tobytes() + grid2.tobytes() + payload.tobytes()
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def _decode(blob: bytes):
    if len(blob) < _HEADER.size + 4:
        raise FileFormatError(f"file too short ({len(blob)} bytes) for the {_HEADER.size}-byte header")
    magic, version, kind, m, R, theta, ch, n1, n2, aux0, aux1 = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise FileFormatError(f"bad magic {magic!r} at byte offset 0")
    if version != VERSION:
        raise FileFormatError(f"unsupported version {version} at byte offset 4")
    if kind > KIND_RASTER:
        raise FileFormatError(f"unknown kind {kind} at byte offset 6")
    need = _HEADER.size + 8 * (n1 + n2 + ch * n1 * n2) + 4
    if len(blob) != need:
        raise FileFormatError(f"expected {need} bytes from header at offset 24..36, file has {len(blob)}")
    stored = struct.unpack_from("<I", blob, need - 4)[0]
    actual = zlib.crc32(blob[: need - 4]) & 0xFFFFFFFF
    if stored != actual:
        raise FileFormatError(f"CRC32 mismatch at byte offset {need - 4}: stored {stored:08x}, computed {actual:08x}")
    off = _HEADER.size
    grid1 = np.frombuffer(blob, "<f8", n1, off).astype(float)
    off += 8 * n1
    grid2 = np.frombuffer(blob, "<f8", n2, off).astype(float)
    off += 8 * n2
    payload = np.frombuffer(blob, "<f8", ch * n1 * n2, off).astype(float).reshape(ch, n1, n2)
    if ch != m + 1:
        raise FileFormatError(f"channel count {ch} at byte offset 24 does not match rank {m}")
    return kind, m, R, theta, grid1, grid2, payload, (aux0, aux1)


def encode_sinogram(sino) -> bytes:
    if isinstance(sino, VLineSinogram):
        return _encode(KIND_VLINE, sino.m, sino.scene.R, sino.scene.theta, sino.phi_grid, sino.d_grid, sino.data)
    if isinstance(sino, LineSinogram):
        kind = KIND_RADON if sino.kind == "radon" else KIND_LINES
        R = float(sino.meta.get("R", math.nan))
        theta = float(sino.meta.get("theta", math.nan))
        return _encode(kind, sino.m, R, theta, sino.psi_grid, sino.p_grid, sino.data)
    raise FileFormatError(f"cannot encode {type(sino).__name__}")


def decode_sinogram(blob: bytes):
    kind, m, R, theta, g1, g2, payload, _ = _decode(blob)
    if kind == KIND_VLINE:
        return VLineSinogram(Scene(R, theta), m, g1, g2, payload)
    if kind in (KIND_LINES, KIND_RADON):
        meta = {} if math.isnan(R) else {"R": R, "theta": theta}
        return LineSinogram(g1, g2, payload, m, "radon" if kind == KIND_RADON else "transforms", meta)
    raise FileFormatError("file holds a raster, not a sinogram (kind byte at offset 6)")


def write_sinogram(path, sino):
    Path(path).write_bytes(encode_sinogram(sino))


def read_sinogram(path):
    return decode_sinogram(_read(path))


def write_raster(path, field: GridField, R=math.nan, theta=math.nan):
    xs = pixel_centers(field.n, field.extent)
    blob = _encode(KIND_RASTER, field.m, R, theta, xs, xs, field.data, aux=(field.extent, field.R_support))
    Path(path).write_bytes(blob)


def read_raster(path) -> GridField:
    kind, m, R, theta, g1, g2, payload, (extent, support) = _decode(_read(path))
    if kind != KIND_RASTER:
        raise FileFormatError(f"file holds kind {kind}, not a raster (byte offset 6)")
    return GridField(payload, extent=extent, R_support=support)


def _read(path):
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc.strerror}") from exc


# ---------------------------------------------------------------------------
# key=value text


def parse_key_values(text, source="<text>"):
    """``[(line_no, key, value)]`` from ``key = value`` lines; ``#`` starts a comment."""
    out = []
    seen = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{no}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{no}: empty key")
        if key in seen:
            raise ConfigError(f"{source}:{no}: duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = no
        out.append((no, key, value))
    return out


def _as_float(value, where):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None


def _as_int(value, where):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{where}: expected an integer, got {value!r}") from None


def _floats(value, where):
    return [_as_float(v, where) for v in value.split(",") if v.strip()]


@dataclass
class RunConfig:
    """Run settings; every key is validated and unknown keys are rejected."""

    R: float = 1.0
    theta: float = math.pi / 3
    n_phi: int = 360
    n_d: int = 256
    n_psi: int = 360
    n_p: int = 512
    h: float | None = None
    fbp_filter: str = "ramp"
    fbp_size: int = 256
    sigma0: float = 2.0
    T_max: float = 200.0
    dtau: float = 0.05
    N: int = 32
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self, where="config"):
        def bad(key, msg):
            raise ConfigError(f"{where}: key {key!r} {msg}")

        if not self.R > 0:
            bad("R", "must be positive")
        if not 0 < self.theta < math.pi / 2:
            bad("theta", "must lie in (0, pi/2)")
        for key in ("n_phi", "n_d", "n_psi", "n_p", "fbp_size"):
            if getattr(self, key) < 2:
                bad(key, "must be at least 2")
        if self.h is not None and not self.h > 0:
            bad("h", "must be positive or 'auto'")
        if self.fbp_filter not in ("ramp", "hann"):
            bad("fbp_filter", "must be 'ramp' or 'hann'")
        if not self.sigma0 > 1:
            bad("sigma0", "must exceed 1")
        if not (self.T_max > 0 and 0 < self.dtau <= self.T_max):
            bad("T_max", "and dtau must satisfy 0 < dtau <= T_max")
        if self.N < 2:
            bad("N", "must be at least 2")
        if not self.noise_sigma >= 0:
            bad("noise_sigma", "must be non-negative")
        return self

    @classmethod
    def from_text(cls, text, source="<config>"):
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for no, key, value in parse_key_values(text, source):
            where = f"{source}:{no}"
            if key not in types:
                raise ConfigError(f"{where}: unknown key {key!r}")
            kind = types[key]
            if key == "h":
                values[key] = None if value.lower() == "auto" else _as_float(value, where)
            elif kind == "int":
                values[key] = _as_int(value, where)
            elif kind == "float":
                values[key] = _as_float(value, where)
            else:
                values[key] = value
        cfg = cls.__new__(cls)
        for f in fields(cls):
            setattr(cfg, f.name, values.get(f.name, f.default))
        return cfg.validate(source)

    @classmethod
    def read(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
        return cls.from_text(text, str(path))

    def to_text(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {'auto' if v is None else repr(v) if isinstance(v, float) else v}")
        return "\n".join(lines) + "\n"

    @property
    def scene(self):
        return Scene(self.R, self.theta)


# ---------------------------------------------------------------------------
# phantom specs

_LOBE_KEYS = ("center", "width", "amplitudes", "radius", "mode", "phases")


def phantom_spec_to_text(spec: PhantomSpec) -> str:
    lines = [f"m = {spec.m}", f"kind = {spec.kind}", f"support_radius = {spec.support_radius!r}"]
    for i, lobe in enumerate(spec.lobes):
        lines.append(f"lobe.{i}.center = {', '.join(repr(float(c)) for c in lobe.center)}")
        lines.append(f"lobe.{i}.width = {float(lobe.width)!r}")
        lines.append(f"lobe.{i}.amplitudes = {', '.join(repr(float(a)) for a in lobe.amplitudes)}")
        lines.append(f"lobe.{i}.radius = {float(lobe.radius)!r}")
        lines.append(f"lobe.{i}.mode = {int(lobe.mode)}")
        phases = "none" if lobe.phases is None else ", ".join(repr(float(p)) for p in lobe.phases)
        lines.append(f"lobe.{i}.phases = {phases}")
    return "\n".join(lines) + "\n"


def phantom_spec_from_text(text, source="<phantom>") -> PhantomSpec:
    head = {}
    lobes: dict[int, dict] = {}
    for no, key, value in parse_key_values(text, source):
        where = f"{source}:{no}"
        if key in ("m", "kind", "support_radius"):
            head[key] = value
            continue
        parts = key.split(".")
        if len(parts) != 3 or parts[0] != "lobe" or not parts[1].isdigit() or parts[2] not in _LOBE_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        lobes.setdefault(int(parts[1]), {})[parts[2]] = (value, where)
    for key in ("m", "kind", "support_radius"):
        if key not in head:
            raise ConfigError(f"{source}: missing key {key!r}")
    if head["kind"] not in KINDS:
        raise ConfigError(f"{source}: key 'kind' must be one of {KINDS}, got {head['kind']!r}")
    if sorted(lobes) != list(range(len(lobes))):
        raise ConfigError(f"{source}: lobe indices must run 0..{len(lobes) - 1}")
    out = []
    for i in range(len(lobes)):
        d = lobes[i]
        for key in ("width", "amplitudes"):
            if key not in d:
                raise ConfigError(f"{source}: lobe {i} is missing {key!r}")
        kw = {
            "width": _as_float(*d["width"]),
            "amplitudes": _floats(*d["amplitudes"]),
        }
        if "center" in d:
            center = _floats(*d["center"])
            if len(center) != 2:
                raise ConfigError(f"{d['center'][1]}: center needs two coordinates")
            kw["center"] = tuple(center)
        if "radius" in d:
            kw["radius"] = _as_float(*d["radius"])
        if "mode" in d:
            kw["mode"] = _as_int(*d["mode"])
        if "phases" in d and d["phases"][0].lower() != "none":
            kw["phases"] = _floats(*d["phases"])
        out.append(Lobe(**kw))
    spec = PhantomSpec(
        m=_as_int(head["m"], source),
        kind=head["kind"],
        support_radius=_as_float(head["support_radius"], source),
        lobes=out,
    )
    return spec.validate()


def write_phantom_spec(path, spec):
    Path(path).write_text(phantom_spec_to_text(spec))


def read_phantom_spec(path) -> PhantomSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return phantom_spec_from_text(text, str(path))


# ---------------------------------------------------------------------------
# images


def to_pgm_bytes(image, vmin=None, vmax=None) -> bytes:
    """16-bit binary PGM (P5, big-endian samples) of a 2-D array.

    Values map linearly from ``[vmin, vmax]`` (default: data range) to
    ``[0, 65535]``; a constant image is all black.  Row 0 of the array
    (smallest ``y``) becomes the bottom image row.
    """
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise FileFormatError(f"PGM needs a 2-D array, got shape {image.shape}")
    lo = float(image.min()) if vmin is None else float(vmin)
    hi = float(image.max()) if vmax is None else float(vmax)
    if hi > lo:
        scaled = np.clip((image - lo) / (hi - lo), 0.0, 1.0)
        pix = np.rint(scaled * 65535).astype(">u2")
    else:
        pix = np.zeros(image.shape, dtype=">u2")
    header = f"P5\n{image.shape[1]} {image.shape[0]}\n65535\n".encode("ascii")
    return header + pix[::-1].tobytes()


def write_pgm(path, image, vmin=None, vmax=None):
    Path(path).write_bytes(to_pgm_bytes(image, vmin, vmax))


def read_pgm(path):
    blob = _read(path)
    parts = blob.split(maxsplit=4)
    if len(parts) < 5 or parts[0] != b"P5":
        raise FileFormatError("not a binary PGM (P5) file")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    dtype = ">u2" if maxval > 255 else "u1"
    data = np.frombuffer(blob[len(blob) - w * h * np.dtype(dtype).itemsize :], dtype=dtype)
    return data.reshape(h, w)[::-1].astype(int)
