"""Synthetic dynamic phantoms, image-domain noise and the volume file format.

A phantom is a static set of ellipses plus one disk orbiting on a circle, a
cartoon of a cine heart: most energy sits in the temporal-DC frame of the
x-f domain, the moving disk spreads the rest over temporal frequencies.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DynamicImage, normalize

SUPERSAMPLE = 4


@dataclass(frozen=True)
class Ellipse:
    center: tuple  # (row, col) in pixels
    axes: tuple  # (semi-axis along rows, along cols) in pixels
    amplitude: complex


@dataclass(frozen=True)
class PhantomSpec:
    N: int
    T: int
    ellipses: tuple = ()
    orbit_center: tuple = (0.0, 0.0)
    orbit_radius: float = 0.0
    angular_step: float = 0.0  # radians per frame
    start_angle: float = 0.0
    disk_radius: float = 0.0
    disk_amplitude: complex = 0.0
    jitter: float = 0.0  # relative amplitude jitter
    seed: int = 0

    @property
    def dims(self):
        return (self.N, self.T)

    def disk_center(self, t: int) -> tuple:
        ang = self.start_angle + self.angular_step * t
        cy, cx = self.orbit_center
        return (cy + self.orbit_radius * math.sin(ang), cx + self.orbit_radius * math.cos(ang))


def default_spec(N: int = 32, T: int = 8, seed: int = 0, start_angle: float = 0.0) -> PhantomSpec:
    """Body ellipse, two static organs, and a bright orbiting disk, scaled to N."""
    s = N / 32.0
    c = (N - 1) / 2.0
    ellipses = (
        Ellipse((c, c), (13.0 * s, 11.0 * s), 0.35 + 0.05j),
        Ellipse((c - 6.0 * s, c + 4.5 * s), (3.0 * s, 2.0 * s), 0.25 - 0.10j),
        Ellipse((c + 5.0 * s, c - 5.0 * s), (2.5 * s, 3.5 * s), -0.15 + 0.20j),
    )
    return PhantomSpec(
        N=N,
        T=T,
        ellipses=ellipses,
        orbit_center=(c, c),
        orbit_radius=4.0 * s,
        angular_step=2.0 * math.pi / T,
        start_angle=start_angle,
        disk_radius=3.0 * s,
        disk_amplitude=0.6 + 0.3j,
        jitter=0.1,
        seed=seed,
    )


def suite_specs(count: int, N: int = 32, T: int = 8, seed: int = 0) -> list:
    """Specs of `count` phantoms differing in orbit phase and amplitude jitter."""
    return [
        default_spec(N, T, seed=seed * 1000 + i, start_angle=2.0 * math.pi * i / max(count, 1) + 0.37 * seed)
        for i in range(count)
    ]


def phantom_suite(count: int, N: int = 32, T: int = 8, seed: int = 0) -> list:
    return [generate_phantom(s) for s in suite_specs(count, N, T, seed)]


def _coverage_ellipse(N, center, axes):
    """Fraction of each pixel covered by the ellipse, via SUPERSAMPLE^2 subsamples."""
    offs = (np.arange(SUPERSAMPLE) + 0.5) / SUPERSAMPLE - 0.5
    grid = np.arange(N)
    rows = (grid[:, None] + offs[None, :]).ravel()
    cols = rows
    dy = ((rows - center[0]) / axes[0]) ** 2
    dx = ((cols - center[1]) / axes[1]) ** 2
    inside = (dy[:, None] + dx[None, :]) <= 1.0
    return inside.reshape(N, SUPERSAMPLE, N, SUPERSAMPLE).mean(axis=(1, 3))


def _check_bounds(N, center, axes, what):
    cy, cx = center
    ay, ax = axes
    if ay <= 0 or ax <= 0:
        raise ValueError(f"{what}: axes must be positive")
    lo, hi = -0.5, N - 0.5
    if cy - ay < lo or cy + ay > hi or cx - ax < lo or cx + ax > hi:
        raise ValueError(f"{what} leaves the {N}x{N} frame")


def generate_phantom(spec: PhantomSpec) -> DynamicImage:
    """Rasterize `spec` with anti-aliased edges and normalize to unit peak."""
    N, T = spec.N, spec.T
    if N < 1 or T < 1:
        raise ValueError("dims must be positive")
    rng = np.random.default_rng(spec.seed)
    n_shapes = len(spec.ellipses) + 1
    jit = 1.0 + spec.jitter * rng.uniform(-1.0, 1.0, size=n_shapes)

    static = np.zeros((N, N), dtype=np.complex128)
    for i, e in enumerate(spec.ellipses):
        _check_bounds(N, e.center, e.axes, f"ellipse {i}")
        static += complex(e.amplitude) * jit[i] * _coverage_ellipse(N, e.center, e.axes)

    out = np.empty((T, N, N), dtype=np.complex128)
    has_disk = spec.disk_radius > 0 and spec.disk_amplitude != 0
    for t in range(T):
        out[t] = static
        if has_disk:
            center = spec.disk_center(t)
            r = (spec.disk_radius, spec.disk_radius)
            _check_bounds(N, center, r, f"disk at frame {t}")
            out[t] += complex(spec.disk_amplitude) * jit[-1] * _coverage_ellipse(N, center, r)
    return normalize(out)


def add_image_noise(image, sigma: float, seed: int) -> DynamicImage:
    """Add iid N(0, sigma^2) noise to real and imaginary parts of every pixel."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    arr = np.asarray(image)
    scale = getattr(image, "scale", 1.0)
    if sigma == 0:
        return DynamicImage(arr, scale)
    rng = np.random.Generator(np.random.Philox(seed))
    noise = rng.standard_normal(arr.shape) + 1j * rng.standard_normal(arr.shape)
    return DynamicImage(arr + sigma * noise, scale)


def split_dataset(volumes, n_train: int, n_test: int):
    """First `n_train` volumes for training, the next `n_test` for testing."""
    volumes = list(volumes)
    if n_train < 0 or n_test < 0 or n_train + n_test > len(volumes):
        raise ValueError(
            f"need {n_train} + {n_test} volumes, only {len(volumes)} available"
        )
    return volumes[:n_train], volumes[n_train : n_train + n_test]


def temporal_ac_fraction(image) -> float:
    """Share of energy outside the temporal-DC frame of the x-f domain."""
    arr = np.asarray(image)
    xf = np.fft.fft(arr, axis=0, norm="ortho")
    total = float(np.vdot(xf, xf).real)
    dc = float(np.vdot(xf[0], xf[0]).real)
    return (total - dc) / total if total else 0.0


# ---------------------------------------------------------------------------
# volume files

MAGIC = b"SGMASKVOL\x00\x00\x00"
VERSION = 1
_HEADER = struct.Struct("<12sI")
_DIMS = struct.Struct("<III")


def write_volume(path, image, meta: dict | None = None) -> Path:
    """Write a ``.vol`` file plus a ``.vol.meta`` key: value sidecar."""
    path = Path(path)
    arr = np.ascontiguousarray(np.asarray(image), dtype="<c16")
    T, N, _ = arr.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION))
        fh.write(_DIMS.pack(N, N, T))
        fh.write(arr.tobytes(order="C"))
    info = {"format": f"sgmask-volume v{VERSION}", "layout": "frame-major, row-major, complex128 LE (re, im)"}
    info["N"] = N
    info["T"] = T
    info["normalization"] = repr(float(getattr(image, "scale", 1.0)))
    info.update(meta or {})
    with open(sidecar_path(path), "w") as fh:
        for key, val in info.items():
            fh.write(f"{key}: {val}\n")
    return path


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta")


def read_volume(path) -> DynamicImage:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size + _DIMS.size:
        raise ValueError(f"{path}: truncated header")
    magic, version = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a volume file")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    n1, n2, T = _DIMS.unpack_from(raw, _HEADER.size)
    if n1 != n2:
        raise ValueError(f"{path}: non-square frames {n1}x{n2}")
    body = raw[_HEADER.size + _DIMS.size :]
    if len(body) != 16 * n1 * n2 * T:
        raise ValueError(f"{path}: payload size does not match dims")
    arr = np.frombuffer(body, dtype="<c16").reshape(T, n1, n2).astype(np.complex128)
    scale = 1.0
    side = sidecar_path(path)
    if side.exists():
        meta = read_sidecar(side)
        if "normalization" in meta:
            scale = float(meta["normalization"])
    return DynamicImage(arr, scale)


def read_sidecar(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if ":" in line:
            key, val = line.split(":", 1)
            out[key.strip()] = val.strip()
    return out


def spec_to_meta(spec: PhantomSpec) -> dict:
    meta = {
        "N": spec.N,
        "T": spec.T,
        "seed": spec.seed,
        "orbit_center": f"{spec.orbit_center[0]!r},{spec.orbit_center[1]!r}",
        "orbit_radius": repr(spec.orbit_radius),
        "angular_step": repr(spec.angular_step),
        "start_angle": repr(spec.start_angle),
        "disk_radius": repr(spec.disk_radius),
        "disk_amplitude": repr(complex(spec.disk_amplitude)),
        "jitter": repr(spec.jitter),
    }
    for i, e in enumerate(spec.ellipses):
        meta[f"ellipse{i}"] = (
            f"{e.center[0]!r},{e.center[1]!r};{e.axes[0]!r},{e.axes[1]!r};{complex(e.amplitude)!r}"
        )
    return meta


__all__ = [
    "Ellipse",
    "PhantomSpec",
    "add_image_noise",
    "default_spec",
    "generate_phantom",
    "phantom_suite",
    "suite_specs",
    "read_volume",
    "split_dataset",
    "temporal_ac_fraction",
    "write_volume",
]
