"""Unitary Fourier transforms and the line-subsampling operator.

Spatial transform: per-frame 2-D DFT scaled by 1/N. Temporal transform:
1-D DFT along frames scaled by 1/sqrt(T). Both are isometries, so the
sampling operator ``sample = P_mask o F`` has operator norm at most 1.
k-space rows are kept in standard DFT order (row 0 = DC).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Mask, as_volume

_NORM = "ortho"


def forward_fft(image) -> np.ndarray:
    """Per-frame unitary 2-D DFT of a ``(T, N, N)`` volume."""
    return np.fft.fft2(as_volume(image), norm=_NORM)


def inverse_fft(kspace) -> np.ndarray:
    return np.fft.ifft2(np.asarray(kspace, dtype=np.complex128), norm=_NORM)


def temporal_fft(image) -> np.ndarray:
    """Unitary DFT along the frame axis (image -> x-f domain)."""
    return np.fft.fft(as_volume(image), axis=0, norm=_NORM)


def temporal_ifft(xf) -> np.ndarray:
    return np.fft.ifft(np.asarray(xf, dtype=np.complex128), axis=0, norm=_NORM)


@dataclass(frozen=True, eq=False)
class Measurements:
    """k-space samples on a mask.

    ``values[i]`` holds the N samples of ``mask.lines[i]``; flattening gives
    mask order then column order.
    """

    mask: Mask
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.size == 0:
            vals = vals.reshape(0, self.mask.N)
        if vals.shape != (len(self.mask), self.mask.N):
            raise ValueError(
                f"values shape {vals.shape} inconsistent with mask "
                f"({len(self.mask)} lines of {self.mask.N} samples)"
            )
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    def dense(self) -> np.ndarray:
        """Scatter into a zero ``(T, N, N)`` k-space volume."""
        N, T = self.mask.dims
        out = np.zeros((T, N, N), dtype=np.complex128)
        if len(self.mask):
            ts, ys = _line_index(self.mask)
            out[ts, ys, :] = self.values
        return out


def _line_index(mask: Mask):
    ts = np.fromiter((ln.t for ln in mask.lines), dtype=np.intp, count=len(mask))
    ys = np.fromiter((ln.y for ln in mask.lines), dtype=np.intp, count=len(mask))
    return ts, ys


def _check_dims(arr: np.ndarray, mask: Mask):
    T, N, _ = arr.shape
    if (N, T) != mask.dims:
        raise ValueError(f"mask dims {mask.dims} do not match image dims {(N, T)}")


def sample(image, mask: Mask) -> Measurements:
    """Noise-free measurements ``b = P_mask F x``."""
    arr = as_volume(image)
    _check_dims(arr, mask)
    if not len(mask):
        return Measurements(mask, np.zeros((0, mask.N), dtype=np.complex128))
    k = forward_fft(arr)
    ts, ys = _line_index(mask)
    return Measurements(mask, k[ts, ys, :])


def sample_kspace(kspace: np.ndarray, mask: Mask) -> Measurements:
    """Like `sample` but starting from a precomputed spectrum."""
    _check_dims(kspace, mask)
    if not len(mask):
        return Measurements(mask, np.zeros((0, mask.N), dtype=np.complex128))
    ts, ys = _line_index(mask)
    return Measurements(mask, kspace[ts, ys, :])


def adjoint_sample(meas: Measurements) -> np.ndarray:
    """Zero-filled adjoint ``F^* P_mask^* b``."""
    return inverse_fft(meas.dense())

