"""Image quality metrics, all oriented so that higher is better.

PSNR and SSIM are computed on magnitude volumes with the peak fixed at 1.0
(inputs are normalized at ingestion). PSNR uses one MSE over the whole
volume. SSIM averages 8x8 uniform windows, stride 1, over every frame.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

PEAK = 1.0
SSIM_WINDOW = 8
# below this magnitude MSE the reconstruction is exact up to FFT round-off
EXACT_MSE = 1e-24


def _pair(x, xhat):
    a = np.asarray(x)
    b = np.asarray(xhat)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(x, xhat) -> float:
    """Mean of ``|x_i - xhat_i|^2`` over all entries (complex-valued)."""
    a, b = _pair(x, xhat)
    d = (a - b).ravel()
    return float(np.vdot(d, d).real) / d.size


def magnitude_mse(x, xhat) -> float:
    a, b = _pair(x, xhat)
    d = np.abs(a) - np.abs(b)
    return float(np.mean(d * d))


def psnr(x, xhat, peak: float = PEAK) -> float:
    """Magnitude PSNR in dB; returns ``math.inf`` for an exact reconstruction."""
    err = magnitude_mse(x, xhat)
    if err <= EXACT_MSE:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)


def ssim(x, xhat, peak: float = PEAK, win: int = SSIM_WINDOW) -> float:
    a, b = _pair(x, xhat)
    if a.ndim == 2:
        a, b = a[None], b[None]
    if a.shape[-1] < win or a.shape[-2] < win:
        raise ValueError(f"frame {a.shape[-2:]} smaller than the {win}x{win} window")
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    ma, mb = np.abs(a), np.abs(b)
    vals = [kernels.ssim_mean_2d(ma[t], mb[t], win, c1, c2) for t in range(a.shape[0])]
    return float(np.mean(vals))


def neg_mse(x, xhat) -> float:
    return -mse(x, xhat)


_METRICS = {"psnr": psnr, "ssim": ssim, "negmse": neg_mse}


@dataclass(frozen=True)
class MetricSpec:
    id: str
    peak: float = PEAK

    def __post_init__(self):
        ident = self.id.lower()
        if ident not in _METRICS:
            raise ValueError(f"unknown metric {self.id!r}; expected one of {sorted(_METRICS)}")
        object.__setattr__(self, "id", ident)

    def __call__(self, x, xhat) -> float:
        if self.id == "negmse":
            return neg_mse(x, xhat)
        return _METRICS[self.id](x, xhat, peak=self.peak)


def get_metric(ident) -> MetricSpec:
    if isinstance(ident, MetricSpec):
        return ident
    return MetricSpec(ident)


METRIC_IDS = tuple(sorted(_METRICS))
