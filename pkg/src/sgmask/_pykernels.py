"""Pure-numpy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is unavailable, or when
``SGMASK_PURE_PYTHON=1`` is set. Signatures mirror ``_ckernels.pyx``.
"""
import numpy as np


def soft_threshold_(coef, thresh):
    """Shrink complex magnitudes toward zero by `thresh`, in place, keeping phase."""
    if thresh <= 0.0:
        return coef
    mag = np.abs(coef)
    safe = np.where(mag > 0.0, mag, 1.0)
    scale = np.maximum(1.0 - thresh / safe, 0.0)
    coef *= scale
    return coef


def l1_norm(coef):
    return float(np.abs(coef).sum())


def masked_residual(kspace, rowmask, y, out):
    """Write ``rowmask * kspace - y`` into `out` and return half its squared norm.

    `kspace`, `y`, `out` have shape (T, N, N); `rowmask` is (T, N) uint8.
    """
    np.multiply(kspace, rowmask[:, :, None], out=out)
    out -= y
    return 0.5 * float(np.vdot(out, out).real)


def _window_sums(img, win):
    integral = np.zeros((img.shape[0] + 1, img.shape[1] + 1))
    integral[1:, 1:] = img.cumsum(axis=0).cumsum(axis=1)
    return (
        integral[win:, win:]
        - integral[:-win, win:]
        - integral[win:, :-win]
        + integral[:-win, :-win]
    )


def ssim_mean_2d(a, b, win, c1, c2):
    """Mean SSIM over all `win` x `win` windows (stride 1) of two real images."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    area = float(win * win)
    mu_a = _window_sums(a, win) / area
    mu_b = _window_sums(b, win) / area
    var_a = _window_sums(a * a, win) / area - mu_a * mu_a
    var_b = _window_sums(b * b, win) / area - mu_b * mu_b
    cov = _window_sums(a * b, win) / area - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def prox_step_(coef, grad, step, thresh):
    """``coef <- soft(coef - step * grad, thresh)`` in place; returns l1 of the result."""
    coef -= step * grad
    soft_threshold_(coef, thresh)
    return l1_norm(coef)
