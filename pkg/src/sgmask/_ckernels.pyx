# cython: language_level=3
"""Compiled versions of the hot kernels in ``_pykernels``.

Complex arrays arrive as interleaved float64 views (re, im, re, im, ...).
"""
import numpy as np

from libc.math cimport sqrt


def soft_threshold_(double[::1] z not None, double thresh):
    cdef Py_ssize_t i, n = z.shape[0] // 2
    cdef double re, im, m, s
    if thresh <= 0.0:
        return
    with nogil:
        for i in range(n):
            re = z[2 * i]
            im = z[2 * i + 1]
            m = sqrt(re * re + im * im)
            if m > thresh:
                s = 1.0 - thresh / m
            else:
                s = 0.0
            z[2 * i] = re * s
            z[2 * i + 1] = im * s


def l1_norm(double[::1] z not None):
    cdef Py_ssize_t i, n = z.shape[0] // 2
    cdef double acc = 0.0
    with nogil:
        for i in range(n):
            acc += sqrt(z[2 * i] * z[2 * i] + z[2 * i + 1] * z[2 * i + 1])
    return acc


def prox_step_(double[::1] u not None, double[::1] g not None, double step, double thresh):
    cdef Py_ssize_t i, n = u.shape[0] // 2
    cdef double re, im, m, s, acc = 0.0
    with nogil:
        for i in range(n):
            re = u[2 * i] - step * g[2 * i]
            im = u[2 * i + 1] - step * g[2 * i + 1]
            m = sqrt(re * re + im * im)
            if thresh > 0.0:
                if m > thresh:
                    s = 1.0 - thresh / m
                    re = re * s
                    im = im * s
                    m = sqrt(re * re + im * im)
                else:
                    re = 0.0
                    im = 0.0
                    m = 0.0
            u[2 * i] = re
            u[2 * i + 1] = im
            acc += m
    return acc


def masked_residual(double[:, :, ::1] kspace not None,
                    unsigned char[:, ::1] rowmask not None,
                    double[:, :, ::1] y not None,
                    double[:, :, ::1] out not None):
    """Arrays are (T, N, 2N) float views of complex (T, N, N) volumes."""
    cdef Py_ssize_t t, r, c
    cdef Py_ssize_t nt = kspace.shape[0], nr = kspace.shape[1], nc = kspace.shape[2]
    cdef double d, acc = 0.0
    with nogil:
        for t in range(nt):
            for r in range(nr):
                if rowmask[t, r]:
                    for c in range(nc):
                        d = kspace[t, r, c] - y[t, r, c]
                        out[t, r, c] = d
                        acc += d * d
                else:
                    for c in range(nc):
                        d = y[t, r, c]
                        out[t, r, c] = -d
                        acc += d * d
    return 0.5 * acc


def ssim_mean_2d(a, b, int win, double c1, double c2):
    cdef double[:, ::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t h = av.shape[0], w = av.shape[1]
    cdef Py_ssize_t oh = h - win + 1, ow = w - win + 1
    cdef Py_ssize_t i, j, u, v
    cdef double sa, sb, saa, sbb, sab, x, z
    cdef double area = <double>(win * win)
    cdef double mu_a, mu_b, var_a, var_b, cov, total = 0.0
    with nogil:
        for i in range(oh):
            for j in range(ow):
                sa = 0.0
                sb = 0.0
                saa = 0.0
                sbb = 0.0
                sab = 0.0
                for u in range(i, i + win):
                    for v in range(j, j + win):
                        x = av[u, v]
                        z = bv[u, v]
                        sa += x
                        sb += z
                        saa += x * x
                        sbb += z * z
                        sab += x * z
                mu_a = sa / area
                mu_b = sb / area
                var_a = saa / area - mu_a * mu_a
                var_b = sbb / area - mu_b * mu_b
                cov = sab / area - mu_a * mu_b
                total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / (
                    (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2))
    return total / (oh * ow)
