import os
import subprocess
import sys

import numpy as np
import pytest

from sgmask import _pykernels, kernels

from conftest import random_volume

BACKENDS = kernels.available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    prev = kernels.BACKEND
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(prev)


def naive_soft(z, thr):
    out = np.zeros_like(z)
    for i, v in enumerate(z.ravel()):
        a = abs(v)
        if a > thr:
            out.ravel()[i] = v * (a - thr) / a
    return out


def test_compiled_backend_is_built():
    # the build in this repo always compiles the extension
    assert "cython" in BACKENDS


def test_soft_threshold(backend, rng):
    z = random_volume(rng, (2, 4, 4))
    want = naive_soft(z, 0.7)
    got = kernels.soft_threshold_(z.copy(), 0.7)
    np.testing.assert_allclose(got, want, rtol=1e-14, atol=1e-15)


def test_soft_threshold_zero_and_large(backend):
    z = np.array([0j, 1 + 0j, -3j], dtype=complex)
    np.testing.assert_array_equal(kernels.soft_threshold_(z.copy(), 0.0), z)
    assert np.all(kernels.soft_threshold_(z.copy(), 5.0) == 0)


def test_l1(backend, rng):
    z = random_volume(rng, (3, 5, 5))
    assert kernels.l1_norm(z) == pytest.approx(np.abs(z).sum(), rel=1e-13)


def test_prox_step(backend, rng):
    c, g = random_volume(rng, (2, 4, 4)), random_volume(rng, (2, 4, 4))
    want = naive_soft(c - 0.5 * g, 0.3)
    got = c.copy()
    l1 = kernels.prox_step_(got, g, 0.5, 0.3)
    np.testing.assert_allclose(got, want, rtol=1e-13, atol=1e-15)
    assert l1 == pytest.approx(np.abs(want).sum(), rel=1e-13)


def test_masked_residual(backend, rng):
    k, y = random_volume(rng, (3, 4, 4)), random_volume(rng, (3, 4, 4))
    rm = (rng.random((3, 4)) < 0.5).astype(np.uint8)
    out = np.empty_like(k)
    half = kernels.masked_residual(k, rm, y, out)
    want = rm[:, :, None] * k - y
    np.testing.assert_allclose(out, want, atol=1e-15)
    assert half == pytest.approx(0.5 * np.linalg.norm(want) ** 2, rel=1e-13)


def test_ssim_identical_is_one(backend, rng):
    a = rng.random((12, 12))
    assert kernels.ssim_mean_2d(a, a, 8, 1e-4, 9e-4) == pytest.approx(1.0, abs=1e-12)


def test_backends_agree(rng):
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    a, b = rng.random((16, 16)), rng.random((16, 16))
    c, g = random_volume(rng, (2, 8, 8)), random_volume(rng, (2, 8, 8))
    res = {}
    for name in BACKENDS:
        kernels.use_backend(name)
        cc = c.copy()
        l1 = kernels.prox_step_(cc, g, 1.0, 0.2)
        res[name] = (cc, l1, kernels.ssim_mean_2d(a, b, 8, 1e-4, 9e-4))
    kernels.use_backend(BACKENDS[-1])
    (c1, l1a, s1), (c2, l1b, s2) = res["python"], res["cython"]
    np.testing.assert_allclose(c1, c2, rtol=1e-14, atol=1e-15)
    assert l1a == pytest.approx(l1b, rel=1e-14)
    assert s1 == pytest.approx(s2, rel=1e-12)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


def test_env_var_forces_fallback():
    code = "import sgmask.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, SGMASK_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_pykernels_standalone(rng):
    z = random_volume(rng, (2, 3, 3))
    assert _pykernels.l1_norm(z) == pytest.approx(np.abs(z).sum())
