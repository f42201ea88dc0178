import math
from dataclasses import replace

import numpy as np
import pytest

from sgmask.core import DegenerateImageError
from sgmask.phantom import (
    MAGIC,
    add_image_noise,
    default_spec,
    generate_phantom,
    phantom_suite,
    read_sidecar,
    sidecar_path,
    read_volume,
    spec_to_meta,
    split_dataset,
    suite_specs,
    temporal_ac_fraction,
    write_volume,
)
from sgmask.transform import temporal_fft


def test_default_unit_peak_and_dims():
    img = generate_phantom(default_spec())
    assert img.data.shape == (8, 32, 32)
    assert np.max(np.abs(img.data)) == pytest.approx(1.0, abs=1e-15)
    assert np.max(np.abs(img.data)) <= 1.0


def test_deterministic():
    a = generate_phantom(default_spec(seed=4))
    b = generate_phantom(default_spec(seed=4))
    assert a.data.tobytes() == b.data.tobytes()


def test_zero_shapes_degenerate():
    spec = replace(default_spec(8, 2), ellipses=(), disk_radius=0.0)
    with pytest.raises(DegenerateImageError):
        generate_phantom(spec)


def test_static_spec():
    img = generate_phantom(replace(default_spec(16, 4), angular_step=0.0))
    for t in range(1, 4):
        np.testing.assert_array_equal(img.data[t], img.data[0])
    xf = temporal_fft(img.data)
    assert np.max(np.abs(xf[1:])) < 1e-12
    assert temporal_ac_fraction(img) < 1e-24


def test_motion_gives_temporal_energy():
    assert temporal_ac_fraction(generate_phantom(default_spec(32, 8))) > 0.01


def test_shapes_inside_frame():
    with pytest.raises(ValueError, match="leaves"):
        generate_phantom(replace(default_spec(16, 4), orbit_radius=20.0))


def test_suite_differs():
    vols = phantom_suite(3, N=16, T=4, seed=0)
    assert not np.array_equal(vols[0].data, vols[1].data)
    assert len(suite_specs(3, 16, 4)) == 3


class TestNoise:
    def test_zero_sigma(self):
        img = generate_phantom(default_spec(8, 2))
        np.testing.assert_array_equal(add_image_noise(img, 0.0, 1).data, img.data)

    def test_std(self):
        img = generate_phantom(default_spec(32, 8))
        noisy = add_image_noise(img, 0.05, 3)
        d = noisy.data - img.data
        comps = np.concatenate([d.real.ravel(), d.imag.ravel()])
        assert comps.size >= 8192
        assert 0.045 <= comps.std(ddof=1) <= 0.055

    def test_seeds(self):
        img = generate_phantom(default_spec(32, 8))
        a = add_image_noise(img, 0.05, 1).data - img.data
        b = add_image_noise(img, 0.05, 2).data - img.data
        assert not np.array_equal(a, b)
        ea, eb = np.vdot(a, a).real, np.vdot(b, b).real
        assert abs(ea - eb) / ea < 0.02

    def test_negative_sigma(self):
        with pytest.raises(ValueError):
            add_image_noise(generate_phantom(default_spec(8, 2)), -0.1, 0)


class TestSplit:
    def test_seven(self):
        train, test = split_dataset(range(7), 3, 4)
        assert train == [0, 1, 2] and test == [3, 4, 5, 6]

    def test_trivial(self):
        assert split_dataset("ab", 1, 1) == (["a"], ["b"])

    def test_too_many(self):
        with pytest.raises(ValueError):
            split_dataset(range(3), 3, 1)


class TestVolumeFile:
    def test_round_trip(self, tmp_path):
        spec = default_spec(16, 4, seed=2)
        img = generate_phantom(spec)
        path = write_volume(tmp_path / "v.vol", img, spec_to_meta(spec))
        raw = path.read_bytes()
        assert raw[:12] == MAGIC
        assert len(raw) == 16 + 12 + 16 * 16 * 4 * 16
        back = read_volume(path)
        assert back.data.tobytes() == img.data.tobytes()
        meta = read_sidecar(sidecar_path(path))
        assert int(meta["N"]) == 16 and int(meta["T"]) == 4

    def test_same_bytes(self, tmp_path):
        spec = default_spec(8, 2)
        write_volume(tmp_path / "a.vol", generate_phantom(spec), spec_to_meta(spec))
        write_volume(tmp_path / "b.vol", generate_phantom(spec), spec_to_meta(spec))
        assert (tmp_path / "a.vol").read_bytes() == (tmp_path / "b.vol").read_bytes()
        assert (tmp_path / "a.vol.meta").read_text() == (tmp_path / "b.vol.meta").read_text()

    def test_bad_magic(self, tmp_path):
        (tmp_path / "x.vol").write_bytes(b"NOTAVOLUME" + bytes(40))
        with pytest.raises(ValueError):
            read_volume(tmp_path / "x.vol")

    def test_truncated(self, tmp_path):
        img = generate_phantom(default_spec(8, 2))
        path = write_volume(tmp_path / "v.vol", img)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValueError):
            read_volume(path)


def test_phase_preserved_through_normalize():
    img = generate_phantom(default_spec(16, 2))
    assert np.any(np.abs(img.data.imag) > 0)
    assert math.isfinite(img.scale) and img.scale > 0
