import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgmask.core import (
    DegenerateImageError,
    DesignConfig,
    DynamicImage,
    Line,
    Mask,
    MetricReport,
    SamplingDistribution,
    lines_for_rate,
    make_rng,
    mean_metric,
    normalize,
    partial_fisher_yates,
    read_mask,
    sampling_rate,
    write_mask,
)


class TestDynamicImage:
    def test_read_only_copy(self):
        src = np.ones((2, 4, 4), dtype=np.complex128)
        img = DynamicImage(src)
        src[0, 0, 0] = 5
        assert img.data[0, 0, 0] == 1
        with pytest.raises(ValueError):
            img.data[0, 0, 0] = 2

    @pytest.mark.parametrize("shape", [(4, 4), (2, 4, 3), (0, 4, 4)])
    def test_bad_shape(self, shape):
        with pytest.raises(ValueError):
            DynamicImage(np.zeros(shape))

    def test_nonfinite(self):
        a = np.zeros((1, 2, 2))
        a[0, 1, 1] = np.nan
        with pytest.raises(ValueError):
            DynamicImage(a)

    def test_dims(self):
        img = DynamicImage(np.zeros((3, 5, 5)))
        assert (img.N, img.T, img.dims) == (5, 3, (5, 3))


class TestNormalize:
    def test_halves_peak_two(self):
        x = np.zeros((2, 4, 4), dtype=complex)
        x[1, 2, 3] = 2.0
        x[0, 0, 0] = 0.5 - 0.5j
        out = normalize(x)
        np.testing.assert_array_equal(out.data, x / 2)
        assert out.scale == 0.5

    def test_unit_peak_identity(self):
        x = make_rng(0).random((2, 4, 4)) * 0.9 + 0j
        x[0, 0, 0] = 1.0
        out = normalize(x)
        np.testing.assert_array_equal(out.data, x)

    def test_idempotent(self, rng):
        x = rng.standard_normal((3, 6, 6)) + 1j * rng.standard_normal((3, 6, 6))
        once = normalize(x)
        twice = normalize(once)
        np.testing.assert_array_equal(once.data, twice.data)
        assert np.max(np.abs(once.data)) <= 1.0

    def test_zero_rejected(self):
        with pytest.raises(DegenerateImageError, match="degenerate"):
            normalize(np.zeros((1, 3, 3)))

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1e-6, 1e6), st.integers(0, 2**32 - 1))
    def test_peak_never_above_one(self, amp, seed):
        r = make_rng(seed)
        x = amp * (r.standard_normal((2, 4, 4)) + 1j * r.standard_normal((2, 4, 4)))
        peak = np.max(np.abs(normalize(x).data))
        assert 1 - 1e-12 <= peak <= 1.0


class TestMask:
    def test_ordering_and_prefix(self):
        m = Mask([(1, 2), (0, 0), (1, 0)], 4, 2)
        assert m.lines == (Line(1, 2), Line(0, 0), Line(1, 0))
        assert m.prefix(2).lines == m.lines[:2]
        assert m.prefix(0) == Mask.empty(4, 2)

    def test_duplicates_and_range(self):
        with pytest.raises(ValueError, match="duplicate"):
            Mask([(0, 1), (0, 1)], 4, 2)
        with pytest.raises(ValueError):
            Mask([(2, 0)], 4, 2)
        with pytest.raises(ValueError):
            Mask([(0, 4)], 4, 2)

    def test_full(self):
        m = Mask.full(3, 2)
        assert len(m) == 6 and m.n_samples == 18
        assert np.all(m.row_mask() == 1)
        assert m.counts_per_frame().tolist() == [3, 3]

    def test_support_vs_order(self):
        a = Mask([(0, 1), (1, 1)], 2, 2)
        b = Mask([(1, 1), (0, 1)], 2, 2)
        assert a != b and a.same_support(b)
        assert Line(0, 1) in a and (1, 0) not in a

    def test_extend(self):
        a = Mask([(0, 1)], 4, 2).extend([(1, 3)])
        assert a.lines == (Line(0, 1), Line(1, 3))

    def test_file_round_trip(self, tmp_path):
        m = Mask([(1, 3), (0, 0), (1, 1)], 4, 2)
        write_mask(tmp_path / "m.txt", m)
        assert (tmp_path / "m.txt").read_text() == "4 2 3\n1 3\n0 0\n1 1\n"
        assert read_mask(tmp_path / "m.txt") == m

    def test_read_bad_count(self, tmp_path):
        (tmp_path / "m.txt").write_text("4 2 3\n0 0\n")
        with pytest.raises(ValueError, match="header says 3"):
            read_mask(tmp_path / "m.txt")


class TestRates:
    def test_sampling_rate(self):
        assert sampling_rate(Mask.empty(5, 3)) == 0.0
        assert sampling_rate(Mask.full(5, 3)) == 1.0
        m = Mask([(t, y) for t in range(2) for y in range(13)], 152, 17)
        assert sampling_rate(m) == 26 / 2584
        assert round(sampling_rate(m), 4) == 0.0101

    def test_lines_for_rate(self):
        assert lines_for_rate(0.1, 32, 8) == 26  # 25.6
        assert lines_for_rate(0.25, 32, 8) == 64
        assert lines_for_rate(1.0, 32, 8) == 256
        assert lines_for_rate(0.5, 3, 1) == 2  # half rounds up
        with pytest.raises(ValueError):
            lines_for_rate(1.5, 4, 4)


class TestSamplingDistribution:
    def test_uniform(self):
        f = SamplingDistribution.uniform(4, 2)
        assert f.dims == (4, 2)
        assert f[(1, 3)] == 1 / 8

    def test_degenerate(self):
        f = SamplingDistribution.degenerate([(0, 1), (1, 2)], 4, 2)
        assert f[(0, 1)] == 0.5 and f[(0, 0)] == 0.0

    @pytest.mark.parametrize("w", [np.zeros((2, 2)), -np.ones((2, 2)), np.full((2, 2), np.inf), np.ones(4)])
    def test_rejects(self, w):
        with pytest.raises(ValueError):
            SamplingDistribution(w)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0, 1))
    def test_simplex_after_mix(self, seed, alpha):
        r = make_rng(seed)
        f = SamplingDistribution(r.random((3, 5)))
        g = SamplingDistribution(r.random((3, 5)) ** 4)
        h = f.mix(g, alpha)
        for d in (f, g, h):
            assert np.all(d.weights >= 0)
            assert math.isclose(math.fsum(d.weights.ravel()), 1.0, abs_tol=1e-12)


class TestDesignConfig:
    def test_defaults_and_label(self):
        cfg = DesignConfig("G", "v1", n=3)
        assert cfg.label == "G-v1"

    @pytest.mark.parametrize(
        "kw", [dict(variant="X"), dict(training_mode="v3"), dict(n=-1), dict(k=0), dict(l=0), dict(seed=-1)]
    )
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            DesignConfig(**kw)

    def test_validate(self):
        DesignConfig("SG", "v2", n=4, k=4, l=2).validate(4, 2, 2)
        with pytest.raises(ValueError, match="exceeds N\\*T"):
            DesignConfig(n=9).validate(4, 2, 1)
        with pytest.raises(ValueError, match="lines per frame"):
            DesignConfig(k=5).validate(4, 2, 1)
        with pytest.raises(ValueError, match="training set"):
            DesignConfig(l=3).validate(4, 2, 2)
        with pytest.raises(ValueError, match="warm start"):
            DesignConfig(n=1, warm_start=((0, 0), (1, 0))).validate(4, 2, 1)


class TestMeanMetric:
    def test_equal_values_exact(self):
        v = 23.171717171717
        assert mean_metric([v] * 7) == v

    def test_inf(self):
        assert mean_metric([math.inf, math.inf]) == math.inf
        assert mean_metric([math.inf, 1.0]) == math.inf
        assert math.isnan(mean_metric([]))

    def test_report(self):
        rep = MetricReport("m", 0.5, [1, 2, 3], "zf", "psnr", 3)
        assert rep.mean == 2.0 and rep.averaging == "per-volume"


class TestRng:
    def test_partial_fisher_yates(self):
        items = list(range(10))
        a = partial_fisher_yates(make_rng(5), items, 4)
        b = partial_fisher_yates(make_rng(5), items, 4)
        assert a == b and len(set(a)) == 4
        assert sorted(partial_fisher_yates(make_rng(5), items, 10)) == items
        with pytest.raises(ValueError):
            partial_fisher_yates(make_rng(0), items, 11)

    def test_uniform_marginals(self):
        r = make_rng(9)
        counts = np.zeros(6)
        for _ in range(6000):
            for i in partial_fisher_yates(r, range(6), 2):
                counts[i] += 1
        # each item is drawn with probability 1/3: expected 2000, sd ~37
        assert np.all(np.abs(counts - 2000) < 200)
