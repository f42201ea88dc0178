"""Greedy (G) and stochastic greedy (SG) line selection.

Each iteration scores a set of candidate lines by the mean metric of the
reconstructions obtained after adding that line, over a batch of training
volumes, and appends the best one:

* G: candidates are all unacquired lines.
* SG: candidates are `k` unacquired lines of the current frame, drawn
  uniformly; the frame advances cyclically after each selection.
* v1: the batch is the whole training set. v2: `l` volumes drawn per
  iteration.

Ties go to the lexicographically smallest (frame, row). The returned mask
is ordered by acquisition, so every prefix is the mask held at that
iteration.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (
    DesignConfig,
    Line,
    Mask,
    MetricReport,
    as_volume,
    make_rng,
    mean_metric,
    partial_fisher_yates,
    sampling_rate,
)
from .decoders import Decoder, get_decoder
from .metrics import get_metric
from .transform import forward_fft


@dataclass
class IterationRecord:
    iteration: int
    frame: int | None
    candidates: list
    scores: list
    selected: Line
    calls: int  # cumulative
    batch: list
    shrunk: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "iteration": self.iteration,
                "frame": self.frame,
                "candidates": [list(c) for c in self.candidates],
                "scores": [_json_float(s) for s in self.scores],
                "selected": list(self.selected),
                "calls": self.calls,
                "batch": self.batch,
                "shrunk": self.shrunk,
            },
            separators=(",", ":"),
        )


def _json_float(v):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


@dataclass
class DesignTrace:
    dims: tuple
    warm_start: tuple = ()
    records: list = field(default_factory=list)

    @property
    def decoder_call_count(self) -> int:
        return self.records[-1].calls if self.records else 0

    def held_mask(self, i: int) -> Mask:
        """Mask held after `i` greedy selections (warm start included)."""
        N, T = self.dims
        return Mask(list(self.warm_start) + [r.selected for r in self.records[:i]], N, T)

    def dumps(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())


def _argmax_line(candidates, scores):
    best_i = None
    for i in sorted(range(len(candidates)), key=lambda j: candidates[j]):
        s = scores[i]
        if math.isnan(s):
            s = -math.inf
        if best_i is None or s > best_s:
            best_i, best_s = i, s
    return candidates[best_i]


class _Scorer:
    """Mean metric over a training batch for the mask ``held + line``."""

    def __init__(self, volumes, kspaces, decoder: Decoder, metric):
        self.volumes = volumes
        self.kspaces = kspaces
        self.decoder = decoder
        self.metric = metric

    def __call__(self, rowmask, line, batch):
        rm = rowmask.copy()
        rm[line.t, line.y] = 1
        vals = [
            self.metric(self.volumes[i], self.decoder.reconstruct_truth(self.kspaces[i], rm))
            for i in batch
        ]
        return mean_metric(vals)


def design_mask(cfg: DesignConfig, training, decoder=None, metric=None, threads: int = 1, callback=None):
    """Run the greedy design loop.

    Parameters
    ----------
    cfg : DesignConfig
        Variant, training mode, budget and batch sizes, seed.
    training : sequence of (T, N, N) complex volumes
    decoder, metric : optional
        Override ``cfg.decoder`` / ``cfg.metric`` (objects or registry ids).
    threads : int
        Workers for candidate evaluation. The result does not depend on it.
    callback : callable, optional
        Called with each `IterationRecord` as it is produced.

    Returns
    -------
    (Mask, DesignTrace)
    """
    volumes = [as_volume(v) for v in training]
    if not volumes:
        raise ValueError("need at least one training volume")
    shape = volumes[0].shape
    if any(v.shape != shape for v in volumes):
        raise ValueError("training volumes must share dims")
    T, N, _ = shape
    m = len(volumes)
    cfg.validate(N, T, m)
    decoder = decoder if decoder is not None else cfg.decoder
    if isinstance(decoder, str):
        decoder = get_decoder(decoder)
    metric = get_metric(metric if metric is not None else cfg.metric)

    kspaces = [forward_fft(v) for v in volumes]
    scorer = _Scorer(volumes, kspaces, decoder, metric)
    rng = make_rng(cfg.seed)

    rowmask = np.zeros((T, N), dtype=np.uint8)
    for ln in cfg.warm_start:
        if not (0 <= ln.t < T and 0 <= ln.y < N):
            raise ValueError(f"warm-start line {tuple(ln)} out of range")
        rowmask[ln.t, ln.y] = 1
    trace = DesignTrace((N, T), tuple(cfg.warm_start))
    selected = list(cfg.warm_start)
    Mask(selected, N, T)  # rejects duplicate warm-start lines

    pool = ThreadPoolExecutor(threads) if threads and threads > 1 else None
    frame = 0
    calls = 0
    try:
        for it in range(cfg.n - len(selected)):
            shrunk = False
            if cfg.variant == "G":
                cur_frame = None
                candidates = [Line(t, y) for t in range(T) for y in range(N) if not rowmask[t, y]]
            else:
                while rowmask[frame].all():
                    frame = (frame + 1) % T
                cur_frame = frame
                avail = [Line(frame, y) for y in range(N) if not rowmask[frame, y]]
                if cfg.k >= len(avail):
                    shrunk = cfg.k > len(avail)
                    candidates = avail
                else:
                    candidates = sorted(partial_fisher_yates(rng, avail, cfg.k))
            if cfg.training_mode == "v1":
                batch = list(range(m))
            else:
                batch = sorted(partial_fisher_yates(rng, range(m), cfg.l))

            if pool is None:
                scores = [scorer(rowmask, c, batch) for c in candidates]
            else:
                scores = list(pool.map(lambda c: scorer(rowmask, c, batch), candidates))
            calls += len(candidates) * len(batch)

            best = _argmax_line(candidates, scores)
            rowmask[best.t, best.y] = 1
            selected.append(best)
            rec = IterationRecord(it, cur_frame, candidates, scores, best, calls, batch, shrunk)
            trace.records.append(rec)
            if callback is not None:
                callback(rec)
            if cfg.variant == "SG":
                frame = (cur_frame + 1) % T
    finally:
        if pool is not None:
            pool.shutdown()
    return Mask(selected, N, T), trace


@dataclass(frozen=True)
class SpeedupEstimate:
    ratio: Fraction
    g_v1_calls: int
    variant_calls: int


def speedup_estimate(cfg: DesignConfig, m: int, dims) -> SpeedupEstimate:
    """Theoretical G-v1 / SG-v2 cost ratio ``(m / l) * (N T / k)`` and exact call counts."""
    from .accounting import predict_calls

    N, T = dims
    l = cfg.l if cfg.training_mode == "v2" else m  # noqa: E741
    k = cfg.k if cfg.variant == "SG" else N * T
    ratio = Fraction(m, l) * Fraction(N * T, k)
    return SpeedupEstimate(
        ratio,
        predict_calls("G", "v1", dims, m, cfg.k, cfg.l, cfg.n),
        predict_calls(cfg.variant, cfg.training_mode, dims, m, cfg.k, cfg.l, cfg.n),
    )


def verify_nestedness(mask: Mask, trace: DesignTrace) -> bool:
    """True iff every prefix of `mask` is the mask the trace held at that step."""
    base = len(trace.warm_start)
    if len(mask) != base + len(trace.records) or mask.dims != tuple(trace.dims):
        return False
    if mask.prefix(base) != trace.held_mask(0):
        return False
    held = list(trace.warm_start)
    for i, rec in enumerate(trace.records):
        held.append(rec.selected)
        if list(mask.prefix(base + i + 1).lines) != held:
            return False
    return True


def frame_balance(mask: Mask) -> int:
    counts = mask.counts_per_frame()
    return int(counts.max() - counts.min())


def evaluate_mask(mask: Mask, volumes, decoder, metric, mask_id: str = "") -> MetricReport:
    """Reconstruct every volume from its samples on `mask` and score it."""
    if isinstance(decoder, str):
        decoder = get_decoder(decoder)
    metric = get_metric(metric)
    rowmask = mask.row_mask()
    values = []
    for v in volumes:
        arr = as_volume(v)
        if (arr.shape[1], arr.shape[0]) != mask.dims:
            raise ValueError(f"mask dims {mask.dims} do not match volume dims {(arr.shape[1], arr.shape[0])}")
        values.append(metric(arr, decoder.reconstruct_truth(forward_fft(arr), rowmask)))
    return MetricReport(
        mask_id=mask_id,
        sampling_rate=sampling_rate(mask),
        values=values,
        decoder=decoder.id,
        metric=metric.id,
        decoder_call_count=len(values),
    )
