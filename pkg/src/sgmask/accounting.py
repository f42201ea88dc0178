"""Decoder-call bookkeeping and the batch-size study."""
from __future__ import annotations

import csv
import io
from dataclasses import replace

from .core import DesignConfig, as_volume, lines_for_rate
from .maskdesign import design_mask, evaluate_mask

BATCH_HEADER = ("k", "seed", "rate", "metric", "value", "calls")


def candidate_counts(variant: str, dims, k: int, n: int) -> list:
    """Candidates scored at each of the `n` iterations, starting from an empty mask."""
    N, T = dims
    if n > N * T:
        raise ValueError(f"budget n={n} exceeds N*T={N * T}")
    if variant == "G":
        return [N * T - i for i in range(n)]
    if variant == "SG":
        # iteration i visits frame i mod T, which already holds i // T lines
        return [min(k, N - i // T) for i in range(n)]
    raise ValueError(f"unknown variant {variant!r}")


def predict_calls(variant: str, training_mode: str, dims, m: int, k: int, l: int, n: int) -> int:  # noqa: E741
    """Exact number of decoder invocations of one design run."""
    batch = m if training_mode == "v1" else l
    return batch * sum(candidate_counts(variant, dims, k, n))


def fmt6(value: float) -> str:
    return format(float(value), ".6g")


def batch_sweep(template: DesignConfig, k_values, seeds, train, test, decoder, metric,
                rates=(0.25,), threads: int = 1):
    """Run SG design for every (k, seed) and score the test set at each rate.

    One nested design run to the largest rate serves all smaller rates.
    Returns rows ``(k, seed, rate, metric, value, calls)`` sorted by
    (k, seed, rate), where `calls` is the design-time decoder count up to
    that rate.
    """
    T, N, _ = as_volume(train[0]).shape
    rates = sorted(set(float(r) for r in rates))
    budgets = [lines_for_rate(r, N, T) for r in rates]
    rows = []
    for k in sorted(set(int(k) for k in k_values)):
        for seed in sorted(set(int(s) for s in seeds)):
            cfg = replace(template, variant="SG", k=k, seed=seed, n=max(budgets))
            mask, trace = design_mask(cfg, train, decoder, metric, threads=threads)
            for rate, n in zip(rates, budgets):
                report = evaluate_mask(mask.prefix(n), test, decoder, metric)
                done = n - len(cfg.warm_start)
                calls = trace.records[done - 1].calls if done > 0 else 0
                rows.append((k, seed, rate, report.metric, report.mean, calls))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def rows_to_csv(rows, header=BATCH_HEADER) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for k, seed, rate, metric, value, calls in rows:
        writer.writerow([k, seed, fmt6(rate), metric, fmt6(value), calls])
    return buf.getvalue()
