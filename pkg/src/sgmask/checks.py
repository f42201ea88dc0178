"""Built-in self-checks run by ``sgmask check``.

Each check returns ``(passed, detail)``; detail text is deterministic so the
report can be diffed across runs.
"""
from __future__ import annotations

import itertools

import numpy as np

from . import transform
from .accounting import predict_calls
from .baselines import prop_check
from .core import DesignConfig, Line, Mask, SamplingDistribution, make_rng
from .decoders import Decoder, DecoderSpec
from .maskdesign import design_mask, evaluate_mask, frame_balance, verify_nestedness
from .phantom import phantom_suite

TOL = 1e-10


def _random_volume(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _random_mask(rng, N, T):
    lines = [Line(t, y) for t in range(T) for y in range(N) if rng.random() < 0.4]
    return Mask(lines, N, T)


def check_parseval(instances=20, seed=0):
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(instances):
        x = _random_volume(rng, (3, 8, 8))
        nx = np.linalg.norm(x)
        for op in (transform.forward_fft, transform.temporal_fft):
            worst = max(worst, abs(np.linalg.norm(op(x)) - nx) / nx)
    return worst <= TOL, f"max relative energy error {worst:.1e}"


def check_adjoint(instances=20, seed=1):
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(instances):
        x = _random_volume(rng, (3, 8, 8))
        mask = _random_mask(rng, 8, 3)
        b = transform.sample(x, mask)
        yv = _random_volume(rng, b.values.shape)
        lhs = np.vdot(yv, b.values)
        rhs = np.vdot(transform.adjoint_sample(transform.Measurements(mask, yv)), x)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-300))
    return worst <= TOL, f"max relative adjoint mismatch {worst:.1e}"


def check_prop():
    train = phantom_suite(2, N=4, T=2, seed=7)
    N, T = 4, 2
    zf = Decoder(DecoderSpec("zf"))
    rep = prop_check(SamplingDistribution.uniform(N, T), 2, 10_000, train, zf, "psnr", seed=3)
    ok = rep.ok and rep.n_masks == 28
    return ok, (
        f"E_f[eta]={rep.mc_mean:.6f} (se {rep.mc_stderr:.2e}) <= max={rep.brute_max:.6f}; "
        f"degenerate attains max: {rep.degenerate_attains_max}"
    )


def check_greedy_oracle():
    vols = phantom_suite(2, N=8, T=2, seed=11)
    zf = Decoder(DecoderSpec("zf"))
    cfg = DesignConfig("G", "v1", n=1, k=1, l=1)
    mask, _ = design_mask(cfg, vols, zf, "psnr")
    best, best_val = None, None
    for t, y in itertools.product(range(2), range(8)):
        v = evaluate_mask(Mask([(t, y)], 8, 2), vols, zf, "psnr").mean
        if best is None or v > best_val:
            best, best_val = Line(t, y), v
    ok = mask.lines == (best,)
    return ok, f"greedy picked {tuple(mask.lines[0])}, exhaustive argmax {tuple(best)}"


def check_nested_and_calls():
    vols = phantom_suite(3, N=8, T=2, seed=5)
    zf = Decoder(DecoderSpec("zf"))
    problems = []
    for variant, mode in (("G", "v1"), ("SG", "v1"), ("SG", "v2")):
        cfg = DesignConfig(variant, mode, n=7, k=3, l=2, seed=9)
        mask, trace = design_mask(cfg, vols, zf, "psnr")
        if not verify_nestedness(mask, trace):
            problems.append(f"{cfg.label} not nested")
        want = predict_calls(variant, mode, (8, 2), 3, 3, 2, 7)
        if trace.decoder_call_count != want:
            problems.append(f"{cfg.label} calls {trace.decoder_call_count} != {want}")
        if variant == "SG" and frame_balance(mask) > 1:
            problems.append(f"{cfg.label} frame balance {frame_balance(mask)}")
    return not problems, "; ".join(problems) or "G-v1, SG-v1, SG-v2 nested; call counts exact"


CHECKS = (
    ("Parseval", check_parseval),
    ("adjoint", check_adjoint),
    ("pmf-bound", check_prop),
    ("greedy-oracle", check_greedy_oracle),
    ("nestedness+calls", check_nested_and_calls),
)


def run_checks():
    results = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # report, do not abort the suite
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
