"""Variable-density baselines and sampling-distribution checks.

Two baselines tune a per-frame Gaussian density over phase-encode rows, with
`c` central rows always acquired:

* Coherence-VD picks the grid cell whose masks have the lowest mean PSF
  coherence.
* LB-VD picks the grid cell whose masks reconstruct the training set best.

`prop_check` compares the expected performance of masks drawn from a PMF
against the best fixed mask, enumerating all masks on a tiny problem.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import Line, Mask, SamplingDistribution, lines_for_rate, make_rng, mean_metric
from .decoders import get_decoder
from .maskdesign import evaluate_mask
from .metrics import get_metric

DEFAULT_WIDTHS = tuple(float(w) for w in np.linspace(0.05, 0.3, 5))
DEFAULT_CENTRAL = (2, 7, 13, 18)
DEFAULT_DRAWS = 20
# Full-size grid: 10 widths, 10 central-line counts.
FULL_WIDTHS = tuple(float(w) for w in np.linspace(0.05, 0.3, 10))
FULL_CENTRAL = tuple(int(round(c)) for c in np.linspace(2, 18, 10))


@dataclass(frozen=True)
class VDParams:
    width: float  # Gaussian std as a fraction of N
    central: int  # fully sampled low-frequency rows per frame
    rate: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("rate must lie in [0, 1]")
        if self.central < 0:
            raise ValueError("central must be >= 0")

    def feasible(self, dims) -> bool:
        N, T = dims
        return self.central <= N and self.central * T <= lines_for_rate(self.rate, N, T)


def make_grid(rate, widths=DEFAULT_WIDTHS, central=DEFAULT_CENTRAL):
    """Row-major grid: widths outer, central-line counts inner."""
    return [VDParams(float(w), int(c), float(rate)) for w in widths for c in central]


def centered_distance(N: int) -> np.ndarray:
    """Wrap-aware distance of each DFT-ordered row from DC."""
    y = np.arange(N)
    return np.minimum(y, N - y)


def central_rows(c: int, N: int) -> list:
    """The `c` rows nearest DC: a contiguous block in fftshifted order."""
    start = N // 2 - c // 2
    return sorted(((start + j) - N // 2) % N for j in range(c))


def central_lines(c: int, dims) -> list:
    N, T = dims
    rows = central_rows(c, N)
    return [Line(t, y) for t in range(T) for y in rows]


def gaussian_vd_pmf(params: VDParams, dims) -> SamplingDistribution:
    """Same Gaussian profile over rows in every frame, normalized over all lines.

    Central rows keep their Gaussian weight here; `draw_mask` includes them
    unconditionally through its `forced` argument.
    """
    N, T = dims
    d = centered_distance(N).astype(np.float64)
    sd = params.width * N
    profile = np.exp(-(d * d) / (2.0 * sd * sd))
    return SamplingDistribution(np.tile(profile, (T, 1)))


def draw_mask(f: SamplingDistribution, n: int, forced=(), seed: int = 0, rng=None) -> Mask:
    """Forced lines first, then successive weighted draws without replacement.

    The remaining lines are ordered by exponential keys ``log(U) / w``
    (Efraimidis-Spirakis); taking them largest-first has the same law as
    drawing one line at a time proportional to the remaining weights.
    Zero-weight lines come last, in uniformly random order, so ``n = N T``
    always yields the full mask.
    """
    N, T = f.dims
    forced = [Line(int(t), int(y)) for t, y in forced]
    if n > N * T:
        raise ValueError(f"n={n} exceeds N*T={N * T}")
    if n < len(forced):
        raise ValueError(f"n={n} is smaller than the {len(forced)} forced lines")
    rng = rng if rng is not None else make_rng(seed)
    w = f.weights.ravel()
    u = rng.random(w.size)
    tie = rng.random(w.size)
    with np.errstate(divide="ignore"):
        keys = np.where(w > 0, np.log1p(-u) / np.where(w > 0, w, 1.0), -np.inf)
    taken = np.zeros(w.size, dtype=bool)
    for t, y in forced:
        taken[t * N + y] = True
    order = np.lexsort((-tie, -keys))
    picks = [int(i) for i in order if not taken[i]][: n - len(forced)]
    return Mask(forced + [Line(i // N, i % N) for i in picks], N, T)


def psf(mask: Mask) -> np.ndarray:
    """Per-frame point-spread function, shape (T, N, N).

    Inverse 2-D DFT of the frame's indicator, where each acquired row is
    filled across all columns.
    """
    N, T = mask.dims
    ind = np.repeat(mask.row_mask().astype(np.float64)[:, :, None], N, axis=2)
    return np.fft.ifft2(ind)


def coherence(mask: Mask) -> float:
    """Max over frames of the largest off-center |PSF| relative to the center.

    A frame with no lines counts as maximally coherent (1.0).
    """
    if not len(mask):
        raise ValueError("coherence of an empty mask is undefined")
    p = np.abs(psf(mask))
    worst = 0.0
    for frame in p:
        center = frame[0, 0]
        if center == 0.0:
            worst = max(worst, 1.0)
            continue
        side = frame.copy()
        side[0, 0] = 0.0
        worst = max(worst, float(side.max() / center))
    return worst


def _cell_rng(seed: int, cell: int, draw: int):
    ss = np.random.SeedSequence([int(seed), int(cell), int(draw)])
    return np.random.Generator(np.random.Philox(ss))


def _cell_masks(params: VDParams, dims, draws, seed, cell):
    N, T = dims
    n = lines_for_rate(params.rate, N, T)
    f = gaussian_vd_pmf(params, dims)
    forced = central_lines(params.central, dims)
    return [draw_mask(f, n, forced, rng=_cell_rng(seed, cell, d)) for d in range(draws)]


def _representative(params: VDParams, dims, seed, cell):
    # fixed derived stream, distinct from the scoring draws
    N, T = dims
    f = gaussian_vd_pmf(params, dims)
    rng = _cell_rng(seed, cell, 2**31)
    return draw_mask(f, lines_for_rate(params.rate, N, T), central_lines(params.central, dims), rng=rng)


@dataclass
class CellResult:
    index: int
    params: VDParams
    mean: float
    std: float


@dataclass
class BaselineResult:
    method: str
    params: VDParams
    mask: Mask
    cells: list  # CellResult, in grid order

    def to_csv(self) -> str:
        lines = ["cell,width,central,rate,score,mean,std,winner"]
        score = "coherence" if self.method == "coherence-vd" else "metric"
        for c in self.cells:
            lines.append(
                f"{c.index},{c.params.width:.6g},{c.params.central},{c.params.rate:.6g},{score},"
                f"{c.mean:.6g},{c.std:.6g},{int(c.params == self.params)}"
            )
        return "\n".join(lines) + "\n"


def _feasible(grid, dims):
    cells = [(i, p) for i, p in enumerate(grid) if p.feasible(dims)]
    if not grid:
        raise ValueError("empty parameter grid")
    if not cells:
        raise ValueError("no grid cell is feasible for these dims and rate")
    return cells


def _map(fn, items, threads):
    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def coherence_vd_design(rate, dims, grid=None, draws=DEFAULT_DRAWS, seed=0, threads=1) -> BaselineResult:
    """Grid cell with the lowest mean coherence; ties go to the first cell."""
    grid = grid if grid is not None else make_grid(rate)
    grid = [VDParams(p.width, p.central, rate) for p in grid]
    cells = _feasible(grid, dims)

    def score(item):
        i, p = item
        vals = [coherence(m) for m in _cell_masks(p, dims, draws, seed, i)]
        return CellResult(i, p, mean_metric(vals), float(np.std(vals)))

    results = _map(score, cells, threads)
    best = min(results, key=lambda r: (r.mean, r.index))
    return BaselineResult("coherence-vd", best.params, _representative(best.params, dims, seed, best.index), results)


def lbvd_design(rate, dims, training, decoder, metric, grid=None, draws=DEFAULT_DRAWS, seed=0,
                threads=1) -> BaselineResult:
    """Grid cell with the highest mean training metric; ties go to the first cell."""
    grid = grid if grid is not None else make_grid(rate)
    grid = [VDParams(p.width, p.central, rate) for p in grid]
    cells = _feasible(grid, dims)
    if not training:
        raise ValueError("empty training set")
    decoder = get_decoder(decoder) if isinstance(decoder, str) else decoder
    metric = get_metric(metric)

    def score(item):
        i, p = item
        vals = [evaluate_mask(m, training, decoder, metric).mean for m in _cell_masks(p, dims, draws, seed, i)]
        return CellResult(i, p, mean_metric(vals), _std(vals))

    results = _map(score, cells, threads)
    best = results[0]
    for r in results[1:]:
        if r.mean > best.mean:
            best = r
    return BaselineResult("lb-vd", best.params, _representative(best.params, dims, seed, best.index), results)


def _std(vals):
    finite = [v for v in vals if math.isfinite(v)]
    return float(np.std(finite)) if len(finite) == len(vals) else float("nan")


def uniform_random_mask(rate, dims, seed=0) -> Mask:
    N, T = dims
    return draw_mask(SamplingDistribution.uniform(N, T), lines_for_rate(rate, N, T), seed=seed)


# ---------------------------------------------------------------------------
# expected performance of a PMF versus the best fixed mask

MAX_BRUTE_LINES = 20


@dataclass
class PropReport:
    mc_mean: float
    mc_stderr: float
    brute_max: float
    argmax: Mask
    degenerate_mean: float
    n_masks: int
    samples: int

    @property
    def inequality_holds(self) -> bool:
        return self.mc_mean <= self.brute_max + 3.0 * self.mc_stderr

    @property
    def degenerate_attains_max(self) -> bool:
        return self.degenerate_mean == self.brute_max

    @property
    def ok(self) -> bool:
        return self.inequality_holds and self.degenerate_attains_max


def prop_check(f: SamplingDistribution, n: int, samples: int, training, decoder, metric, seed=0) -> PropReport:
    """Monte-Carlo E_f[eta_m] against the brute-force max over all n-line masks."""
    N, T = f.dims
    if N * T > MAX_BRUTE_LINES:
        raise ValueError(f"{N * T} candidate lines is too many for brute force (max {MAX_BRUTE_LINES})")
    decoder = get_decoder(decoder) if isinstance(decoder, str) else decoder
    metric = get_metric(metric)
    all_lines = [Line(t, y) for t in range(T) for y in range(N)]

    cache = {}

    def eta(mask):
        key = frozenset(mask.lines)
        if key not in cache:
            cache[key] = evaluate_mask(mask, training, decoder, metric).mean
        return cache[key]

    best_val, best_mask, n_masks = -math.inf, None, 0
    for combo in itertools.combinations(all_lines, n):
        n_masks += 1
        m = Mask(combo, N, T)
        v = eta(m)
        if best_mask is None or v > best_val:
            best_val, best_mask = v, m

    rng = make_rng(seed)
    vals = [eta(draw_mask(f, n, rng=rng)) for _ in range(samples)]
    mc = mean_metric(vals)
    se = float(np.std(vals, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0

    degenerate = SamplingDistribution.degenerate(best_mask.lines, N, T)
    deg_vals = [eta(draw_mask(degenerate, n, rng=rng)) for _ in range(min(samples, 100))]
    return PropReport(mc, se, best_val, best_mask, mean_metric(deg_vals), n_masks, samples)
