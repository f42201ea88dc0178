"""Domain types shared across the package.

Conventions
-----------
* A dynamic image is a complex128 array of shape ``(T, N, N)``: frame-major,
  then row-major, stored as interleaved (re, im) doubles.
* A phase-encode line is addressed as ``Line(t, y)``: frame ``t`` and k-space
  row ``y`` in standard DFT order (row 0 is DC, no fftshift).
* Frames are 0-based. Stochastic-greedy frame cycling starts at frame 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class DegenerateImageError(ValueError):
    pass


class Line(NamedTuple):
    t: int
    y: int


@dataclass(frozen=True, eq=False)
class DynamicImage:
    """Complex ``(T, N, N)`` video plus the factor it was scaled by at ingestion.

    ``data`` is made read-only. Use ``np.asarray(img)`` to get the array.
    """

    data: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.complex128)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ValueError(f"expected shape (T, N, N), got {arr.shape}")
        if min(arr.shape) < 1:
            raise ValueError("dimensions must be positive")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains NaN or Inf")
        if arr is self.data:
            arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def N(self) -> int:
        return self.data.shape[1]

    @property
    def T(self) -> int:
        return self.data.shape[0]

    @property
    def dims(self) -> tuple[int, int]:
        return (self.N, self.T)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.data
        return self.data.astype(dtype)


def as_volume(image) -> np.ndarray:
    """Return the ``(T, N, N)`` complex128 array behind `image`."""
    arr = np.asarray(image)
    if arr.dtype != np.complex128:
        arr = arr.astype(np.complex128)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError(f"expected shape (T, N, N), got {arr.shape}")
    return arr


def normalize(image) -> DynamicImage:
    """Scale `image` so its maximum magnitude is exactly 1.

    The applied factor (new = old * scale) is kept on the result.
    """
    arr = as_volume(image)
    peak = float(np.max(np.abs(arr))) if arr.size else 0.0
    if peak == 0.0:
        raise DegenerateImageError("degenerate image")
    if 1.0 - _PEAK_SLACK <= peak <= 1.0:
        return DynamicImage(arr, 1.0)
    scale = 1.0 / peak
    out = arr / peak
    # rounding may leave the peak an ulp above 1
    while float(np.max(np.abs(out))) > 1.0:
        out *= 1.0 - _EPS
        scale *= 1.0 - _EPS
    return DynamicImage(out, scale)


_EPS = float(np.finfo(np.float64).eps)
_PEAK_SLACK = 4 * _EPS


class Mask:
    """Ordered, duplicate-free set of acquired lines; order is acquisition order.

    Masks are immutable. ``prefix(i)`` returns the mask after ``i`` acquisitions.
    """

    __slots__ = ("_lines", "_N", "_T", "_set")

    def __init__(self, lines: Iterable, N: int, T: int):
        if N < 1 or T < 1:
            raise ValueError("dims must be positive")
        lines = tuple(Line(int(t), int(y)) for t, y in lines)
        seen = set()
        for ln in lines:
            if not (0 <= ln.t < T and 0 <= ln.y < N):
                raise ValueError(f"line {tuple(ln)} out of range for N={N}, T={T}")
            if ln in seen:
                raise ValueError(f"duplicate line {tuple(ln)}")
            seen.add(ln)
        self._lines = lines
        self._N = int(N)
        self._T = int(T)
        self._set = frozenset(seen)

    @classmethod
    def empty(cls, N: int, T: int) -> Mask:
        return cls((), N, T)

    @classmethod
    def full(cls, N: int, T: int) -> Mask:
        return cls(((t, y) for t in range(T) for y in range(N)), N, T)

    @property
    def lines(self) -> tuple[Line, ...]:
        return self._lines

    @property
    def N(self) -> int:
        return self._N

    @property
    def T(self) -> int:
        return self._T

    @property
    def dims(self) -> tuple[int, int]:
        return (self._N, self._T)

    @property
    def n_samples(self) -> int:
        return self._N * len(self._lines)

    def __len__(self):
        return len(self._lines)

    def __iter__(self):
        return iter(self._lines)

    def __contains__(self, line):
        return Line(*line) in self._set

    def __eq__(self, other):
        if not isinstance(other, Mask):
            return NotImplemented
        return self.dims == other.dims and self._lines == other._lines

    def __hash__(self):
        return hash((self.dims, self._lines))

    def __repr__(self):
        return f"Mask(N={self._N}, T={self._T}, lines={len(self._lines)})"

    def prefix(self, i: int) -> Mask:
        return Mask(self._lines[:i], self._N, self._T)

    def extend(self, lines: Iterable) -> Mask:
        return Mask(self._lines + tuple(lines), self._N, self._T)

    def same_support(self, other: Mask) -> bool:
        return self.dims == other.dims and self._set == other._set

    def row_mask(self) -> np.ndarray:
        """Boolean ``(T, N)`` indicator of acquired rows, as uint8."""
        out = np.zeros((self._T, self._N), dtype=np.uint8)
        for t, y in self._lines:
            out[t, y] = 1
        return out

    def counts_per_frame(self) -> np.ndarray:
        out = np.zeros(self._T, dtype=np.int64)
        for t, _ in self._lines:
            out[t] += 1
        return out


def sampling_rate(mask: Mask) -> float:
    """Fraction of the k-t grid acquired: lines / (N * T)."""
    return len(mask) / (mask.N * mask.T)


def lines_for_rate(rate: float, N: int, T: int) -> int:
    """Number of lines giving sampling rate `rate` (rounded half up)."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {rate}")
    return min(N * T, int(math.floor(rate * N * T + 0.5)))


class SamplingDistribution:
    """PMF over the ``N * T`` candidate lines, stored as a ``(T, N)`` array."""

    __slots__ = ("_w",)

    def __init__(self, weights):
        w = np.array(weights, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError("weights must have shape (T, N)")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        total = math.fsum(w.ravel())
        if total <= 0:
            raise ValueError("weights must not all be zero")
        w /= total
        w.flags.writeable = False
        self._w = w

    @classmethod
    def uniform(cls, N: int, T: int) -> SamplingDistribution:
        return cls(np.ones((T, N)))

    @classmethod
    def degenerate(cls, lines: Sequence, N: int, T: int) -> SamplingDistribution:
        """Uniform over exactly `lines`, zero elsewhere."""
        w = np.zeros((T, N))
        for t, y in lines:
            w[t, y] = 1.0
        return cls(w)

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @property
    def dims(self) -> tuple[int, int]:
        return (self._w.shape[1], self._w.shape[0])

    def __getitem__(self, line) -> float:
        t, y = line
        return float(self._w[t, y])

    def mix(self, other: SamplingDistribution, alpha: float) -> SamplingDistribution:
        """Convex combination ``(1 - alpha) * self + alpha * other``."""
        if not 0.0 <= alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        return SamplingDistribution((1.0 - alpha) * self._w + alpha * other._w)


VARIANTS = ("G", "SG")
TRAINING_MODES = ("v1", "v2")


@dataclass(frozen=True)
class DesignConfig:
    """Inputs of one greedy mask design run.

    ``n`` is the total line budget, warm-start lines included.
    """

    variant: str = "SG"
    training_mode: str = "v2"
    n: int = 0
    k: int = 1
    l: int = 1  # noqa: E741
    seed: int = 0
    decoder: str = "zf"
    metric: str = "psnr"
    warm_start: tuple = ()

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.training_mode not in TRAINING_MODES:
            raise ValueError(
                f"training_mode must be one of {TRAINING_MODES}, got {self.training_mode!r}"
            )
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.l < 1:
            raise ValueError("l must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(
            self, "warm_start", tuple(Line(int(t), int(y)) for t, y in self.warm_start)
        )

    @property
    def label(self) -> str:
        return f"{self.variant}-{self.training_mode}"

    def validate(self, N: int, T: int, m: int) -> None:
        """Check the budget/batch invariants against problem dims."""
        if self.n > N * T:
            raise ValueError(f"budget n={self.n} exceeds N*T={N * T}")
        if self.variant == "SG" and self.k > N:
            raise ValueError(f"k={self.k} exceeds lines per frame N={N}")
        if self.training_mode == "v2" and self.l > m:
            raise ValueError(f"l={self.l} exceeds training set size m={m}")
        if len(self.warm_start) > self.n:
            raise ValueError("warm start has more lines than the budget")


@dataclass
class MetricReport:
    mask_id: str
    sampling_rate: float
    values: list
    decoder: str
    metric: str
    decoder_call_count: int
    mean: float = field(init=False)
    averaging: str = "per-volume"

    def __post_init__(self):
        self.values = [float(v) for v in self.values]
        self.mean = mean_metric(self.values)


def mean_metric(values) -> float:
    """Arithmetic mean, exact when all values are equal, +inf if all are +inf."""
    values = [float(v) for v in values]
    if not values:
        return float("nan")
    if all(math.isinf(v) and v > 0 for v in values):
        return math.inf
    if any(math.isinf(v) for v in values):
        return math.fsum(values) / len(values)
    shift = values[0]
    return shift + math.fsum(v - shift for v in values) / len(values)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator; identical streams on every platform."""
    return np.random.Generator(np.random.Philox(int(seed)))


def partial_fisher_yates(rng: np.random.Generator, items: Sequence, k: int) -> list:
    """Draw `k` of `items` uniformly without replacement, in draw order."""
    pool = list(items)
    n = len(pool)
    if not 0 <= k <= n:
        raise ValueError(f"cannot draw {k} of {n} items")
    for i in range(k):
        j = i + int(rng.integers(n - i))
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]


def write_mask(path, mask: Mask) -> None:
    """Text format: header ``N T n``, then one ``t y`` pair per line in acquisition order."""
    with open(path, "w") as fh:
        fh.write(f"{mask.N} {mask.T} {len(mask)}\n")
        for t, y in mask.lines:
            fh.write(f"{t} {y}\n")


def read_mask(path) -> Mask:
    with open(path) as fh:
        rows = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 3:
        raise ValueError(f"{path}: expected header 'N T n'")
    N, T, n = (int(v) for v in rows[0])
    lines = [(int(a), int(b)) for a, b in rows[1:]]
    if len(lines) != n:
        raise ValueError(f"{path}: header says {n} lines, found {len(lines)}")
    return Mask(lines, N, T)
