"""Shared numerical primitives.

Special functions (dilogarithm, zeta values), complex Gaussian sampling with
reproducible per-trial streams, streaming moment accumulators, and the radial
curve container used by all estimators.

All special-function tolerances are fixed here in one place:

    ABS_TOL_SPECIAL   absolute accuracy of dilog / zeta_value     1e-12
    REL_TOL_IDENTITY  identity cross-checks between closed forms  1e-12
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ABS_TOL_SPECIAL = 1e-12
REL_TOL_IDENTITY = 1e-12

PI_SQ_OVER_6 = math.pi ** 2 / 6.0

# Bernoulli numbers B_2, B_4, ... B_12 for the Euler-Maclaurin tail.
_BERNOULLI_EVEN = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
)


def dilog(x):
    """Dilogarithm Li2(x) = sum_{n>=1} x^n / n^2 for x in [0, 1].

    Series summation for x <= 1/2, Euler reflection
    Li2(x) + Li2(1-x) = pi^2/6 - ln(x) ln(1-x) for x > 1/2, so the series
    argument never exceeds 1/2.  Absolute error below ``ABS_TOL_SPECIAL``.

    Accepts scalars or arrays.
    """
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0.0) or np.any(xs > 1.0):
        raise ValueError("dilog argument must lie in [0, 1]")
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs)
    out = np.empty_like(xs)

    small = xs <= 0.5
    out[small] = _dilog_series(xs[small])
    big = ~small
    if np.any(big):
        xb = xs[big]
        one = xb == 1.0
        refl = PI_SQ_OVER_6 - _dilog_series(1.0 - xb)
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = np.log(xb) * np.log1p(-xb)
        cross[one] = 0.0
        out[big] = refl - cross
    return float(out[0]) if scalar else out


def _dilog_series(x):
    """Series sum for 0 <= x <= 1/2; 48 terms leave a tail < 2^-48/n^2."""
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    term = np.ones_like(x)
    for n in range(1, 49):
        term = term * x if n > 1 else x.copy()
        acc += term / (n * n)
    return acc


def zeta_value(s: int) -> float:
    """Riemann zeta(s) for integer s >= 2 by Euler-Maclaurin summation.

    Direct series over n < 24 plus the integral, midpoint and Bernoulli tail
    corrections at the cutoff; absolute error far below 1e-12 for all s >= 2.
    """
    if int(s) != s or s < 2:
        raise ValueError("zeta_value requires an integer s >= 2")
    s = int(s)
    cutoff = 24
    acc = sum(n ** (-s) for n in range(1, cutoff))
    nf = float(cutoff)
    acc += nf ** (1 - s) / (s - 1)
    acc += 0.5 * nf ** (-s)
    # Euler-Maclaurin correction terms B_2k/(2k)! * (s)_{2k-1} * N^{-s-2k+1}
    rising = float(s)
    fact = 1.0
    power = nf ** (-s - 1)
    for k, b2k in enumerate(_BERNOULLI_EVEN, start=1):
        fact *= (2 * k - 1) * (2 * k)
        acc += b2k / fact * rising * power
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= nf * nf
    return acc


# ---------------------------------------------------------------------------
# Random number streams
# ---------------------------------------------------------------------------

SQRT_HALF = math.sqrt(0.5)


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Counter-based generator for one trial.

    Keyed Philox stream: distinct (master_seed, trial_index) pairs give
    non-overlapping streams, so parallel trials reproduce bit-identically
    regardless of scheduling order.
    """
    key = np.array([master_seed, trial_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_std_complex_gaussian(rng: np.random.Generator) -> complex:
    """One standard complex Gaussian: E a = 0, E a conj(a) = 1, E a a = 0.

    Real and imaginary parts are independent N(0, 1/2).
    """
    x = rng.standard_normal(2)
    return complex(x[0] * SQRT_HALF, x[1] * SQRT_HALF)


def sample_std_complex_gaussian_array(rng: np.random.Generator, n: int) -> np.ndarray:
    """n i.i.d. standard complex Gaussians, same stream order as repeated
    scalar draws from the same generator."""
    x = rng.standard_normal(2 * n)
    return (x[0::2] + 1j * x[1::2]) * SQRT_HALF


# ---------------------------------------------------------------------------
# Streaming statistics
# ---------------------------------------------------------------------------


@dataclass
class StreamingStat:
    """Single-pass mean/variance accumulator (Welford), mergeable.

    ``m2`` is the running sum of squared deviations from the mean; the merge
    is associative and order independent up to floating rounding, so partial
    accumulators from independent workers can be combined in trial order.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def update(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def update_batch(self, xs: np.ndarray) -> None:
        """Fold a whole batch in one merge (vectorised)."""
        xs = np.asarray(xs, dtype=float)
        n = xs.size
        if n == 0:
            return
        other = StreamingStat(count=n, mean=float(xs.mean()))
        other.m2 = float(((xs - other.mean) ** 2).sum())
        self.merge(other)

    def merge(self, other: "StreamingStat") -> None:
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return
        n = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / n
        self.m2 += other.m2 + delta * delta * self.count * other.count / n
        self.count = n

    @property
    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return self.m2 / (self.count - 1)

    @property
    def std_err(self) -> float:
        if self.count < 2:
            return 0.0
        return math.sqrt(self.variance / self.count)


# ---------------------------------------------------------------------------
# Radial curves
# ---------------------------------------------------------------------------


@dataclass
class RadialCurve:
    """Gridded radial curve with per-bin standard errors.

    ``bin_edges`` has one more entry than ``value``; edges strictly increase
    and std_err is nonnegative.  Bins with no samples carry value NaN in
    memory (serialised as empty fields, never as NaN text).
    """

    bin_edges: np.ndarray
    value: np.ndarray
    std_err: np.ndarray
    samples_per_bin: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        self.std_err = np.asarray(self.std_err, dtype=float)
        if self.samples_per_bin is None:
            self.samples_per_bin = np.zeros(len(self.value), dtype=np.int64)
        self.samples_per_bin = np.asarray(self.samples_per_bin, dtype=np.int64)
        if len(self.value) != len(self.bin_edges) - 1:
            raise ValueError("len(value) must equal len(bin_edges) - 1")
        if np.any(np.diff(self.bin_edges) <= 0):
            raise ValueError("bin_edges must be strictly increasing")
        if np.any(self.std_err < 0):
            raise ValueError("std_err must be nonnegative")

    @property
    def n_bins(self) -> int:
        return len(self.value)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])
