"""Raw randomness: Poisson jump paths, Wiener increments, per-path seeding.

Every stochastic quantity in this package is generated from a
``numpy.random.Generator`` that is derived deterministically from a
``SeedSpec`` (master seed + path index).  Two calls with the same spec
produce bitwise-identical output, which makes Monte Carlo aggregation
independent of how paths are distributed over workers.

Poisson paths are sampled exactly via exponential inter-arrival times;
time-varying intensities are handled by thinning a dominating
homogeneous stream (Lewis-Shedler).  No grid discretization is involved
anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one random path: (master_seed, path_index).

    The derived generator state is a pure function of the two fields, so
    any path can be regenerated in isolation.
    """

    master_seed: int
    path_index: int = 0

    def __post_init__(self):
        if self.path_index < 0:
            raise ValueError(f"path_index must be >= 0, got {self.path_index}")


def _mix64(z: int) -> int:
    """SplitMix64 finalizer: full-avalanche 64-bit mixing."""
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_path_rng(seed: SeedSpec) -> np.random.Generator:
    """Derive the generator for one path.

    The master seed and path index are combined by two rounds of
    SplitMix64 mixing; the mixed 64-bit value seeds a PCG64 bit
    generator.  The mixing function is fixed: results are stable within
    this implementation for a given (master_seed, path_index).
    """
    h = _mix64(seed.master_seed & _MASK64)
    h = _mix64(h ^ ((seed.path_index + 1) * _GOLDEN & _MASK64))
    return np.random.Generator(np.random.PCG64(h))


@dataclass(frozen=True)
class JumpPath:
    """One realization of a counting process on [0, horizon].

    ``times`` are strictly increasing event times in (0, horizon];
    ``sizes`` are the positive integer jumps at those times.  The count
    N(t) is the sum of sizes with event time <= t, so N(0) = 0 and N is
    non-decreasing.
    """

    horizon: float
    times: np.ndarray
    sizes: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        # zero-prefixed cumulative count makes count(t) a single table lookup
        cum = np.concatenate((np.zeros(1, dtype=np.int64), np.cumsum(self.sizes, dtype=np.int64)))
        object.__setattr__(self, "_cum", cum)

    def count(self, t) -> np.ndarray | int:
        """N(t) for scalar or array t; t must lie within [0, horizon]."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0) or np.any(t_arr > self.horizon):
            raise ValueError(f"time outside [0, {self.horizon}]")
        counts = self._cum[np.searchsorted(self.times, t_arr, side="right")]
        if np.isscalar(t) or t_arr.ndim == 0:
            return int(counts)
        return counts

    @property
    def total_count(self) -> int:
        return int(self._cum[-1])


@dataclass(frozen=True)
class ConstantIntensity:
    """Homogeneous rate lambda >= 0."""

    rate: float

    def __post_init__(self):
        if not np.isfinite(self.rate) or self.rate < 0:
            raise ValueError(f"rate must be finite and >= 0, got {self.rate}")


@dataclass(frozen=True)
class TabulatedIntensity:
    """Rate lambda(t) tabulated on a time grid, interpolated linearly.

    ``max_rate`` must dominate every tabulated value; it is what the
    thinning sampler uses as its homogeneous candidate rate.  Outside
    the tabulated range the nearest endpoint value is used.
    """

    times: np.ndarray
    values: np.ndarray
    max_rate: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or times.shape != values.shape or len(times) < 2:
            raise ValueError("times and values must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(times) <= 0):
            raise ValueError("intensity grid times must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("intensity values must be >= 0")
        if np.any(values > self.max_rate):
            raise ValueError(
                f"tabulated intensity exceeds max_rate={self.max_rate} "
                f"(peak {values.max()})"
            )

    def __call__(self, t) -> np.ndarray:
        return np.interp(t, self.times, self.values)


IntensitySpec = ConstantIntensity | TabulatedIntensity


def _check_horizon(horizon: float) -> float:
    if not np.isfinite(horizon) or horizon < 0:
        raise ValueError(f"horizon must be finite and >= 0, got {horizon}")
    return float(horizon)


def _homogeneous_event_times(rate: float, horizon: float, rng: np.random.Generator) -> np.ndarray:
    """Event times of a rate-``rate`` Poisson stream on (0, horizon].

    Exponential gaps are drawn in blocks until the horizon is passed;
    the block schedule is fixed, so the draw sequence is deterministic.
    """
    if rate == 0.0 or horizon == 0.0:
        return np.empty(0)
    block = max(8, int(2 * rate * horizon) + 8)
    gaps = rng.exponential(1.0 / rate, size=block)
    total = np.cumsum(gaps)
    while total[-1] <= horizon:
        gaps = rng.exponential(1.0 / rate, size=block)
        total = np.append(total, total[-1] + np.cumsum(gaps))
    return total[total <= horizon]


def sample_poisson_path(intensity: ConstantIntensity, horizon: float, seed: SeedSpec) -> JumpPath:
    """Exact homogeneous Poisson path: i.i.d. exponential gaps, unit jumps."""
    horizon = _check_horizon(horizon)
    rng = derive_path_rng(seed)
    times = _homogeneous_event_times(intensity.rate, horizon, rng)
    return JumpPath(horizon, times, np.ones(len(times), dtype=np.int64))


def sample_inhomogeneous_poisson_path(
    intensity: TabulatedIntensity, horizon: float, seed: SeedSpec
) -> JumpPath:
    """Inhomogeneous Poisson path by thinning a rate-``max_rate`` stream.

    Candidate events at the dominating homogeneous rate are kept with
    probability lambda(t)/max_rate, which reproduces the target mean
    count a(t) = integral of lambda exactly in distribution.
    """
    horizon = _check_horizon(horizon)
    rng = derive_path_rng(seed)
    candidates = _homogeneous_event_times(intensity.max_rate, horizon, rng)
    if len(candidates) == 0:
        return JumpPath(horizon, candidates, np.ones(0, dtype=np.int64))
    accept = rng.uniform(size=len(candidates)) * intensity.max_rate < intensity(candidates)
    times = candidates[accept]
    return JumpPath(horizon, times, np.ones(len(times), dtype=np.int64))


def product_count(n1: JumpPath, n2: JumpPath, t) -> np.ndarray | int:
    """Count of the product process N1(t)*N2(t).

    The product is treated literally: its increments can exceed 1, so
    consumers that care about parity must look at the product count, not
    at individual jumps.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr > min(n1.horizon, n2.horizon)):
        raise ValueError("t beyond a driver horizon")
    c = np.asarray(n1.count(t)) * np.asarray(n2.count(t))
    if np.isscalar(t) or t_arr.ndim == 0:
        return int(c)
    return c


def sample_wiener_increments(grid, seed: SeedSpec) -> np.ndarray:
    """Independent Normal(0, dt) increments over consecutive grid cells.

    The grid must start at 0 and be non-decreasing; a zero-length cell
    yields an increment of exactly 0.0.
    """
    grid = np.asarray(grid, dtype=float)
    rng = derive_path_rng(seed)
    return wiener_increments_from(grid, rng)


def wiener_increments_from(grid: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Like :func:`sample_wiener_increments` but drawing from an open generator."""
    if grid.ndim != 1 or len(grid) == 0 or grid[0] != 0.0:
        raise ValueError("grid must be 1-d and start at 0")
    dt = np.diff(grid)
    if np.any(dt < 0):
        raise ValueError("grid must be non-decreasing")
    return np.sqrt(dt) * rng.standard_normal(len(dt))
