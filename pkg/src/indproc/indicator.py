"""0/1 indicator processes driven by Poisson counts.

An indicator is a parity function of a counting process: the "plus"
phase is 1 on even counts (value 1 at t=0), the "minus" phase is its
complement.  Parity is computed on integers, never through a
floating-point cosine, so values are exactly 0 or 1.

Also provides the chained construction that turns n-1 independent
indicators into n mutually exclusive 0/1 processes summing to 1
("first active wins, last slot takes the remainder") and its
probability counterpart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampling import IntensitySpec, JumpPath, product_count


@dataclass(frozen=True)
class IndicatorSpec:
    """Recipe for a 0/1 process.

    driver : one intensity (single Poisson driver) or a pair of
        intensities (the driver is the pointwise product of the two
        counting processes).
    phase : "plus" -> 1 on even counts; "minus" -> 1 on odd counts.
    shift : integer added to the count before the parity test; shift=1
        swaps the starting value without changing flip times.
    """

    driver: IntensitySpec | tuple[IntensitySpec, IntensitySpec]
    phase: str = "plus"
    shift: int = 0

    def __post_init__(self):
        if self.phase not in ("plus", "minus"):
            raise ValueError(f"phase must be 'plus' or 'minus', got {self.phase!r}")
        if self.shift < 0:
            raise ValueError(f"shift must be >= 0, got {self.shift}")

    @property
    def is_product(self) -> bool:
        return isinstance(self.driver, tuple)


def chi_of_count(count, phase: str = "plus", shift: int = 0):
    """Indicator value for a given count: parity of (count + shift).

    plus -> 1 when even, 0 when odd; minus -> the complement.  Accepts
    scalars or integer arrays.
    """
    if phase not in ("plus", "minus"):
        raise ValueError(f"phase must be 'plus' or 'minus', got {phase!r}")
    parity = (np.asarray(count) + shift) % 2
    value = 1 - parity if phase == "plus" else parity
    if np.ndim(count) == 0:
        return int(value)
    return value.astype(np.int64)


def evaluate_indicator(spec: IndicatorSpec, paths, t):
    """Evaluate the indicator at time(s) t given its sampled driver path(s).

    ``paths`` is one JumpPath, or a pair for a product driver.  Raises
    if t lies beyond a driver horizon.
    """
    if spec.is_product:
        n1, n2 = paths
        count = product_count(n1, n2, t)
    else:
        path: JumpPath = paths
        count = path.count(t)
    return chi_of_count(count, spec.phase, spec.shift)


def indicator_intervals(spec: IndicatorSpec, paths, horizon: float):
    """Step-function form of an indicator on [0, horizon].

    Returns ``(starts, values)`` where ``starts`` begins at 0.0,
    contains every time the driving count changes, and ``values[k]`` is
    the indicator on ``[starts[k], starts[k+1])`` (through ``horizon``
    for the last entry).  Event times beyond the horizon are ignored.
    """
    if spec.is_product:
        n1, n2 = paths
        times = np.union1d(n1.times, n2.times)
        times = times[times <= horizon]
        starts = np.concatenate((np.zeros(1), times))
        counts = product_count(n1, n2, starts)
    else:
        path: JumpPath = paths
        times = path.times[path.times <= horizon]
        starts = np.concatenate((np.zeros(1), times))
        counts = path.count(starts)
    return starts, chi_of_count(counts, spec.phase, spec.shift)


def expected_chi(mu: float, t, phase: str = "plus"):
    """E[indicator] under a rate-mu Poisson driver.

    plus -> 0.5(1 + exp(-2 mu t)); minus -> 0.5(1 - exp(-2 mu t)).
    The two phases sum to 1 exactly.
    """
    if phase not in ("plus", "minus"):
        raise ValueError(f"phase must be 'plus' or 'minus', got {phase!r}")
    t_arr = np.asarray(t, dtype=float)
    if mu < 0 or np.any(t_arr < 0):
        raise ValueError("mu and t must be >= 0")
    even = 0.5 * (1.0 + np.exp(-2.0 * mu * t_arr))
    value = even if phase == "plus" else 1.0 - even
    return float(value) if t_arr.ndim == 0 else value


def parity_probability(mu: float, t, parity: str = "even"):
    """P(Poisson(mu t) count is even/odd) = 0.5(1 +/- exp(-2 mu t))."""
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    return expected_chi(mu, t, "plus" if parity == "even" else "minus")


def build_group(chi_values) -> np.ndarray:
    """Chain n-1 indicator values into n exclusive slots.

    z[0] = chi[0]; z[k] = chi[k] * prod_{j<k}(1 - chi[j]);
    z[n-1] = prod(1 - chi[j]).  Exactly one entry is 1; all pairwise
    products are 0.  Accepts a 1-d vector or a (paths, n-1) matrix and
    returns one extra column.
    """
    chi = np.asarray(chi_values, dtype=np.int64)
    if chi.size and not np.all((chi == 0) | (chi == 1)):
        raise ValueError("indicator values must be 0 or 1")
    matrix = chi[np.newaxis, :] if chi.ndim == 1 else chi
    n_minus_1 = matrix.shape[1]
    z = np.empty((matrix.shape[0], n_minus_1 + 1), dtype=np.int64)
    blocked = np.ones(matrix.shape[0], dtype=np.int64)
    for k in range(n_minus_1):
        z[:, k] = matrix[:, k] * blocked
        blocked *= 1 - matrix[:, k]
    z[:, n_minus_1] = blocked
    return z[0] if chi.ndim == 1 else z


def group_occupancy_probabilities(p) -> np.ndarray:
    """Slot probabilities of the chained group from independent indicators.

    Given P(chi[j]=1) = p[j], returns
    (p1, p2(1-p1), ..., p_{n-1} prod(1-p_j), prod(1-p_j)), which sums
    to 1 up to rounding.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    survive = np.concatenate((np.ones(1), np.cumprod(1.0 - p)))
    out = np.empty(len(p) + 1)
    out[:-1] = p * survive[:-1]
    out[-1] = survive[-1]
    return out
