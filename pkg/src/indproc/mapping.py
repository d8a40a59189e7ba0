"""Mapping between exclusive-class probabilities and independent indicators.

Given target probabilities p_1..p_n of n mutually exclusive classes
(summing to 1), there is a unique set of n-1 independent indicator
probabilities q_j whose chained group reproduces the targets, and a
unique set of Poisson intensity integrals a_j realizing those q_j with
odd-parity indicators.  This module computes the correspondence in both
directions, validates when it exists with finite intensities, and runs
the end-to-end Monte Carlo check (synthesize drivers, evaluate
indicators, compare class frequencies with the targets).

Feasibility: each class j <= n-1 must satisfy sum_{k>j} p_k >= p_j.
Equality forces an infinite intensity, so this module rejects it; only
strictly feasible targets are synthesizable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charfn import _map_chunks
from .indicator import build_group, chi_of_count, group_occupancy_probabilities
from .sampling import SeedSpec, _homogeneous_event_times, derive_path_rng

SUM_TOL = 1e-12


@dataclass(frozen=True)
class GroupValidation:
    """Diagnostic report for a vector of class probabilities.

    ``margins[j]`` is sum_{k>j} p_k - p_j for the leading n-1 classes;
    feasibility needs every margin >= 0, finite intensities need > 0.
    ``ranking_ok`` reports whether the targets are already sorted
    non-decreasing (sorting always makes feasible targets feasible);
    ``suggested_order`` gives the sorting permutation when they are not.
    """

    sums_to_one: bool
    margins: np.ndarray
    ranking_ok: bool
    suggested_order: tuple[int, ...] | None

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.margins >= 0.0))

    @property
    def strictly_feasible(self) -> bool:
        return bool(np.all(self.margins > 0.0))

    @property
    def feasibility(self) -> str:
        if self.strictly_feasible:
            return "strict"
        return "boundary" if self.feasible else "infeasible"

    @property
    def ok(self) -> bool:
        """True when finite intensities exist: sum check + strict margins."""
        return self.sums_to_one and self.strictly_feasible


def validate_group(p) -> GroupValidation:
    """Check class probabilities for synthesizability (diagnostic, no raise)."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or len(p) == 0:
        raise ValueError("p must be a non-empty 1-d vector")
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    sums_to_one = abs(p.sum() - 1.0) <= SUM_TOL
    tail = np.cumsum(p[::-1])[::-1]  # tail[j] = sum_{k>=j} p_k
    margins = tail[1:] - p[:-1] if len(p) > 1 else np.empty(0)
    ranking_ok = bool(np.all(np.diff(p) >= 0))
    suggested = None if ranking_ok else tuple(int(i) for i in np.argsort(p, kind="stable"))
    return GroupValidation(sums_to_one, margins, ranking_ok, suggested)


def _require_ok(p: np.ndarray) -> GroupValidation:
    report = validate_group(p)
    if not report.sums_to_one:
        raise ValueError(f"class probabilities must sum to 1, got {p.sum()!r}")
    if not report.strictly_feasible:
        j = int(np.argmin(report.margins))
        raise ValueError(
            f"targets are {report.feasibility} at class {j}: "
            f"sum of later probabilities ({p[j + 1:].sum()!r}) must exceed p[{j}]={p[j]!r} "
            "for a finite intensity to exist"
        )
    return report


def group_to_indicator(p) -> np.ndarray:
    """Indicator probabilities reproducing the class targets.

    q_1 = p_1 and q_j = p_j / (1 - sum_{k<j} p_k).  Inverse of
    :func:`indicator_to_group`.  Unlike the intensity synthesis this
    needs no strict feasibility (q_j = 1 is a valid indicator
    probability even though no finite intensity realizes it); strictly
    feasible targets always give q_j in [0, 0.5).
    """
    p = np.asarray(p, dtype=float)
    report = validate_group(p)
    if not report.sums_to_one:
        raise ValueError(f"class probabilities must sum to 1, got {p.sum()!r}")
    if len(p) == 1:
        return np.empty(0)
    remaining = 1.0 - np.concatenate((np.zeros(1), np.cumsum(p[:-2])))
    for j, denom in enumerate(remaining):
        if denom <= 0.0:
            raise ValueError(f"degenerate targets: no probability mass left before class {j}")
    return p[:-1] / remaining


def indicator_to_group(q) -> np.ndarray:
    """Class probabilities of the chained group built from indicators q."""
    return group_occupancy_probabilities(q)


def intensity_from_group(p) -> np.ndarray:
    """Poisson intensity integrals a_j realizing the class targets.

    a_j = 0.5 ln[(1 - sum_{k<j} p_k) / (1 - sum_{k<=j} p_k - p_j)], so
    an odd-parity indicator with mean count a_j is active with exactly
    the probability q_j that the targets require.  Accepts a single
    vector or an (n_t, n) matrix of per-time targets (each row is
    converted independently).
    """
    p = np.asarray(p, dtype=float)
    if p.ndim == 2:
        return np.stack([intensity_from_group(row) for row in p])
    _require_ok(p)
    if len(p) == 1:
        return np.empty(0)
    head = np.concatenate((np.zeros(1), np.cumsum(p[:-2])))  # sum_{k<j} p_k
    numerator = 1.0 - head
    denominator = 1.0 - head - 2.0 * p[:-1]
    return 0.5 * np.log(numerator / denominator)


def intensity_rates_from_group(p_grid, t_grid) -> tuple[np.ndarray, np.ndarray]:
    """Per-interval rates for time-dependent targets on a shared grid.

    Returns (a, rates) where a[k] are the intensity integrals at
    t_grid[k] and rates[k] = (a[k+1]-a[k]) / dt hold on each interval.
    Raises if any integral decreases: the targets would need a negative
    rate, which no Poisson driver realizes.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    a = intensity_from_group(p_grid)
    if a.shape[0] != len(t_grid):
        raise ValueError("p_grid must have one row per grid time")
    da = np.diff(a, axis=0)
    if np.any(da < -SUM_TOL):
        k, j = np.unravel_index(int(np.argmin(da)), da.shape)
        raise ValueError(
            f"intensity integral of indicator {j} decreases on interval {k}: "
            "targets are not realizable by any non-negative rate"
        )
    return a, np.maximum(da, 0.0) / np.diff(t_grid)[:, np.newaxis]


def synthesize_and_verify(p, horizon: float, n_paths: int, master_seed: int,
                          n_threads: int = 1) -> dict:
    """End-to-end check: build drivers, sample, compare class frequencies.

    Builds n-1 independent constant-rate Poisson drivers with rates
    a_j / horizon, evaluates the odd-parity indicators at the horizon on
    each path, chains them into a group and tallies class frequencies.
    The report compares them against the targets with binomial standard
    errors: ``pass`` means every class lands within 4 standard errors.
    """
    p = np.asarray(p, dtype=float)
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")
    a = intensity_from_group(p)
    rates = a / horizon
    q = group_to_indicator(p)
    n_classes = len(p)

    def worker(start: int, stop: int) -> np.ndarray:
        counts = np.zeros(n_classes, dtype=np.int64)
        for i in range(start, stop):
            rng = derive_path_rng(SeedSpec(master_seed, i))
            chi = [
                chi_of_count(len(_homogeneous_event_times(rate, horizon, rng)), "minus")
                for rate in rates
            ]
            counts[int(np.argmax(build_group(np.asarray(chi, dtype=np.int64))))] += 1
        return counts

    counts = np.zeros(n_classes, dtype=np.int64)
    for c in _map_chunks(worker, n_paths, n_threads, chunk_size=4096):
        counts += c

    empirical = counts / n_paths
    stderr = np.sqrt(p * (1.0 - p) / n_paths)
    deviation = np.abs(empirical - p)
    ok = bool(np.all(deviation <= 4.0 * stderr + 1e-15))
    return {
        "p_target": p.tolist(),
        "q": q.tolist(),
        "a": a.tolist(),
        "lambda": rates.tolist(),
        "empirical": empirical.tolist(),
        "stderr": stderr.tolist(),
        "n_paths": int(n_paths),
        "pass": ok,
    }
