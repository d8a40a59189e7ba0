"""Named verification experiments: Monte Carlo vs. closed form.

Each experiment simulates paths at a fixed master seed, compares the
empirical quantity cell by cell against its closed form, and reports a
sigma ratio per cell: the larger of the real/imaginary deviations
divided by the cell's standard error.  An experiment passes when every
cell stays within 4 standard errors.

Results are written as one uniform table (results.csv) plus a summary
(report.json); both round-trip exactly because floats are emitted with
shortest round-trip formatting.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import charfn as cf
from . import mapping
from .indicator import parity_probability
from .models import (
    DelayDiffusionParams,
    KacParams,
    TwoSubspaceParams,
    simulate_delay_diffusion,
    simulate_kac,
    simulate_two_subspace,
)
from .sampling import ConstantIntensity, SeedSpec, derive_path_rng, sample_poisson_path

SIGMA_TOL = 4.0
LOW_POWER_PATHS = 1000

RESULT_COLUMNS = (
    "t", "freq", "re_mean", "im_mean", "stderr",
    "re_analytic", "im_analytic", "abs_error", "sigma_ratio",
)


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the field."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run: which experiment, with what knobs."""

    experiment: str
    parameters: dict = field(default_factory=dict)
    n_paths: int = 100_000
    master_seed: int = 20260
    t_grid: tuple | None = None
    freq_grid: tuple | None = None
    output_dir: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"experiment: unknown name {self.experiment!r}, "
                f"expected one of {sorted(EXPERIMENTS)}"
            )
        if not isinstance(self.n_paths, int) or self.n_paths < 2:
            raise ConfigError(f"n_paths: must be an integer >= 2, got {self.n_paths!r}")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise ConfigError(f"master_seed: must be a non-negative integer, got {self.master_seed!r}")


def config_from_dict(data: dict) -> ExperimentConfig:
    if "experiment" not in data:
        raise ConfigError("experiment: field is required")
    known = {"experiment", "parameters", "n_paths", "master_seed",
             "t_grid", "freq_grid", "output_dir"}
    for key in data:
        if key not in known:
            raise ConfigError(f"{key}: unknown configuration field")
    kwargs = dict(data)
    for key in ("t_grid", "freq_grid"):
        if kwargs.get(key) is not None:
            kwargs[key] = tuple(tuple(v) if isinstance(v, (list, tuple)) else v
                                for v in kwargs[key])
    if not isinstance(kwargs.get("parameters", {}), dict):
        raise ConfigError("parameters: must be an object")
    return ExperimentConfig(**kwargs)


@dataclass
class ExperimentResult:
    experiment: str
    rows: list
    report: dict

    @property
    def passed(self) -> bool:
        return bool(self.report["pass"])


def _sigma_ratio(dev: float, stderr: float) -> float:
    if stderr == 0.0:
        return 0.0 if dev <= 1e-12 else math.inf
    return dev / stderr


def _comparison_row(t: float, freq_label: str, mc: complex, stderr: float,
                    analytic: complex) -> dict:
    dev = max(abs(mc.real - analytic.real), abs(mc.imag - analytic.imag))
    return {
        "t": float(t),
        "freq": freq_label,
        "re_mean": float(mc.real),
        "im_mean": float(mc.imag),
        "stderr": float(stderr),
        "re_analytic": float(analytic.real),
        "im_analytic": float(analytic.imag),
        "abs_error": float(abs(mc - analytic)),
        "sigma_ratio": float(_sigma_ratio(dev, stderr)),
    }


def _summarize(rows: list) -> dict:
    ratios = [row["sigma_ratio"] for row in rows]
    max_ratio = max(ratios) if ratios else 0.0
    within2 = sum(r <= 2.0 for r in ratios)
    return {
        "max_sigma_ratio": float(max_ratio),
        "pass": bool(max_ratio <= SIGMA_TOL),
        "n_cells": len(rows),
        "fraction_within_2stderr": float(within2 / len(ratios)) if ratios else 1.0,
    }


def _model_grid(t_grid) -> np.ndarray:
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ConfigError("t_grid: must be strictly increasing and start at 0")
    return grid


def run_kac_verify(config: ExperimentConfig, n_threads: int = 1) -> ExperimentResult:
    """Empirical characteristic function of the flip motion vs. closed form."""
    params = dict(config.parameters)
    kp = KacParams(speed=float(params.pop("speed", 1.0)),
                   switch_rate=float(params.pop("switch_rate", 1.0)))
    _reject_unknown(params)
    grid = _model_grid(config.t_grid if config.t_grid is not None else np.linspace(0.0, 5.0, 11))
    freqs = np.asarray(config.freq_grid if config.freq_grid is not None else (0.5, 1.0, 2.0),
                       dtype=float)
    horizon = float(grid[-1])

    def path(seed: SeedSpec) -> np.ndarray:
        return simulate_kac(kp, horizon, grid, seed).state

    est = cf.estimate_charfn(path, grid, freqs, config.n_paths, config.master_seed,
                             n_threads=n_threads)
    rows = []
    for j, beta in enumerate(freqs):
        analytic = cf.kac_charfn(kp.switch_rate, kp.speed, float(beta), grid)
        for i, t in enumerate(grid):
            rows.append(_comparison_row(t, repr(float(beta)), complex(est.mean[i, j]),
                                        float(est.stderr[i, j]), complex(analytic[i])))
    return ExperimentResult("kac-verify", rows, _summarize(rows))


def run_subspace_referee(config: ExperimentConfig, n_threads: int = 1) -> ExperimentResult:
    """Monte Carlo referee between the competing two-subspace coefficient sets.

    The result rows compare the corrected variant; the report adds, for
    every variant and frequency pair, the maximum deviation from the
    Monte Carlo estimate in standard-error units.
    """
    params = dict(config.parameters)
    tp = TwoSubspaceParams(diffusion=float(params.pop("diffusion", 1.0)),
                           switch_rate=float(params.pop("switch_rate", 1.0)))
    _reject_unknown(params)
    grid = _model_grid(config.t_grid if config.t_grid is not None else np.linspace(0.0, 2.0, 9))
    pairs = np.asarray(config.freq_grid if config.freq_grid is not None
                       else ((1.0, 2.0), (2.0, 1.0), (1.0, 1.0)), dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ConfigError("freq_grid: must be a list of [alpha, beta] pairs")
    horizon = float(grid[-1])

    def path(seed: SeedSpec) -> np.ndarray:
        return simulate_two_subspace(tp, horizon, grid, seed).state

    est = cf.estimate_charfn(path, grid, pairs, config.n_paths, config.master_seed,
                             n_threads=n_threads)
    rows = []
    referee: dict[str, dict[str, float]] = {v: {} for v in cf.ODE_VARIANTS}
    for j, (alpha, beta) in enumerate(pairs):
        alpha, beta = float(alpha), float(beta)
        label = f"{alpha!r}|{beta!r}"
        for variant in cf.ODE_VARIANTS:
            analytic = cf.two_subspace_charfn(tp.switch_rate, tp.diffusion,
                                              float(alpha), float(beta), grid, variant=variant)
            ratios = []
            for i, t in enumerate(grid):
                row = _comparison_row(t, label, complex(est.mean[i, j]),
                                      float(est.stderr[i, j]), complex(analytic[i]))
                ratios.append(row["sigma_ratio"])
                if variant == "corrected":
                    rows.append(row)
            referee[variant][label] = float(max(ratios))
    report = _summarize(rows)
    report["variant_max_sigma_ratio"] = referee
    return ExperimentResult("subspace-referee", rows, report)


def run_delay_msd(config: ExperimentConfig, n_threads: int = 1) -> ExperimentResult:
    """Mean-square displacement of the product-gated diffusion vs. closed form."""
    params = dict(config.parameters)
    dp = DelayDiffusionParams(
        drift=0.0,
        diffusion=float(params.pop("diffusion", 1.0)),
        driver_rate=(float(params.pop("rate1", 1.0)), float(params.pop("rate2", 1.0))),
    )
    _reject_unknown(params)
    grid = _model_grid(config.t_grid if config.t_grid is not None else (0.0, 0.5, 1.0, 2.0))
    horizon = float(grid[-1])
    mu1, mu2 = dp.driver_rate

    def path(seed: SeedSpec) -> np.ndarray:
        return simulate_delay_diffusion(dp, horizon, grid, seed).state

    est = cf.estimate_moment(path, grid, config.n_paths, config.master_seed, power=2,
                             n_threads=n_threads)
    analytic = cf.mean_square_displacement(dp.diffusion, mu1, mu2, grid)
    rows = [
        _comparison_row(t, "", complex(est.mean[i]), float(est.stderr[i]), complex(analytic[i]))
        for i, t in enumerate(grid)
    ]
    report = _summarize(rows)
    rate_grid = grid[:-1] + 0.5 * np.diff(grid)
    report["msd_rate_analytic"] = {
        "t": rate_grid.tolist(),
        "value": cf.msd_rate(dp.diffusion, mu1, mu2, rate_grid).tolist(),
    }
    report["msd_rate_empirical"] = {
        "t": rate_grid.tolist(),
        "value": (np.diff(est.mean) / np.diff(grid)).tolist(),
    }
    return ExperimentResult("delay-msd", rows, report)


def run_parity_check(config: ExperimentConfig, n_threads: int = 1) -> ExperimentResult:
    """Frequency of even driver counts vs. 0.5 (1 + e^{-2 mu t}).

    Standard errors use the analytic probability (binomial), so the
    tolerance is fixed rather than estimated.
    """
    params = dict(config.parameters)
    rate = float(params.pop("rate", 1.0))
    _reject_unknown(params)
    t_grid = np.asarray(config.t_grid if config.t_grid is not None else (0.5, 1.0, 2.0),
                        dtype=float)
    if np.any(t_grid <= 0) or np.any(np.diff(t_grid) <= 0):
        raise ConfigError("t_grid: must be positive and strictly increasing")
    horizon = float(t_grid[-1])
    intensity = ConstantIntensity(rate)

    def path(seed: SeedSpec) -> np.ndarray:
        return sample_poisson_path(intensity, horizon, seed).count(t_grid).astype(float)

    est = cf.estimate_statistic(path, t_grid, lambda counts: 1.0 * (counts % 2 == 0),
                                config.n_paths, config.master_seed, n_threads=n_threads)
    rows = []
    for i, t in enumerate(t_grid):
        p_even = parity_probability(rate, float(t), "even")
        se = math.sqrt(p_even * (1.0 - p_even) / config.n_paths)
        rows.append(_comparison_row(t, "", complex(est.mean[i]), se, complex(p_even)))
    return ExperimentResult("parity-check", rows, _summarize(rows))


def run_mixture_verify(config: ExperimentConfig, n_threads: int = 1) -> ExperimentResult:
    """Mixture characteristic function vs. simulated indicator draws.

    Draws the indicator vector per path, routes it through the chained
    group to pick a component, and compares the empirical mean of
    exp(i beta g_k) with the mixture formula; the report also carries
    the exhaustive enumeration over all indicator configurations, which
    must agree with the formula to near machine precision.
    """
    params = dict(config.parameters)
    q = np.asarray(params.pop("q", (0.2, 0.375)), dtype=float)
    beta = float(params.pop("beta", 1.0))
    components = np.asarray(params.pop("components", tuple(range(1, len(q) + 2))), dtype=float)
    _reject_unknown(params)
    if len(components) != len(q) + 1:
        raise ConfigError("components: need one more component than indicator probabilities")

    phi = np.exp(1j * beta * components)
    analytic = cf.mixture_charfn(q, phi)
    enum = _enumerate_mixture(q, phi)

    def worker(start: int, stop: int):
        total = 0.0 + 0.0j
        total_re2 = 0.0
        total_im2 = 0.0
        for i in range(start, stop):
            rng = derive_path_rng(SeedSpec(config.master_seed, i))
            chi = rng.uniform(size=len(q)) < q
            k = _first_active(chi)
            z = phi[k]
            total += z
            total_re2 += z.real**2
            total_im2 += z.imag**2
        return total, total_re2, total_im2

    total, re2, im2 = 0.0 + 0.0j, 0.0, 0.0
    for s, a, b in cf._map_chunks(worker, config.n_paths, n_threads, cf.CHUNK_SIZE):
        total, re2, im2 = total + s, re2 + a, im2 + b
    n = config.n_paths
    mc = total / n
    var_re = max(re2 - total.real**2 / n, 0.0) / (n - 1)
    var_im = max(im2 - total.imag**2 / n, 0.0) / (n - 1)
    stderr = math.sqrt(max(var_re, var_im) / n)

    rows = [_comparison_row(0.0, repr(beta), mc, stderr, analytic)]
    report = _summarize(rows)
    report["enumeration_re"] = float(enum.real)
    report["enumeration_im"] = float(enum.imag)
    report["formula_vs_enumeration"] = float(abs(analytic - enum))
    report["pass"] = bool(report["pass"] and report["formula_vs_enumeration"] <= 1e-12)
    return ExperimentResult("mixture-verify", rows, report)


def _first_active(chi) -> int:
    for k, value in enumerate(chi):
        if value:
            return k
    return len(chi)


def _enumerate_mixture(q: np.ndarray, phi: np.ndarray) -> complex:
    """Exact E[phi_K] by summing over all 2^(n-1) indicator configurations."""
    total = 0.0 + 0.0j
    for bits in range(1 << len(q)):
        chi = [(bits >> j) & 1 for j in range(len(q))]
        prob = math.prod(q[j] if chi[j] else 1.0 - q[j] for j in range(len(q)))
        total += prob * phi[_first_active(chi)]
    return total


def run_map_verify(config: ExperimentConfig, n_threads: int = 1) -> ExperimentResult:
    """Round-trip and synthesis check for class-probability targets."""
    params = dict(config.parameters)
    p = np.asarray(params.pop("p", (0.2, 0.3, 0.5)), dtype=float)
    horizon = float(params.pop("horizon", 1.0))
    _reject_unknown(params)

    synthesis = mapping.synthesize_and_verify(p, horizon, config.n_paths, config.master_seed,
                                              n_threads=n_threads)
    round_trip = float(np.max(np.abs(mapping.indicator_to_group(mapping.group_to_indicator(p)) - p)))
    rows = []
    for j in range(len(p)):
        rows.append(_comparison_row(horizon, str(j), complex(synthesis["empirical"][j]),
                                    synthesis["stderr"][j], complex(p[j])))
    report = _summarize(rows)
    report["synthesis"] = synthesis
    report["round_trip_error"] = round_trip
    report["pass"] = bool(report["pass"] and synthesis["pass"] and round_trip <= 1e-12)
    return ExperimentResult("map-verify", rows, report)


def _reject_unknown(params: dict) -> None:
    if params:
        raise ConfigError(f"parameters: unknown entries {sorted(params)}")


EXPERIMENTS: dict[str, Callable[..., ExperimentResult]] = {
    "kac-verify": run_kac_verify,
    "subspace-referee": run_subspace_referee,
    "delay-msd": run_delay_msd,
    "parity-check": run_parity_check,
    "mixture-verify": run_mixture_verify,
    "map-verify": run_map_verify,
}


def run_experiment(config: ExperimentConfig, n_threads: int = 1) -> ExperimentResult:
    """Dispatch an experiment and attach run metadata to its report."""
    started = time.perf_counter()
    result = EXPERIMENTS[config.experiment](config, n_threads=n_threads)
    result.report.update(
        experiment=config.experiment,
        n_paths=config.n_paths,
        master_seed=config.master_seed,
        low_power=bool(config.n_paths < LOW_POWER_PATHS),
        wall_time_s=time.perf_counter() - started,
    )
    return result


def write_results_csv(rows: list, file) -> None:
    """Uniform per-cell comparison table; floats round-trip exactly."""
    writer = csv.writer(file)
    writer.writerow(RESULT_COLUMNS)
    for row in rows:
        writer.writerow([
            row[col] if isinstance(row[col], str) else repr(float(row[col]))
            for col in RESULT_COLUMNS
        ])


def read_results_csv(file) -> list:
    rows = []
    for record in csv.DictReader(file):
        row = dict(record)
        for col in RESULT_COLUMNS:
            if col != "freq":
                row[col] = float(row[col])
        rows.append(row)
    return rows


def write_report_json(report: dict, file) -> None:
    json.dump(report, file, indent=2, sort_keys=True)
    file.write("\n")


def plotdata_rows(report: dict, rows: list) -> list[tuple[str, float, float]]:
    """Long-format (series, t, value) records for external plotting."""
    out = []
    for row in rows:
        tag = f"@f={row['freq']}" if row["freq"] else ""
        for col in ("re_mean", "im_mean", "stderr", "re_analytic", "im_analytic",
                    "abs_error", "sigma_ratio"):
            out.append((f"{col}{tag}", row["t"], row[col]))
    for series in ("msd_rate_analytic", "msd_rate_empirical"):
        if series in report:
            for t, value in zip(report[series]["t"], report[series]["value"]):
                out.append((series, float(t), float(value)))
    return out


def write_plotdata_csv(records: list, file) -> None:
    writer = csv.writer(file)
    writer.writerow(("series", "t", "value"))
    for series, t, value in records:
        writer.writerow((series, repr(float(t)), repr(float(value))))
