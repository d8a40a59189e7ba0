"""Simulators for the four indicator-gated stochastic models.

The direction-flipping transport model, the gated ("delay-center")
diffusion and the two-subspace diffusion are simulated exactly: event
times of the driving Poisson process are used as-is, and Gaussian
increments carry the exact per-interval variance, so no time-step bias
enters the sampled laws.  A generic Euler-Maruyama stepper covers
arbitrary switching drift/diffusion pairs and doubles as a convergence
cross-check for the exact schemes.

Per-path randomness is consumed in a documented, fixed order (driver
events first, Gaussian increments second), so every trajectory is a
pure function of its SeedSpec.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .indicator import IndicatorSpec, indicator_intervals
from .sampling import (
    ConstantIntensity,
    JumpPath,
    SeedSpec,
    _homogeneous_event_times,
    derive_path_rng,
)


class IntegrationBlowupError(RuntimeError):
    """Euler state left the finite range; message names the failing step."""


@dataclass(frozen=True)
class Trajectory:
    """One simulated path: time grid, state values, and its seed.

    ``state`` has shape (n,) for scalar models and (n, 2) for the
    two-subspace model.  ``wiener`` holds the cumulative driving Wiener
    path at the grid times when the model exposes it.
    """

    grid: np.ndarray
    state: np.ndarray
    seed: SeedSpec
    model_tag: str
    wiener: np.ndarray | None = None


@dataclass(frozen=True)
class TabulatedCurve:
    """Piecewise-linear time function with exact integrals.

    Values outside the tabulated range continue the nearest endpoint.
    ``integral`` and ``square_integral`` are exact for the interpolant,
    which keeps the event-driven simulators free of quadrature error.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or times.shape != values.shape or len(times) < 2:
            raise ValueError("times and values must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(times) <= 0):
            raise ValueError("curve times must be strictly increasing")

    def __call__(self, t):
        return np.interp(t, self.times, self.values)

    def _pieces(self, lo: float, hi: float):
        inner = self.times[(self.times > lo) & (self.times < hi)]
        pts = np.concatenate(([lo], inner, [hi]))
        return pts, self(pts)

    def integral(self, lo: float, hi: float) -> float:
        """Exact integral of the interpolant over [lo, hi]."""
        if hi < lo:
            raise ValueError("hi must be >= lo")
        pts, vals = self._pieces(lo, hi)
        return float(np.trapezoid(vals, pts))

    def square_integral(self, lo: float, hi: float) -> float:
        """Exact integral of the squared interpolant over [lo, hi]."""
        if hi < lo:
            raise ValueError("hi must be >= lo")
        pts, vals = self._pieces(lo, hi)
        widths = np.diff(pts)
        v0, v1 = vals[:-1], vals[1:]
        return float(np.sum(widths * (v0 * v0 + v0 * v1 + v1 * v1) / 3.0))


TimeCoefficient = float | TabulatedCurve


def _check_grid(grid, horizon: float) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0 or grid[0] != 0.0:
        raise ValueError("grid must be 1-d and start at 0")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[-1] > horizon:
        raise ValueError(f"grid extends past horizon {horizon}")
    return grid


@dataclass(frozen=True)
class KacParams:
    """Constant-speed transport whose direction flips at Poisson events."""

    speed: float
    switch_rate: float

    def __post_init__(self):
        if self.speed <= 0 or self.switch_rate <= 0:
            raise ValueError("speed and switch_rate must be > 0")


def simulate_kac(params: KacParams, horizon: float, grid, seed: SeedSpec) -> Trajectory:
    """Exact piecewise-linear path of the direction-flipping motion.

    Velocity is +speed while the driving count is even and -speed while
    it is odd; x(0) = 0.  The path is integrated between exact event
    times, so |x(t)| <= speed * t holds on every path.
    """
    grid = _check_grid(grid, horizon)
    rng = derive_path_rng(seed)
    events = _homogeneous_event_times(params.switch_rate, horizon, rng)

    breakpoints = np.concatenate((np.zeros(1), events))
    segment_sign = np.where(np.arange(len(breakpoints)) % 2 == 0, 1.0, -1.0)
    # position (in units of speed) at each breakpoint
    pos = np.concatenate((np.zeros(1), np.cumsum(segment_sign[:-1] * np.diff(breakpoints))))
    idx = np.searchsorted(events, grid, side="right")
    x = params.speed * (pos[idx] + segment_sign[idx] * (grid - breakpoints[idx]))
    return Trajectory(grid, x, seed, "kac")


@dataclass(frozen=True)
class DelayDiffusionParams:
    """Diffusion whose noise is gated by a parity indicator.

    ``driver_rate`` is either a single Poisson rate or a (rate1, rate2)
    pair, in which case the gate follows the parity of the product of
    the two counts.  ``indicator_shift=1`` starts the gate closed
    instead of open.  Drift acts at all times; only the noise is gated.
    """

    drift: TimeCoefficient = 0.0
    diffusion: TimeCoefficient = 1.0
    driver_rate: float | tuple[float, float] = 1.0
    indicator_shift: int = 0

    def __post_init__(self):
        rates = self.driver_rate if isinstance(self.driver_rate, tuple) else (self.driver_rate,)
        if any(r < 0 for r in rates):
            raise ValueError("driver rates must be >= 0")
        if isinstance(self.diffusion, float | int) and self.diffusion < 0:
            raise ValueError("constant diffusion must be >= 0")
        if self.indicator_shift not in (0, 1):
            raise ValueError("indicator_shift must be 0 or 1")


def _coefficient_integral(coef: TimeCoefficient, lo: float, hi: float, squared: bool) -> float:
    if isinstance(coef, TabulatedCurve):
        return coef.square_integral(lo, hi) if squared else coef.integral(lo, hi)
    c = float(coef)
    return (c * c if squared else c) * (hi - lo)


def _delay_gate_intervals(params: DelayDiffusionParams, horizon: float,
                          rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Sample the driver(s) and return the gate as a step function.

    Returns (starts, open) with starts[0] = 0; the gate holds the value
    open[k] on [starts[k], starts[k+1]).  For a product driver the gate
    follows the parity of the product of the two counts, evaluated at
    every event of either driver (product jumps can exceed 1, so parity
    does not simply alternate).
    """
    if isinstance(params.driver_rate, tuple):
        r1, r2 = params.driver_rate
        events1 = _homogeneous_event_times(r1, horizon, rng)
        events2 = _homogeneous_event_times(r2, horizon, rng)
        starts = np.concatenate((np.zeros(1), np.union1d(events1, events2)))
        counts = np.searchsorted(events1, starts, side="right") * np.searchsorted(
            events2, starts, side="right"
        )
    else:
        events = _homogeneous_event_times(params.driver_rate, horizon, rng)
        starts = np.concatenate((np.zeros(1), events))
        counts = np.arange(len(starts))
    return starts, (counts + params.indicator_shift) % 2 == 0


def simulate_delay_diffusion(
    params: DelayDiffusionParams, horizon: float, grid, seed: SeedSpec
) -> Trajectory:
    """Gated diffusion, exact in distribution at the grid times.

    Drift accumulates over every cell; the Gaussian part of a cell
    carries variance equal to the integral of diffusion^2 over the
    sub-intervals where the gate is open, computed from exact event
    times.  One Gaussian draw per grid cell.
    """
    grid = _check_grid(grid, horizon)
    rng = derive_path_rng(seed)
    starts, open_values = _delay_gate_intervals(params, horizon, rng)

    # split [0, grid end] at gate changes and grid points
    pts = np.union1d(grid, starts[starts <= grid[-1]])
    open_gate = open_values[np.searchsorted(starts, pts[:-1], side="right") - 1]
    cell = np.searchsorted(grid, pts[:-1], side="right") - 1
    n_cells = len(grid) - 1

    if isinstance(params.drift, TabulatedCurve) or isinstance(params.diffusion, TabulatedCurve):
        variances = np.zeros(n_cells)
        drift_int = np.zeros(n_cells)
        for k in range(len(pts) - 1):
            drift_int[cell[k]] += _coefficient_integral(
                params.drift, pts[k], pts[k + 1], squared=False
            )
            if open_gate[k]:
                variances[cell[k]] += _coefficient_integral(
                    params.diffusion, pts[k], pts[k + 1], squared=True
                )
    else:
        widths = np.diff(pts)
        drift_int = float(params.drift) * np.diff(grid)
        open_width = np.bincount(cell[open_gate], weights=widths[open_gate], minlength=n_cells)
        variances = float(params.diffusion) ** 2 * open_width

    gauss = np.sqrt(variances) * rng.standard_normal(n_cells)
    state = np.concatenate((np.zeros(1), np.cumsum(drift_int + gauss)))
    return Trajectory(grid, state, seed, "delay_diffusion")


@dataclass(frozen=True)
class TwoSubspaceParams:
    """Diffusion that alternates between two components at Poisson events."""

    diffusion: float
    switch_rate: float

    def __post_init__(self):
        if self.diffusion <= 0 or self.switch_rate <= 0:
            raise ValueError("diffusion and switch_rate must be > 0")


def simulate_two_subspace(
    params: TwoSubspaceParams, horizon: float, grid, seed: SeedSpec
) -> Trajectory:
    """Two-component gated diffusion driven by one shared Wiener stream.

    Between consecutive gate changes one Gaussian increment with the
    exact sub-interval variance is drawn; it lands in x while the gate
    is open (even count) and in y while closed.  Consequently
    x + y = diffusion * w pathwise, with w the accumulated stream,
    which is returned in ``Trajectory.wiener``.
    """
    grid = _check_grid(grid, horizon)
    rng = derive_path_rng(seed)
    events = _homogeneous_event_times(params.switch_rate, horizon, rng)
    events = events[events <= grid[-1]]

    pts = np.union1d(grid, events)
    increments = np.sqrt(np.diff(pts)) * rng.standard_normal(len(pts) - 1)
    open_gate = np.searchsorted(events, pts[:-1], side="right") % 2 == 0

    b = params.diffusion
    x_cum = np.concatenate((np.zeros(1), np.cumsum(np.where(open_gate, b * increments, 0.0))))
    y_cum = np.concatenate((np.zeros(1), np.cumsum(np.where(open_gate, 0.0, b * increments))))
    w_cum = np.concatenate((np.zeros(1), np.cumsum(increments)))

    at = np.searchsorted(pts, grid)
    state = np.column_stack((x_cum[at], y_cum[at]))
    return Trajectory(grid, state, seed, "two_subspace", wiener=w_cum[at])


StateFn = Callable[..., float]


@dataclass(frozen=True)
class SwitchingSdeSpec:
    """Euler-Maruyama problem with indicator-switched coefficients.

    In the default (single-component) form the state follows

        dx = [chi1 a_on(x,t) + (1-chi1) a_off(x,t)] dt
           + [chi2 b_on(x,t) + (1-chi2) b_off(x,t)] dw,

    with chi1 driven by ``drift_indicator`` and chi2 by
    ``diff_indicator`` (``None`` reuses the drift indicator's path, the
    identical-gate configuration).  With ``coupled=True`` the state is a
    pair and the single gate routes whole drift+noise packages:

        dx = chi   [a_on(x,y,t) dt + b_on(x,y,t) dw]
        dy = (1-chi)[a_off(x,y,t) dt + b_off(x,y,t) dw],

    both components sharing one Wiener stream.  Coefficients may be
    plain floats.  Indicator values are frozen at each step's left
    endpoint.  Pick dt well below 1/(100 * max driver rate) when the
    switching bias matters.
    """

    drift_on: StateFn | float
    drift_off: StateFn | float
    diff_on: StateFn | float
    diff_off: StateFn | float
    drift_indicator: IndicatorSpec
    diff_indicator: IndicatorSpec | None
    dt: float
    x0: float | tuple[float, float] = 0.0
    coupled: bool = False

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.coupled and not isinstance(self.x0, tuple):
            object.__setattr__(self, "x0", (float(self.x0), float(self.x0)))


def _as_fn(value) -> StateFn:
    if callable(value):
        return value
    const = float(value)
    return lambda *args: const


def _sample_indicator_path(spec: IndicatorSpec, horizon: float, rng: np.random.Generator):
    """Driver path(s) for an indicator, drawn from an open generator."""
    def one(intensity) -> JumpPath:
        if not isinstance(intensity, ConstantIntensity):
            raise ValueError("switching SDE indicators need constant-rate drivers")
        times = _homogeneous_event_times(intensity.rate, horizon, rng)
        return JumpPath(horizon, times, np.ones(len(times), dtype=np.int64))

    if spec.is_product:
        return one(spec.driver[0]), one(spec.driver[1])
    return one(spec.driver)


def simulate_switching_sde(spec: SwitchingSdeSpec, horizon: float, seed: SeedSpec) -> Trajectory:
    """Euler-Maruyama integration of the switched SDE.

    Steps of size dt (last step shortened to hit the horizon); raises
    IntegrationBlowupError naming the step if the state leaves the
    finite range.
    """
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    rng = derive_path_rng(seed)
    drift_paths = _sample_indicator_path(spec.drift_indicator, horizon, rng)
    if spec.diff_indicator is None:
        diff_spec, diff_paths = spec.drift_indicator, drift_paths
    else:
        diff_spec, diff_paths = spec.diff_indicator, _sample_indicator_path(
            spec.diff_indicator, horizon, rng
        )

    n_steps = int(np.ceil(horizon / spec.dt - 1e-12))
    grid = np.minimum(np.arange(n_steps + 1) * spec.dt, horizon)
    grid[-1] = horizon

    starts1, chi1 = indicator_intervals(spec.drift_indicator, drift_paths, horizon)
    starts2, chi2 = indicator_intervals(diff_spec, diff_paths, horizon)
    lefts = grid[:-1]
    chi1_at = chi1[np.searchsorted(starts1, lefts, side="right") - 1]
    chi2_at = chi2[np.searchsorted(starts2, lefts, side="right") - 1]

    a_on, a_off = _as_fn(spec.drift_on), _as_fn(spec.drift_off)
    b_on, b_off = _as_fn(spec.diff_on), _as_fn(spec.diff_off)
    dw = np.sqrt(np.diff(grid)) * rng.standard_normal(n_steps)

    if spec.coupled:
        x, y = spec.x0
        states = np.empty((n_steps + 1, 2))
        states[0] = (x, y)
        for k in range(n_steps):
            t, h = lefts[k], grid[k + 1] - grid[k]
            on = chi1_at[k]
            dx = on * (a_on(x, y, t) * h + b_on(x, y, t) * dw[k])
            dy = (1 - on) * (a_off(x, y, t) * h + b_off(x, y, t) * dw[k])
            x, y = x + dx, y + dy
            if not (np.isfinite(x) and np.isfinite(y)):
                raise IntegrationBlowupError(f"non-finite state at step {k + 1}, t={grid[k + 1]:.6g}")
            states[k + 1] = (x, y)
        return Trajectory(grid, states, seed, "switching_sde")

    x = float(spec.x0)
    states = np.empty(n_steps + 1)
    states[0] = x
    for k in range(n_steps):
        t, h = lefts[k], grid[k + 1] - grid[k]
        drift = chi1_at[k] * a_on(x, t) + (1 - chi1_at[k]) * a_off(x, t)
        diff = chi2_at[k] * b_on(x, t) + (1 - chi2_at[k]) * b_off(x, t)
        x = x + drift * h + diff * dw[k]
        if not np.isfinite(x):
            raise IntegrationBlowupError(f"non-finite state at step {k + 1}, t={grid[k + 1]:.6g}")
        states[k + 1] = x
    return Trajectory(grid, states, seed, "switching_sde")


def write_trajectories_csv(trajectories: Iterable[Trajectory], file) -> None:
    """Write trajectories as long-format CSV: t, state columns, path_index.

    Floats are written with shortest round-trip formatting, so parsing
    the file back reproduces the values exactly.
    """
    writer = csv.writer(file)
    header = None
    for traj in trajectories:
        state = traj.state if traj.state.ndim == 2 else traj.state[:, np.newaxis]
        if header is None:
            names = ["x"] if state.shape[1] == 1 else ["x", "y"][: state.shape[1]]
            header = ["t", *names, "path_index"]
            writer.writerow(header)
        for i, t in enumerate(traj.grid):
            writer.writerow([repr(float(t)), *(repr(float(v)) for v in state[i]),
                             traj.seed.path_index])
