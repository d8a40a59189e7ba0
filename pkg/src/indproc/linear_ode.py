"""Closed-form and numeric solutions of y'' + p y' + q y = 0.

All arithmetic is complex, so under/over-damped and oscillatory cases
need no special handling; only a (numerically) repeated root switches
the solution to the (C1 + C2 t) e^{rt} form.  The RK4 integrator exists
as an independent cross-check for the closed form and never shares code
with it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Linear2Ivp:
    """Initial value problem y'' + p y' + q y = 0, y(0)=y0, y'(0)=dy0."""

    p: complex
    q: complex
    y0: complex
    dy0: complex

    def __post_init__(self):
        for name in ("p", "q", "y0", "dy0"):
            if not np.isfinite(complex(getattr(self, name))):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class ClosedFormSolution:
    """Evaluable solution: C1 e^{r1 t} + C2 e^{r2 t}, or (C1 + C2 t) e^{r1 t}."""

    r1: complex
    r2: complex
    c1: complex
    c2: complex
    repeated_root: bool

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.repeated_root:
            value = (self.c1 + self.c2 * t) * np.exp(self.r1 * t)
        else:
            value = self.c1 * np.exp(self.r1 * t) + self.c2 * np.exp(self.r2 * t)
        return complex(value) if t.ndim == 0 else value

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.repeated_root:
            value = (self.c2 + self.r1 * (self.c1 + self.c2 * t)) * np.exp(self.r1 * t)
        else:
            value = self.c1 * self.r1 * np.exp(self.r1 * t) + self.c2 * self.r2 * np.exp(self.r2 * t)
        return complex(value) if t.ndim == 0 else value


def solve_linear2(ivp: Linear2Ivp, root_tol: float = 1e-9) -> ClosedFormSolution:
    """Solve the IVP in closed form via the characteristic roots.

    Roots closer than ``root_tol`` relative to their magnitude are
    treated as repeated.
    """
    p, q = complex(ivp.p), complex(ivp.q)
    disc = np.sqrt(complex(p * p - 4.0 * q))
    r1 = 0.5 * (-p + disc)
    r2 = 0.5 * (-p - disc)
    scale = max(abs(r1), abs(r2), 1.0)
    if abs(r1 - r2) <= root_tol * scale:
        r = -0.5 * p
        c1 = complex(ivp.y0)
        c2 = complex(ivp.dy0) - r * c1
        return ClosedFormSolution(r, r, c1, c2, repeated_root=True)
    c2 = (complex(ivp.dy0) - r1 * complex(ivp.y0)) / (r2 - r1)
    c1 = complex(ivp.y0) - c2
    return ClosedFormSolution(r1, r2, c1, c2, repeated_root=False)


def integrate_linear2_rk4(ivp: Linear2Ivp, t_grid, max_step: float = 1e-3) -> np.ndarray:
    """Classical RK4 on the first-order system (y, y') of the IVP.

    Advances between requested grid times with uniform internal substeps
    of size <= max_step.  Choose max_step well below the characteristic
    time 1/max(|p|, sqrt(|q|)) — the default suits coefficients of order
    a few.  Raises on non-finite intermediate values.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0:
        raise ValueError("t_grid must be a non-empty 1-d array")
    if np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be strictly increasing and non-negative")
    p, q = complex(ivp.p), complex(ivp.q)

    def rhs(state):
        return np.array([state[1], -p * state[1] - q * state[0]])

    state = np.array([complex(ivp.y0), complex(ivp.dy0)])
    out = np.empty(len(t_grid), dtype=complex)
    t = 0.0
    for i, target in enumerate(t_grid):
        span = target - t
        if span > 0:
            n_sub = max(1, int(np.ceil(span / max_step)))
            h = span / n_sub
            for _ in range(n_sub):
                k1 = rhs(state)
                k2 = rhs(state + 0.5 * h * k1)
                k3 = rhs(state + 0.5 * h * k2)
                k4 = rhs(state + h * k3)
                state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(state)):
                raise FloatingPointError(f"integration blew up before t={target}")
            t = target
        out[i] = state[0]
    return out
