"""Derivative-free Powell minimizer used for the variational angle search.

Classic direction-set method: cycle through a direction basis doing
one-dimensional line minimizations, then try the net displacement of the
cycle and replace the direction that produced the largest single decrease.
Deterministic given the objective, so seeded runs reproduce exactly.

The line search brackets within [-bracket_bound, +bracket_bound] around the
current point (bounded Brent via scipy). Angles here live on circles, so a
bound of 2*pi reaches every value of a periodic coordinate in one step; for
non-periodic objectives multiple iterations accumulate displacement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar


@dataclass(frozen=True)
class OptimizerConfig:
    """Caps and tolerances for one optimization run.

    max_iterations counts full Powell cycles; max_evaluations counts
    objective calls and defaults to 20x the iteration cap. Whichever trips
    first stops the run with converged=False.
    """

    max_iterations: int = 1500
    x_tolerance: float = 1e-4
    f_tolerance: float = 1e-6
    bracket_bound: float = 2.0 * math.pi
    max_evaluations: int | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.x_tolerance <= 0 or self.f_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.bracket_bound <= 0:
            raise ValueError("bracket_bound must be positive")
        if self.max_evaluations is not None and self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1 when given")

    @property
    def evaluation_cap(self) -> int:
        if self.max_evaluations is not None:
            return self.max_evaluations
        return 20 * self.max_iterations


@dataclass
class OptimizationResult:
    best_parameters: np.ndarray
    best_value: float
    evaluations: int
    iterations: int
    converged: bool


class _BudgetExhausted(Exception):
    pass


class _CountingObjective:
    """Wraps the objective: counts calls, tracks the best point ever seen,
    and raises once the evaluation budget is spent."""

    def __init__(self, fn: Callable[[np.ndarray], float], cap: int):
        self._fn = fn
        self._cap = cap
        self.calls = 0
        self.best_x: np.ndarray | None = None
        self.best_f = math.inf

    def __call__(self, x: np.ndarray) -> float:
        if self.calls >= self._cap:
            raise _BudgetExhausted
        self.calls += 1
        value = float(self._fn(np.asarray(x, dtype=float)))
        if not math.isfinite(value):
            raise ValueError(f"objective returned non-finite value {value!r} at {x!r}")
        if value < self.best_f:
            self.best_f = value
            self.best_x = np.array(x, dtype=float)
        return value


_GRID_POINTS = 25  # odd, so t = 0 is always sampled


def _line_minimize(fn: _CountingObjective, x: np.ndarray, fx: float,
                   direction: np.ndarray, bound: float, xatol: float
                   ) -> tuple[np.ndarray, float]:
    """min over t in [-bound, bound] of f(x + t d); returns (new x, new f).

    Variational angle slices oscillate over the bracket, so a bare Brent run
    would latch onto whichever local valley it brackets first. A coarse
    uniform scan picks the best valley; bounded Brent then refines inside
    the surrounding grid cell. The move is taken only if it improves on
    f(x), i.e. on the (always sampled) t = 0 grid point.
    """
    grid = np.linspace(-bound, bound, _GRID_POINTS)
    best_t, best_f = 0.0, fx
    best_i = _GRID_POINTS // 2
    for i, t in enumerate(grid):
        if t == 0.0:
            continue
        f = fn(x + t * direction)
        if f < best_f:
            best_t, best_f, best_i = t, f, i
    lo = grid[max(0, best_i - 1)]
    hi = grid[min(_GRID_POINTS - 1, best_i + 1)]
    res = minimize_scalar(
        lambda t: fn(x + t * direction),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": xatol},
    )
    if res.fun < best_f:
        best_t, best_f = float(res.x), float(res.fun)
    if best_f < fx:
        return x + best_t * direction, best_f
    return x, fx


def powell_minimize(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    config: OptimizerConfig | None = None,
    direction_order: Sequence[int] | None = None,
) -> OptimizationResult:
    """Minimize `objective` from `x0` under `config` caps.

    best_value is the smallest objective value over every evaluation made,
    so it never exceeds objective(x0); converged=True only when an f- or
    x-tolerance test passed before a cap tripped.

    direction_order permutes the initial coordinate direction set. Callers
    that append fresh coordinates to a warm start (the layer-growing
    engines) put the newest coordinates first, so they get line searches
    even if the evaluation budget dies mid-cycle.
    """
    cfg = config or OptimizerConfig()
    x = np.asarray(x0, dtype=float).copy()
    if x.ndim != 1 or x.size == 0:
        raise ValueError("x0 must be a non-empty 1-D vector")
    fn = _CountingObjective(objective, cfg.evaluation_cap)
    xatol = max(1e-10, 0.1 * cfg.x_tolerance)

    if direction_order is None:
        order = list(range(x.size))
    else:
        order = [int(i) for i in direction_order]
        if sorted(order) != list(range(x.size)):
            raise ValueError("direction_order must be a permutation of the coordinates")
    directions = [np.eye(x.size)[i] for i in order]
    converged = False
    iterations = 0
    try:
        fx = fn(x)
        for _ in range(cfg.max_iterations):
            iterations += 1
            x_start, f_start = x.copy(), fx
            biggest_drop = 0.0
            biggest_index = 0
            for i, d in enumerate(directions):
                x_new, f_new = _line_minimize(fn, x, fx, d, cfg.bracket_bound, xatol)
                if fx - f_new > biggest_drop:
                    biggest_drop = fx - f_new
                    biggest_index = i
                x, fx = x_new, f_new
            net = x - x_start
            net_norm = float(np.linalg.norm(net))
            if net_norm > 0:
                x, fx = _line_minimize(
                    fn, x, fx, net / net_norm, cfg.bracket_bound, xatol
                )
                directions[biggest_index] = net / net_norm
            # Relative f-progress or absolute x-progress below tolerance.
            if 2.0 * (f_start - fx) <= cfg.f_tolerance * (abs(f_start) + abs(fx) + 1e-20):
                converged = True
                break
            if float(np.max(np.abs(x - x_start))) <= cfg.x_tolerance:
                converged = True
                break
    except _BudgetExhausted:
        converged = False

    best_x = fn.best_x if fn.best_x is not None else x
    return OptimizationResult(
        best_parameters=np.asarray(best_x, dtype=float),
        best_value=fn.best_f,
        evaluations=fn.calls,
        iterations=iterations,
        converged=converged,
    )
