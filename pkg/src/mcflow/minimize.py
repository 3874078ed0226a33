"""Energy-minimization time stepping and the coarse-to-fine multilevel solver.

A time step is taken by minimizing the selected step functional over the
nodal values, with Newton directions globalized by a backtracking line
search on the functional value (steepest descent when the Newton direction
fails to descend).  The multilevel variant minimizes the plain functional
on a sequence of grids with decreasing interaction length: the coarse
problems are kept in the convex regime, so the first level forgets a bad
initial guess, and each minimizer is interpolated as the guess for the
next level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._nonlinear import solve_newton_system
from .backend import active
from .discretization import Field, GridSpec, _same_grid, prolongate, restrict
from .energy import Functional, StepParams, _j_eps_arr, gradient_coefficients
from .errors import ConfigError, ConvergenceError, GridMismatchError
from .schemes import EvolutionRecord, _is_uniform_phase, _snapshot_steps

MAX_OUTER_ITERATIONS = 200
ARMIJO_C = 1e-4
MAX_HALVINGS = 30


@dataclass(frozen=True)
class MultilevelSchedule:
    """Ordered (grid, eps) levels, coarse to fine; the last is the target."""

    levels: tuple

    def __post_init__(self):
        if len(self.levels) < 1:
            raise ValueError("schedule needs at least one level")
        prev_h = None
        box = self.levels[0][0]
        for grid, eps in self.levels:
            if not isinstance(grid, GridSpec):
                raise TypeError("levels must be (GridSpec, eps) pairs")
            if eps <= 0.0:
                raise ValueError(f"level eps must be positive, got {eps}")
            if not grid.same_box(box):
                raise ValueError("all levels must share the domain box")
            if prev_h is not None and grid.h >= prev_h:
                raise ValueError(
                    f"level spacings must strictly decrease, got h={grid.h} "
                    f"after h={prev_h}")
            prev_h = grid.h

    @classmethod
    def from_spacings(cls, pairs, box=(-0.5, 0.5, -0.5, 0.5)) -> "MultilevelSchedule":
        """Build a schedule from (h, eps) pairs; h is realized as 1/round(L/h)."""
        levels = tuple((GridSpec.for_spacing(h, box), float(eps))
                       for h, eps in pairs)
        return cls(levels)

    @property
    def target_grid(self) -> GridSpec:
        return self.levels[-1][0]

    @property
    def target_eps(self) -> float:
        return self.levels[-1][1]


@dataclass
class MinimizeReport:
    outer_iterations: int
    final_gradient_norm: float
    energy_trace: list = field(default_factory=list)


def minimize_functional(selector: Functional, u_guess: Field, u_prev: Field,
                        p: StepParams, tol: float,
                        max_iter: int = MAX_OUTER_ITERATIONS):
    """Minimize the selected step functional from u_guess.

    Returns (field, report); the field's gradient has lumped norm <= tol
    and the report's energy trace is a descent sequence.
    """
    _same_grid(u_guess, u_prev)
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if selector is Functional.SCALED_REMARK and p.delta >= 1.0:
        raise ValueError("delta must be < 1 for the free-energy-difference penalty")

    K = active()
    grid = u_guess.grid
    w = grid.lumped_weights
    inv_h2 = 1.0 / grid.h ** 2
    inv_k = 1.0 / p.k
    inv_eps2 = 1.0 / p.eps ** 2
    lap_coef, well_coef = gradient_coefficients(selector, p)
    up = u_prev.values

    # Every functional is lap_coef*Dirichlet + well_coef*int F + proximal
    # plus a u-independent offset (which keeps the traces honest).
    if selector is Functional.PENALIZED:
        offset = -p.delta * inv_eps2 * K.weighted_well(w, up)
    elif selector is Functional.SCALED_REMARK:
        offset = p.delta * _j_eps_arr(up, w, inv_eps2)
    else:
        offset = 0.0

    def energy_of(u):
        return (lap_coef * K.dirichlet(u) + well_coef * K.weighted_well(w, u)
                + 0.5 * inv_k * K.weighted_sqdiff(w, u, up) + offset)

    u = u_guess.values.copy()
    g = np.empty_like(u)
    K.step_gradient(u, up, inv_k, lap_coef, well_coef, inv_h2, g)
    norm = np.sqrt(max(K.weighted_dot(w, g, g), 0.0))
    e = energy_of(u)
    trace = [e]
    cg_cap = 10 * grid.npts

    for it in range(max_iter):
        if norm <= tol:
            return (Field._wrap(grid, u),
                    MinimizeReport(it, norm, trace))
        diag = well_coef * (3.0 * u * u - 1.0)
        d = solve_newton_system(K, -g, w, inv_k, lap_coef, diag, inv_h2,
                                tol_abs=max(1e-4 * norm, 0.01 * tol),
                                max_iter=cg_cap, lev0=1e-8 * inv_k)
        slope = K.weighted_dot(w, g, d)
        if slope >= 0.0:
            d = -g
            slope = -norm * norm
        t = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            u_try = u + t * d
            if np.isfinite(u_try).all():
                e_try = energy_of(u_try)
                if np.isfinite(e_try) and e_try <= e + ARMIJO_C * t * slope:
                    u = u_try
                    e = e_try
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            raise ConvergenceError(
                f"minimization stagnated: no descent step found at gradient "
                f"norm {norm:.3e}",
                report=MinimizeReport(it + 1, norm, trace))
        trace.append(e)
        K.step_gradient(u, up, inv_k, lap_coef, well_coef, inv_h2, g)
        norm = np.sqrt(max(K.weighted_dot(w, g, g), 0.0))

    if norm <= tol:
        return Field._wrap(grid, u), MinimizeReport(max_iter, norm, trace)
    raise ConvergenceError(
        f"minimization did not reach gradient tol={tol:.1e} within "
        f"{max_iter} iterations (norm {norm:.3e})",
        report=MinimizeReport(max_iter, norm, trace))


def step_minimization(u_prev: Field, p: StepParams, tol: float) -> Field:
    """One minimization time step, using u_prev as the initial guess."""
    u, _ = minimize_functional(p.functional, u_prev, u_prev, p, tol)
    return u


def multilevel_step(u_prev_fine: Field, guess: Field,
                    schedule: MultilevelSchedule, p: StepParams,
                    tol: float) -> Field:
    """One time step via coarse-to-fine minimization of the plain functional.

    The first level starts from ``guess`` (given on the coarsest or the
    target grid; restricted in the latter case); every later level starts
    from the interpolated previous-level minimizer.  Levels before the last
    run with their own step size min(k, eps_level^2) so the coarse problems
    stay in the convex regime; the last level uses the target step size and
    returns the minimizer of the target functional.
    """
    target_grid, target_eps = schedule.levels[-1]
    if u_prev_fine.grid != target_grid:
        raise GridMismatchError(
            "previous state must live on the schedule's target grid")
    if abs(target_eps - p.eps) > 1e-12 * max(target_eps, p.eps):
        raise ConfigError(
            f"schedule target eps {target_eps} differs from step eps {p.eps}")

    coarsest_grid = schedule.levels[0][0]
    if guess.grid == coarsest_grid:
        level_guess = guess
    elif guess.grid == target_grid:
        level_guess = restrict(guess, coarsest_grid)
    else:
        raise GridMismatchError(
            "guess must live on the coarsest or the target grid")

    n_levels = len(schedule.levels)
    result = None
    for i, (grid, eps) in enumerate(schedule.levels):
        last = i == n_levels - 1
        k_level = p.k if last else min(p.k, eps * eps)
        p_level = StepParams(eps=eps, k=k_level)
        up_level = u_prev_fine if grid == target_grid else restrict(u_prev_fine, grid)
        try:
            result, _ = minimize_functional(Functional.PLAIN, level_guess,
                                            up_level, p_level, tol)
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"multilevel level {i + 1}/{n_levels} "
                f"(h={grid.h:.5g}, eps={eps:.5g}): {exc}",
                report=exc.report) from exc
        if not last:
            level_guess = prolongate(result, schedule.levels[i + 1][0])
    return result


def run_minimization(u0: Field, p: StepParams, t_end: float, tol: float,
                     schedule: MultilevelSchedule | None = None,
                     first_guess: Field | None = None, snapshot_times=(),
                     on_step=None) -> EvolutionRecord:
    """Evolution driver for the minimization solvers.

    Each step is a :func:`step_minimization` (or :func:`multilevel_step`
    when a schedule is given).  ``first_guess`` overrides the initial guess
    of the first step only; later steps start from the previous state.
    Records and early-stop semantics match :func:`mcflow.schemes.run_evolution`.
    """
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    n_steps = max(1, int(round(t_end / p.k)))
    snap_at = _snapshot_steps(snapshot_times, p.k, n_steps)
    grid = u0.grid
    w = grid.lumped_weights
    inv_eps2 = 1.0 / p.eps ** 2

    record = EvolutionRecord()
    u = u0
    record.times.append(0.0)
    record.energies.append(_j_eps_arr(u.values, w, inv_eps2))
    if 0 in snap_at:
        record.snapshots[snap_at[0]] = u
    if on_step is not None:
        on_step(0, 0.0, u)
    if _is_uniform_phase(u.values):
        record.early_stop = True
        record.early_stop_time = 0.0
        return record

    for step in range(1, n_steps + 1):
        t = step * p.k
        guess = first_guess if (step == 1 and first_guess is not None) else u
        try:
            if schedule is not None:
                u = multilevel_step(u, guess, schedule, p, tol)
            else:
                u, _ = minimize_functional(p.functional, guess, u, p, tol)
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"step {step} (t={t:.6g}): {exc}", report=exc.report) from exc
        record.times.append(t)
        record.energies.append(_j_eps_arr(u.values, w, inv_eps2))
        if step in snap_at:
            record.snapshots[snap_at[step]] = u
        if on_step is not None:
            on_step(step, t, u)
        if _is_uniform_phase(u.values):
            record.early_stop = True
            record.early_stop_time = t
            break
    return record
