"""One-step time-stepping schemes and the evolution driver.

Four schemes advance the phase field by one step of size k:

* ``FIS``              - fully implicit backward Euler,
* ``CONVEX_SPLITTING`` - implicit convex part u^3, explicit concave part,
* ``SEMI_IMPLICIT``    - whole nonlinearity explicit (one linear solve),
* ``MODIFIED_CN``      - Crank-Nicolson with the secant difference quotient
                         of the potential, which makes the discrete energy
                         law exact.

The implicit schemes solve their nodal residual with damped Newton
(backtracking on the squared residual norm); each returned field satisfies
the scheme's own residual to ``cfg.tol`` in the lumped norm, which the
tests re-check from the outside.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ._nonlinear import solve_newton_system
from .backend import active
from .discretization import Field, _same_grid
from .energy import StepParams, _j_eps_arr
from .errors import ConfigError, ConvergenceError

UNIFORM_PHASE_TOL = 1e-10
MCN_QUOTIENT_CUTOFF = 1e-12


class SchemeId(enum.Enum):
    FIS = "fis"
    CONVEX_SPLITTING = "convex_splitting"
    SEMI_IMPLICIT = "semi_implicit"
    MODIFIED_CN = "modified_cn"


@dataclass(frozen=True)
class NewtonConfig:
    """Damped-Newton settings: residual tolerance (lumped norm), iteration
    cap, and the backtracking line search (halving factor, max halvings)."""

    tol: float = 1e-8
    max_iter: int = 50
    backtrack: float = 0.5
    max_halvings: int = 30

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError("backtrack factor must lie in (0, 1)")


@dataclass
class NewtonReport:
    iterations: int
    residual_norm: float


@dataclass
class EvolutionRecord:
    """Times, free energies and optional snapshots of one evolution run."""

    times: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    early_stop: bool = False
    early_stop_time: float | None = None


def mcn_difference_quotient(u, u_prev):
    """(F(u) - F(u_prev)) / (u - u_prev), falling back to u^3 - u where the
    states are closer than the cutoff."""
    du = u - u_prev
    out = u * u * u - u
    qu = u * u - 1.0
    qp = u_prev * u_prev - 1.0
    num = 0.25 * (qu * qu - qp * qp)
    np.divide(num, du, out=out, where=np.abs(du) >= MCN_QUOTIENT_CUTOFF)
    return out


def _scheme_residual_arr(scheme: SchemeId, u, u_prev, p: StepParams,
                         inv_h2: float, out, lap_prev=None):
    """Nodal residual of the scheme at u, written into out."""
    K = active()
    inv_k = 1.0 / p.k
    inv_eps2 = 1.0 / p.eps ** 2
    if scheme is SchemeId.FIS:
        K.step_gradient(u, u_prev, inv_k, 1.0, inv_eps2, inv_h2, out)
    elif scheme is SchemeId.CONVEX_SPLITTING:
        # (u^3 - u_prev) = (u^3 - u) + (u - u_prev): fold the linear part
        # into the proximal coefficient.
        K.step_gradient(u, u_prev, inv_k + inv_eps2, 1.0, inv_eps2, inv_h2, out)
    elif scheme is SchemeId.SEMI_IMPLICIT:
        K.laplacian(u, inv_h2, out)
        out *= -1.0
        out += inv_k * (u - u_prev)
        out += inv_eps2 * (u_prev * u_prev * u_prev - u_prev)
    elif scheme is SchemeId.MODIFIED_CN:
        if lap_prev is None:
            lap_prev = K.laplacian(u_prev, inv_h2, np.empty_like(u_prev))
        K.laplacian(u, inv_h2, out)
        out += lap_prev
        out *= -0.5
        out += inv_k * (u - u_prev)
        out += inv_eps2 * mcn_difference_quotient(u, u_prev)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return out


def scheme_residual(scheme: SchemeId, u: Field, u_prev: Field,
                    p: StepParams) -> Field:
    """The scheme's nodal residual at u as a Field (lumped Riesz form)."""
    _same_grid(u, u_prev)
    out = np.empty_like(u.values)
    _scheme_residual_arr(scheme, u.values, u_prev.values, p,
                         1.0 / u.grid.h ** 2, out)
    return Field._wrap(u.grid, out)


def _jacobian_terms(scheme: SchemeId, u, u_prev, p: StepParams):
    """(alpha, beta, diag) of the scheme's Jacobian alpha*I - beta*Lap + diag."""
    inv_k = 1.0 / p.k
    inv_eps2 = 1.0 / p.eps ** 2
    if scheme is SchemeId.FIS:
        return inv_k, 1.0, inv_eps2 * (3.0 * u * u - 1.0)
    if scheme is SchemeId.CONVEX_SPLITTING:
        return inv_k + inv_eps2, 1.0, inv_eps2 * (3.0 * u * u - 1.0)
    if scheme is SchemeId.MODIFIED_CN:
        # derivative of the secant quotient in its smooth (algebraic) form
        diag = inv_eps2 * 0.25 * (3.0 * u * u + 2.0 * u * u_prev
                                  + u_prev * u_prev - 2.0)
        return inv_k, 0.5, diag
    raise ValueError(f"no Newton Jacobian for scheme {scheme!r}")


def _newton_solve(scheme: SchemeId, u_prev, p: StepParams, grid,
                  cfg: NewtonConfig):
    """Damped Newton on the scheme residual, starting from u_prev."""
    K = active()
    w = grid.lumped_weights
    inv_h2 = 1.0 / grid.h ** 2
    lap_prev = None
    if scheme is SchemeId.MODIFIED_CN:
        lap_prev = K.laplacian(u_prev, inv_h2, np.empty_like(u_prev))

    def residual_into(u, out):
        _scheme_residual_arr(scheme, u, u_prev, p, inv_h2, out, lap_prev)

    u = u_prev.copy()
    r = np.empty_like(u)
    residual_into(u, r)
    phi = K.weighted_dot(w, r, r)
    norm = np.sqrt(max(phi, 0.0))
    r_try = np.empty_like(u)
    cg_cap = 10 * grid.npts
    for it in range(cfg.max_iter):
        if norm <= cfg.tol:
            return u, NewtonReport(it, norm)
        alpha, beta, diag = _jacobian_terms(scheme, u, u_prev, p)
        d = solve_newton_system(K, -r, w, alpha, beta, diag, inv_h2,
                                tol_abs=max(1e-4 * norm, 0.01 * cfg.tol),
                                max_iter=cg_cap, lev0=1e-8 / p.k)
        t = 1.0
        accepted = False
        for _ in range(cfg.max_halvings + 1):
            u_try = u + t * d
            if np.isfinite(u_try).all():
                residual_into(u_try, r_try)
                if np.isfinite(r_try).all():
                    phi_try = K.weighted_dot(w, r_try, r_try)
                    if phi_try < phi:
                        u = u_try
                        phi = phi_try
                        r, r_try = r_try, r
                        accepted = True
                        break
            t *= cfg.backtrack
        if not accepted:
            raise ConvergenceError(
                f"Newton line search stalled at residual {norm:.3e} "
                f"({scheme.value})", report=NewtonReport(it + 1, norm))
        norm = np.sqrt(max(phi, 0.0))
    if norm <= cfg.tol:
        return u, NewtonReport(cfg.max_iter, norm)
    raise ConvergenceError(
        f"Newton did not reach tol={cfg.tol:.1e} within {cfg.max_iter} "
        f"iterations (residual {norm:.3e}, {scheme.value})",
        report=NewtonReport(cfg.max_iter, norm))


def step_scheme(scheme: SchemeId, u_prev: Field, p: StepParams,
                cfg: NewtonConfig = NewtonConfig()) -> Field:
    """Advance u_prev by one step of the selected scheme.

    The penalty constant in p is ignored: the schemes are penalty-free.
    """
    grid = u_prev.grid
    up = u_prev.values
    if scheme is SchemeId.SEMI_IMPLICIT:
        return _semi_implicit_step(up, p, grid, cfg)
    u, _ = _newton_solve(scheme, up, p, grid, cfg)
    return Field._wrap(grid, u)


def _semi_implicit_step(up, p: StepParams, grid, cfg: NewtonConfig) -> Field:
    from .discretization import _pcg  # local import to keep namespaces tidy

    K = active()
    inv_k = 1.0 / p.k
    inv_eps2 = 1.0 / p.eps ** 2
    inv_h2 = 1.0 / grid.h ** 2
    rhs = inv_k * up - inv_eps2 * (up * up * up - up)

    def apply_op(x, out):
        K.helmholtz(x, inv_k, 1.0, None, inv_h2, out)

    inv_diag = np.full_like(up, 1.0 / (inv_k + 4.0 * inv_h2))
    x, _, _ = _pcg(apply_op, rhs, grid.lumped_weights, inv_diag,
                   tol_abs=cfg.tol, max_iter=10 * grid.npts, x0=up)
    return Field._wrap(grid, x)


def _is_uniform_phase(values) -> bool:
    return (np.abs(values - 1.0).max() <= UNIFORM_PHASE_TOL
            or np.abs(values + 1.0).max() <= UNIFORM_PHASE_TOL)


def _snapshot_steps(snapshot_times, k, n_steps):
    """Map requested times to step indices; each must sit within half a step."""
    steps = {}
    for t in snapshot_times:
        idx = int(round(t / k))
        if abs(t - idx * k) > 0.5 * k or idx < 0 or idx > n_steps:
            raise ConfigError(
                f"snapshot time {t} is not within half a step of a multiple "
                f"of k={k} inside [0, {n_steps * k}]")
        steps.setdefault(idx, t)
    return steps


def run_evolution(scheme: SchemeId, u0: Field, p: StepParams, t_end: float,
                  cfg: NewtonConfig = NewtonConfig(), snapshot_times=(),
                  on_step=None) -> EvolutionRecord:
    """Evolve u0 to t_end, recording the free energy at every step.

    Stops early (flagged in the record) once the field is uniform within
    1e-10 of +-1; the interface is gone and nothing further can happen.
    ``on_step(step_index, time, field)`` is invoked at t=0 and after every
    accepted step.
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
        try:
            u = step_scheme(scheme, u, p, cfg)
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
