"""The double-well potential and the step-energy functionals.

Three functionals drive the minimization solvers, selected by
:class:`Functional`:

* ``PLAIN``      - free energy plus the proximal (time-step) term,
* ``PENALIZED``  - plain plus delta times the potential-energy difference
                   between the new and the previous state,
* ``SCALED_REMARK`` - plain plus delta times the free-energy difference
                   (a pure time rescaling; requires delta < 1).

All gradients are lumped-L2 Riesz representatives: the stationarity
condition ``gradient == 0`` is exactly the nodal Euler-Lagrange system of
the mass-lumped linear-element discretization.  Adding the potential
penalty multiplies the nonlinear coefficient by (1 + delta), which is the
same as shrinking the interaction length by sqrt(delta + 1); the tests pin
that identity field-wise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .backend import active
from .discretization import Field, _same_grid


class Functional(enum.Enum):
    PLAIN = "plain"
    PENALIZED = "penalized"
    SCALED_REMARK = "scaled_remark"


@dataclass(frozen=True)
class StepParams:
    """Parameters of one time step: interaction length, step size, penalty."""

    eps: float
    k: float
    delta: float = 0.0
    functional: Functional = Functional.PLAIN

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.k <= 0.0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.delta < 0.0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")
        if self.functional is Functional.SCALED_REMARK and self.delta >= 1.0:
            raise ValueError(
                "the free-energy-difference penalty needs delta < 1 "
                f"(got delta={self.delta}): delta >= 1 removes the convexity "
                "of the spatial term")


def double_well(u):
    """Potential F(u) = (u^2-1)^2/4 and its derivative f(u) = u^3 - u.

    Accepts a scalar or an ndarray; returns (F, f).
    """
    q = u * u - 1.0
    return 0.25 * q * q, u * u * u - u


# -- array-level helpers (no Field wrapping; used by the inner loops) ---------

def _j_eps_arr(values: np.ndarray, w: np.ndarray, inv_eps2: float) -> float:
    K = active()
    return K.dirichlet(values) + inv_eps2 * K.weighted_well(w, values)


def _proximal_arr(u, u_prev, w, inv_k: float) -> float:
    return 0.5 * inv_k * active().weighted_sqdiff(w, u, u_prev)


def _step_energy_arr(selector: Functional, u, u_prev, w,
                     inv_eps2: float, inv_k: float, delta: float) -> float:
    K = active()
    e = _j_eps_arr(u, w, inv_eps2) + _proximal_arr(u, u_prev, w, inv_k)
    if selector is Functional.PENALIZED and delta != 0.0:
        e += delta * inv_eps2 * (K.weighted_well(w, u) - K.weighted_well(w, u_prev))
    elif selector is Functional.SCALED_REMARK and delta != 0.0:
        e += delta * (_j_eps_arr(u_prev, w, inv_eps2) - _j_eps_arr(u, w, inv_eps2))
    return e


def gradient_coefficients(selector: Functional, p: StepParams):
    """(lap_coef, well_coef) of the gradient (u-u_prev)/k - lap_coef*Lap(u)
    + well_coef*(u^3-u) for the selected functional."""
    inv_eps2 = 1.0 / p.eps ** 2
    if selector is Functional.PLAIN:
        return 1.0, inv_eps2
    if selector is Functional.PENALIZED:
        return 1.0, (1.0 + p.delta) * inv_eps2
    if selector is Functional.SCALED_REMARK:
        if p.delta >= 1.0:
            raise ValueError("delta must be < 1 for the free-energy-difference penalty")
        return 1.0 - p.delta, (1.0 - p.delta) * inv_eps2
    raise ValueError(f"unknown functional selector {selector!r}")


def _gradient_arr(selector: Functional, u, u_prev, p: StepParams,
                  inv_h2: float, out):
    lap_coef, well_coef = gradient_coefficients(selector, p)
    active().step_gradient(u, u_prev, 1.0 / p.k, lap_coef, well_coef, inv_h2, out)
    return out


# -- public Field API ----------------------------------------------------------

def j_eps(u: Field, eps: float) -> float:
    """Free energy: integral of |grad u|^2/2 + F(u)/eps^2."""
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    return _j_eps_arr(u.values, u.grid.lumped_weights, 1.0 / eps ** 2)


def step_energy(u: Field, u_prev: Field, p: StepParams) -> float:
    """Free energy plus the proximal term ||u - u_prev||^2 / (2k)."""
    _same_grid(u, u_prev)
    return _step_energy_arr(Functional.PLAIN, u.values, u_prev.values,
                            u.grid.lumped_weights, 1.0 / p.eps ** 2, 1.0 / p.k, 0.0)


def penalized_step_energy(u: Field, u_prev: Field, p: StepParams) -> float:
    """Step energy plus delta/eps^2 * (int F(u) - int F(u_prev)).

    Reduces to :func:`step_energy` at delta = 0; may be negative.
    """
    _same_grid(u, u_prev)
    return _step_energy_arr(Functional.PENALIZED, u.values, u_prev.values,
                            u.grid.lumped_weights, 1.0 / p.eps ** 2, 1.0 / p.k,
                            p.delta)


def scaled_step_energy(u: Field, u_prev: Field, p: StepParams) -> float:
    """Step energy plus delta * (J(u_prev) - J(u)); a time rescaling."""
    _same_grid(u, u_prev)
    if p.delta >= 1.0:
        raise ValueError("delta must be < 1 for the free-energy-difference penalty")
    return _step_energy_arr(Functional.SCALED_REMARK, u.values, u_prev.values,
                            u.grid.lumped_weights, 1.0 / p.eps ** 2, 1.0 / p.k,
                            p.delta)


def energy_gradient(u: Field, u_prev: Field, p: StepParams) -> Field:
    """Lumped-L2 gradient of the functional selected by ``p.functional``.

    The directional derivative of the functional along v equals
    ``lumped_inner_product(energy_gradient(u, u_prev, p), v)``.
    """
    _same_grid(u, u_prev)
    out = np.empty_like(u.values)
    _gradient_arr(p.functional, u.values, u_prev.values, p,
                  1.0 / u.grid.h ** 2, out)
    return Field._wrap(u.grid, out)


def functional_value(selector: Functional, u: Field, u_prev: Field,
                     p: StepParams) -> float:
    """Value of the selected functional (dispatch helper)."""
    if selector is Functional.PLAIN:
        return step_energy(u, u_prev, p)
    if selector is Functional.PENALIZED:
        return penalized_step_energy(u, u_prev, p)
    if selector is Functional.SCALED_REMARK:
        return scaled_step_energy(u, u_prev, p)
    raise ValueError(f"unknown functional selector {selector!r}")
