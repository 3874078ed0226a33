"""Shared Newton-system machinery for the scheme and minimization solvers.

Every Jacobian/Hessian here has the form  alpha*I - beta*Laplacian + diag(c)
in the lumped inner product.  The linear solves go through CG with the
inverse nodal diagonal as preconditioner; when CG meets a direction of
non-positive curvature the diagonal is Levenberg-damped and the solve is
retried, and a CG that hits its iteration cap returns the current iterate
(truncated Newton), which the callers' line searches can still use.
"""

import numpy as np

from .discretization import _pcg
from .errors import _IndefiniteOperator

_LEV_ESCALATION = 100.0
_MAX_LEV_TRIES = 6


def solve_newton_system(K, rhs, w, alpha, beta, diag, inv_h2, tol_abs,
                        max_iter, lev0):
    """Approximately solve (alpha*I - beta*Lap + diag) d = rhs.

    Returns the direction d.  ``diag`` may be None (no nodal term).
    ``lev0`` is the initial Levenberg shift used if the operator turns out
    indefinite.
    """
    lam = 0.0
    for _ in range(_MAX_LEV_TRIES):
        a = alpha + lam

        def apply_op(x, out, a=a):
            K.helmholtz(x, a, beta, diag, inv_h2, out)

        pre = a + 4.0 * beta * inv_h2
        if diag is not None:
            pre = pre + diag
            inv_diag = 1.0 / np.maximum(pre, 1e-30)
        else:
            inv_diag = np.full_like(rhs, 1.0 / max(pre, 1e-30))
        try:
            d, _, _ = _pcg(apply_op, rhs, w, inv_diag, tol_abs, max_iter,
                           strict=False)
            return d
        except _IndefiniteOperator:
            lam = lev0 if lam == 0.0 else lam * _LEV_ESCALATION
    # Damping failed to make the operator definite; fall back to the
    # preconditioned right-hand side (a scaled gradient-type direction).
    return rhs * inv_diag
