"""Low-rank representation solver.

Solves  min ||C||_* + lambda2 ||E||_{2,1}  s.t.  X = X C + E
by inexact ALM with alternating minimization.  Instances are columns:
X is q x n and C is n x n, so column j of C expresses sample j as a
combination of all samples.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .linalg import NumericalError, check_matrix, l21_shrink, svt

__all__ = ["LrrConfig", "SolverTrace", "LrrSolution", "solve_lrr", "lrr_objective"]


@dataclass(frozen=True)
class LrrConfig:
    """Penalty schedule and stopping parameters for :func:`solve_lrr`.

    lambda2 balances the corruption term against the nuclear norm.  The
    penalty mu grows geometrically by rho_scale up to mu_max.
    """

    lambda2: float = 10.0
    mu0: float = 1e-4
    mu_max: float = 1e6
    rho_scale: float = 1.1
    tol: float = 1e-6
    max_iter: int = 500

    def __post_init__(self):
        if self.lambda2 <= 0:
            raise ValueError("lambda2 must be positive")
        if self.mu0 <= 0 or self.mu_max <= 0 or self.mu0 > self.mu_max:
            raise ValueError("need 0 < mu0 <= mu_max")
        if self.rho_scale <= 1:
            raise ValueError("rho_scale must exceed 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class SolverTrace:
    """Per-iteration max constraint violation and the convergence flag."""

    iterations: int
    residuals: list
    converged: bool

    def __post_init__(self):
        if len(self.residuals) != self.iterations:
            raise ValueError("residuals length must equal iterations")


@dataclass
class LrrSolution:
    C: np.ndarray  # n x n representation
    E: np.ndarray  # q x n sample-specific corruptions
    trace: SolverTrace


def solve_lrr(X, config=None, callback=None):
    """Inexact-ALM solve of the low-rank representation problem.

    Each iteration runs J -> C -> E -> multipliers -> mu:

      J   = svt(C + Y2/mu, 1/mu)
      C   solves  mu (I + X'X) C = mu J - Y2 + X'Y1 + mu (X'X - X'E)
      E   = l21_shrink(X - XC + Y1/mu, lambda2/mu)
      Y1 += mu (X - XC - E);  Y2 += mu (C - J);  mu = min(rho*mu, mu_max)

    and stops when max(||X - XC - E||_inf, ||C - J||_inf) <= tol.

    Parameters
    ----------
    X : (q, n) array with instances as columns, n >= 2, not all zero.
    config : LrrConfig, optional
    callback : callable, optional
        Called once per iteration with a dict holding the pre-update state
        (C_prev, E_prev, Y1_prev, Y2_prev), the mu used, and the post-update
        J, C, E and residual.  Intended for diagnostics and tests.

    Returns
    -------
    LrrSolution
        converged=False on the trace when max_iter is hit; the caller
        decides whether a degraded solution is acceptable.
    """
    X = check_matrix(X, "X")
    q, n = X.shape
    if n < 2:
        raise ValueError("need at least 2 instances")
    if not np.any(X):
        raise ValueError("X must have at least one nonzero entry")
    if config is None:
        config = LrrConfig()

    C = np.zeros((n, n))
    J = np.zeros((n, n))
    E = np.zeros((q, n))
    Y1 = np.zeros((q, n))
    Y2 = np.zeros((n, n))
    XtX = X.T @ X
    eye = np.eye(n)
    mu = config.mu0

    residuals = []
    converged = False
    for k in range(config.max_iter):
        C_prev, E_prev, Y1_prev, Y2_prev, mu_k = C, E, Y1, Y2, mu

        J = svt(C + Y2 / mu, 1.0 / mu)

        # T_CA = mu (I + X'X) is positive definite by construction; a
        # failed Cholesky here means the inputs are numerically broken.
        T_CA = mu * (eye + XtX)
        T_CB = mu * J - Y2 + X.T @ Y1 + mu * (XtX - X.T @ E)
        try:
            cf = sla.cho_factor(T_CA, check_finite=False)
        except sla.LinAlgError as exc:
            raise NumericalError(f"C-update system not SPD: {exc}") from exc
        C = sla.cho_solve(cf, T_CB, check_finite=False)

        XC = X @ C
        E = l21_shrink(X - XC + Y1 / mu, config.lambda2 / mu)

        R1 = X - XC - E
        R2 = C - J
        Y1 = Y1 + mu * R1
        Y2 = Y2 + mu * R2
        mu = min(config.rho_scale * mu, config.mu_max)

        res = max(np.abs(R1).max(), np.abs(R2).max())
        residuals.append(float(res))
        if callback is not None:
            callback(dict(iteration=k, mu=mu_k, C_prev=C_prev, E_prev=E_prev,
                          Y1_prev=Y1_prev, Y2_prev=Y2_prev, J=J, C=C, E=E,
                          residual=float(res)))
        if res <= config.tol:
            converged = True
            break

    trace = SolverTrace(iterations=len(residuals), residuals=residuals, converged=converged)
    return LrrSolution(C=C, E=E, trace=trace)


def lrr_objective(C, E, lambda2):
    """Value of ||C||_* + lambda2 ||E||_{2,1}."""
    nuc = float(np.linalg.svd(C, compute_uv=False).sum())
    return nuc + lambda2 * float(np.linalg.norm(E, axis=0).sum())
