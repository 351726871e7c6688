"""Two-view tensor low-rank representation solver.

Solves  min ||CC||_t* + lambda2 ||EE||_{2,1}
        s.t.  X = X C1 + E1,  Gamma = Gamma C2 + E2

where CC stacks the per-view representations (C1, C2) into an n x n x 2
tensor and ||.||_t* is the Fourier-slice nuclear norm.  The corruption
stack EE is realized as column-wise L2,1 shrinkage of the (q+o) x n
vertical stack, the only reading under which the closed form is
well-defined when q != o.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .linalg import NumericalError, check_matrix, l21_shrink, tubal_shrink
from .lrr import SolverTrace

__all__ = ["TlrrConfig", "TlrrSolution", "solve_tensor_lrr"]


@dataclass(frozen=True)
class TlrrConfig:
    """Penalty schedules for :func:`solve_tensor_lrr`.

    mu drives the two data-fit constraints, rho the tensor coupling
    CC = GG; both grow geometrically by the shared factor ``scale``.
    """

    lambda2: float = 10.0
    mu0: float = 1e-4
    mu_max: float = 1e6
    rho0: float = 1e-4
    rho_max: float = 1e6
    scale: float = 1.1
    tol: float = 1e-6
    max_iter: int = 500

    def __post_init__(self):
        if self.lambda2 <= 0:
            raise ValueError("lambda2 must be positive")
        if self.mu0 <= 0 or self.mu0 > self.mu_max:
            raise ValueError("need 0 < mu0 <= mu_max")
        if self.rho0 <= 0 or self.rho0 > self.rho_max:
            raise ValueError("need 0 < rho0 <= rho_max")
        if self.scale <= 1:
            raise ValueError("scale must exceed 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class TlrrSolution:
    C1: np.ndarray      # feature-view representation, n x n
    C2: np.ndarray      # label-view representation, n x n
    C_hat: np.ndarray   # fused (C1 + C2) / 2
    E1: np.ndarray      # q x n
    E2: np.ndarray      # o x n
    trace: SolverTrace


def _spd_solve(A, B, what):
    try:
        return sla.cho_solve(sla.cho_factor(A, check_finite=False), B, check_finite=False)
    except sla.LinAlgError as exc:
        raise NumericalError(f"{what} system not SPD: {exc}") from exc


def solve_tensor_lrr(X, Gamma, config=None, callback=None):
    """Inexact-ALM solve of the joint two-view representation problem.

    Each iteration runs GG -> (C1, C2) -> EE -> multipliers -> penalties:

      GG  = tubal_shrink(stack(C1, C2) + W/rho, 2/rho)
      Ci  solves  ((mu/rho) Ai'Ai + I) Ci = Gi + (mu Ai'Ai - mu Ai'Ei
                   + Ai'Yi - Wi) / rho          for (A1, A2) = (X, Gamma)
      EE  = l21_shrink(vstack(X - XC1 + Y1/mu, Gamma - Gamma C2 + Y2/mu),
                       lambda2/mu), split back into rows (E1; E2)
      Yi += mu (Ai - Ai Ci - Ei);  W += rho (stack(C1, C2) - GG)
      mu  = min(scale*mu, mu_max);  rho = min(scale*rho, rho_max)

    stopping when the largest of the three constraint violations
    (two data fits, tensor coupling) drops to tol in the max norm.

    Parameters
    ----------
    X : (q, n) feature matrix, instances as columns, n >= 2.
    Gamma : (o, n) label-view matrix, not all zero.
    config : TlrrConfig, optional
    callback : callable, optional
        Per-iteration dict with pre-update state (C1_prev, C2_prev, E1_prev,
        E2_prev, Y1_prev, Y2_prev, W_prev), penalties used, and post-update
        G, C1, C2, E1, E2 and residual.

    Returns
    -------
    TlrrSolution with C_hat = (C1 + C2) / 2.
    """
    X = check_matrix(X, "X")
    Gamma = check_matrix(Gamma, "Gamma")
    q, n = X.shape
    if n < 2:
        raise ValueError("need at least 2 instances")
    if Gamma.shape[1] != n:
        raise ValueError(f"Gamma has {Gamma.shape[1]} columns, expected {n}")
    if not np.any(Gamma):
        raise ValueError("Gamma must not be all zero")
    o = Gamma.shape[0]
    if config is None:
        config = TlrrConfig()

    C1 = np.zeros((n, n))
    C2 = np.zeros((n, n))
    E1 = np.zeros((q, n))
    E2 = np.zeros((o, n))
    Y1 = np.zeros((q, n))
    Y2 = np.zeros((o, n))
    W = np.zeros((n, n, 2))
    XtX = X.T @ X
    GtG = Gamma.T @ Gamma
    eye = np.eye(n)
    mu = config.mu0
    rho = config.rho0

    residuals = []
    converged = False
    for k in range(config.max_iter):
        prev = dict(C1_prev=C1, C2_prev=C2, E1_prev=E1, E2_prev=E2,
                    Y1_prev=Y1, Y2_prev=Y2, W_prev=W, mu=mu, rho=rho)

        G = tubal_shrink(np.stack([C1, C2], axis=2) + W / rho, 2.0 / rho)

        T1A = (mu / rho) * XtX + eye
        T1B = G[:, :, 0] + (mu * XtX - mu * (X.T @ E1) + X.T @ Y1 - W[:, :, 0]) / rho
        C1 = _spd_solve(T1A, T1B, "feature-view C-update")
        T2A = (mu / rho) * GtG + eye
        T2B = G[:, :, 1] + (mu * GtG - mu * (Gamma.T @ E2) + Gamma.T @ Y2 - W[:, :, 1]) / rho
        C2 = _spd_solve(T2A, T2B, "label-view C-update")

        XC1 = X @ C1
        GC2 = Gamma @ C2
        T_E = np.vstack([X - XC1 + Y1 / mu, Gamma - GC2 + Y2 / mu])
        E_stack = l21_shrink(T_E, config.lambda2 / mu)
        E1, E2 = E_stack[:q], E_stack[q:]

        R1 = X - XC1 - E1
        R2 = Gamma - GC2 - E2
        R3 = np.stack([C1, C2], axis=2) - G
        Y1 = Y1 + mu * R1
        Y2 = Y2 + mu * R2
        W = W + rho * R3
        mu = min(config.scale * mu, config.mu_max)
        rho = min(config.scale * rho, config.rho_max)

        res = max(np.abs(R1).max(), np.abs(R2).max(), np.abs(R3).max())
        residuals.append(float(res))
        if callback is not None:
            callback(dict(iteration=k, G=G, C1=C1, C2=C2, E1=E1, E2=E2,
                          residual=float(res), **prev))
        if res <= config.tol:
            converged = True
            break

    trace = SolverTrace(iterations=len(residuals), residuals=residuals, converged=converged)
    return TlrrSolution(C1=C1, C2=C2, C_hat=(C1 + C2) / 2.0, E1=E1, E2=E2, trace=trace)
