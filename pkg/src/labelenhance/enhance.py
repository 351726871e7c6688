"""Recovery stage: Gaussian kernel embedding, the correlation-regularized
least-squares objective, its analytic gradient, L-BFGS minimization, and
softmax normalization, wired into the two end-to-end enhancement pipelines
plus the label-propagation baseline.

The recovered scores are theta @ K where K is the Gaussian Gram matrix, so
theta carries one weight per (label, instance).  The regularizer penalizes
||theta K (I - C_hat)||_F^2, i.e. disagreement between the pre-softmax
scores and their own reconstruction through the sample correlations; the
softmax that turns scores into distributions is applied once after the
optimization.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

from .data import check_logical_labels, standardize_features
from .linalg import check_matrix
from .lrr import LrrConfig, solve_lrr
from .tensor_lrr import TlrrConfig, solve_tensor_lrr

__all__ = [
    "KernelConfig",
    "LeConfig",
    "LbfgsResult",
    "EnhanceResult",
    "mean_pairwise_distance",
    "resolve_sigma",
    "gaussian_gram",
    "le_objective",
    "le_gradient",
    "lbfgs_minimize",
    "recover_distributions",
    "recover_from_correlations",
    "enhance_lesc",
    "enhance_glesc",
    "baseline_lp",
]


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian kernel width rule: mean pairwise distance, or a fixed value."""

    rule: str = "mean_pairwise_distance"
    sigma: float = None

    def __post_init__(self):
        if self.rule not in ("mean_pairwise_distance", "fixed"):
            raise ValueError(f"unknown sigma rule {self.rule!r}")
        if self.rule == "fixed" and (self.sigma is None or self.sigma <= 0):
            raise ValueError("fixed sigma must be positive")


@dataclass(frozen=True)
class LeConfig:
    """Recovery-stage settings shared by both enhancement pipelines."""

    lambda1: float = 1.0
    kernel: KernelConfig = field(default_factory=KernelConfig)
    lbfgs_memory: int = 10
    lbfgs_tol: float = 1e-8
    lbfgs_max_iter: int = 2000
    standardize: bool = True

    def __post_init__(self):
        if self.lambda1 <= 0:
            raise ValueError("lambda1 must be positive")
        if self.lbfgs_memory < 3:
            raise ValueError("lbfgs_memory must be at least 3")
        if self.lbfgs_tol <= 0 or self.lbfgs_max_iter < 1:
            raise ValueError("invalid lbfgs settings")


@dataclass
class LbfgsResult:
    theta: np.ndarray
    fun: float
    grad_norm: float     # inf-norm at the returned point
    iterations: int
    converged: bool      # gradient criterion met
    degraded: bool       # line search gave up before converging


@dataclass
class EnhanceResult:
    """Pipeline output: recovered distributions plus solver diagnostics."""

    distributions: np.ndarray   # o x n, columns sum to 1
    correlations: np.ndarray    # the n x n C_hat used by the regularizer
    solver_trace: object        # SolverTrace of the representation solver
    lbfgs: LbfgsResult
    sigma: float                # resolved kernel width


def _pairwise_sq_dists(X):
    sq = (X * X).sum(axis=0)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X.T @ X)
    np.maximum(d2, 0.0, out=d2)   # clip fp negatives
    return d2


def mean_pairwise_distance(X, max_instances=2000):
    """Mean Euclidean distance over distinct instance pairs.

    Evenly-spaced deterministic subsample when there are more than
    ``max_instances`` columns.
    """
    X = check_matrix(X, "X")
    n = X.shape[1]
    if n < 2:
        raise ValueError("need at least 2 instances")
    if n > max_instances:
        X = X[:, np.linspace(0, n - 1, max_instances).astype(int)]
        n = max_instances
    d2 = _pairwise_sq_dists(X)
    iu = np.triu_indices(n, 1)
    return float(np.sqrt(d2[iu]).mean())


def resolve_sigma(kernel, X):
    """Concrete kernel width for the given features."""
    if kernel.rule == "fixed":
        return float(kernel.sigma)
    return mean_pairwise_distance(X)


def gaussian_gram(X, sigma):
    """Gaussian Gram matrix K_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)).

    Symmetric with exact unit diagonal.
    """
    X = check_matrix(X, "X")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d2 = _pairwise_sq_dists(X)
    np.fill_diagonal(d2, 0.0)
    K = np.exp(-d2 / (2.0 * sigma * sigma))
    return (K + K.T) / 2.0


def _shape_check(theta, K, Gamma, C_hat):
    theta = check_matrix(theta, "theta")
    K = check_matrix(K, "K")
    Gamma = check_matrix(Gamma, "Gamma")
    C_hat = check_matrix(C_hat, "C_hat")
    o, n = Gamma.shape
    if theta.shape != (o, n):
        raise ValueError(f"theta must be {o} x {n}, got {theta.shape}")
    if K.shape != (n, n):
        raise ValueError(f"K must be {n} x {n}, got {K.shape}")
    if C_hat.shape != (n, n):
        raise ValueError(f"C_hat must be {n} x {n}, got {C_hat.shape}")
    return theta, K, Gamma, C_hat


def _objective_parts(theta, K, Gamma, C_hat):
    scores = theta @ K
    fit = scores - Gamma
    reg = scores - scores @ C_hat     # theta K (I - C_hat)
    return scores, fit, reg


def le_objective(theta, K, Gamma, C_hat, lambda1):
    """||theta K - Gamma||_F^2 + lambda1 ||theta K (I - C_hat)||_F^2."""
    theta, K, Gamma, C_hat = _shape_check(theta, K, Gamma, C_hat)
    _, fit, reg = _objective_parts(theta, K, Gamma, C_hat)
    return float((fit * fit).sum() + lambda1 * (reg * reg).sum())


def le_gradient(theta, K, Gamma, C_hat, lambda1):
    """Analytic gradient 2 (theta K - Gamma) K + 2 lambda1 theta K M K
    with M = (I - C_hat)(I - C_hat'); requires symmetric K."""
    theta, K, Gamma, C_hat = _shape_check(theta, K, Gamma, C_hat)
    _, fit, reg = _objective_parts(theta, K, Gamma, C_hat)
    return 2.0 * (fit @ K) + 2.0 * lambda1 * ((reg - reg @ C_hat.T) @ K)


def _value_and_grad(theta, K, Gamma, C_hat, lambda1):
    _, fit, reg = _objective_parts(theta, K, Gamma, C_hat)
    f = float((fit * fit).sum() + lambda1 * (reg * reg).sum())
    g = 2.0 * (fit @ K) + 2.0 * lambda1 * ((reg - reg @ C_hat.T) @ K)
    return f, g


def lbfgs_minimize(value_and_grad, theta0, memory=10, tol=1e-8, max_iter=2000):
    """Limited-memory BFGS over a matrix-shaped parameter.

    Parameters
    ----------
    value_and_grad : callable theta -> (float, gradient array like theta)
    theta0 : starting point; its shape is preserved.

    Returns
    -------
    LbfgsResult; ``degraded`` is set when the line search failed, in which
    case the best iterate found so far is returned.
    """
    theta0 = np.asarray(theta0, dtype=float)
    shape = theta0.shape

    def fun(v):
        f, g = value_and_grad(v.reshape(shape))
        return f, np.asarray(g, dtype=float).ravel()

    res = minimize(fun, theta0.ravel(), jac=True, method="L-BFGS-B",
                   options=dict(maxcor=memory, gtol=tol, ftol=1e-15,
                                maxiter=max_iter, maxls=40))
    theta = res.x.reshape(shape)
    _, g = value_and_grad(theta)
    gnorm = float(np.abs(g).max()) if g.size else 0.0
    return LbfgsResult(theta=theta, fun=float(res.fun), grad_norm=gnorm,
                       iterations=int(res.nit), converged=gnorm <= tol,
                       degraded=res.status == 2)


def recover_distributions(theta, K):
    """Column-wise softmax of theta @ K; every column sums to one."""
    theta = check_matrix(theta, "theta")
    K = check_matrix(K, "K")
    if theta.shape[1] != K.shape[0]:
        raise ValueError("theta and K have incompatible shapes")
    scores = theta @ K
    scores = scores - scores.max(axis=0, keepdims=True)
    P = np.exp(scores)
    return P / P.sum(axis=0, keepdims=True)


def recover_from_correlations(X, Gamma, C_hat, le_config, sigma=None):
    """Recovery stage alone: kernel, L-BFGS fit, softmax, given a C_hat.

    Returns (distributions, LbfgsResult).  Used by both pipelines once
    their representation solver has produced the sample correlations.
    """
    if sigma is None:
        sigma = resolve_sigma(le_config.kernel, X)
    K = gaussian_gram(X, sigma)
    theta0 = np.zeros_like(Gamma)
    lb = lbfgs_minimize(
        lambda th: _value_and_grad(th, K, Gamma, C_hat, le_config.lambda1),
        theta0, memory=le_config.lbfgs_memory, tol=le_config.lbfgs_tol,
        max_iter=le_config.lbfgs_max_iter)
    return recover_distributions(lb.theta, K), lb


def _prepare(X, Gamma, le_config):
    X = check_matrix(X, "X")
    Gamma = check_logical_labels(Gamma)
    if X.shape[1] != Gamma.shape[1]:
        raise ValueError("X and Gamma must have the same number of instances")
    if le_config.standardize:
        X = standardize_features(X)
    return X, Gamma


def enhance_lesc(X, Gamma, lrr_config=None, le_config=None):
    """Feature-space pipeline: low-rank representation of X supplies the
    sample correlations that regularize the recovery fit.

    Returns an :class:`EnhanceResult`; a non-converged representation
    solver is reported through ``solver_trace.converged`` and the pipeline
    still completes with the returned C.
    """
    if le_config is None:
        le_config = LeConfig()
    X, Gamma = _prepare(X, Gamma, le_config)
    sigma = resolve_sigma(le_config.kernel, X)
    sol = solve_lrr(X, lrr_config or LrrConfig())
    D_hat, lb = recover_from_correlations(X, Gamma, sol.C, le_config, sigma)
    return EnhanceResult(distributions=D_hat, correlations=sol.C,
                         solver_trace=sol.trace, lbfgs=lb, sigma=sigma)


def enhance_glesc(X, Gamma, tlrr_config=None, le_config=None):
    """Joint pipeline: the two-view tensor solver fuses feature- and
    label-view representations into the correlations used for recovery."""
    if le_config is None:
        le_config = LeConfig()
    X, Gamma = _prepare(X, Gamma, le_config)
    sigma = resolve_sigma(le_config.kernel, X)
    sol = solve_tensor_lrr(X, Gamma, tlrr_config or TlrrConfig())
    D_hat, lb = recover_from_correlations(X, Gamma, sol.C_hat, le_config, sigma)
    return EnhanceResult(distributions=D_hat, correlations=sol.C_hat,
                         solver_trace=sol.trace, lbfgs=lb, sigma=sigma)


def baseline_lp(X, Gamma, alpha=0.5):
    """Label-propagation baseline over the fully connected unit-width
    Gaussian graph, solved in closed form and softmax-normalized.

    alpha in (0, 1) trades propagation against the initial logical labels.
    Features are used as given (the graph width is fixed at 1).
    """
    X = check_matrix(X, "X")
    Gamma = check_logical_labels(Gamma)
    if X.shape[1] != Gamma.shape[1]:
        raise ValueError("X and Gamma must have the same number of instances")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    n = X.shape[1]
    Q = np.exp(-_pairwise_sq_dists(X) / 2.0)
    np.fill_diagonal(Q, 0.0)
    row_sums = Q.sum(axis=1)
    isolated = row_sums <= 0
    if isolated.any():
        warnings.warn(f"{int(isolated.sum())} isolated instance(s); "
                      "row sums clamped", stacklevel=2)
        row_sums = np.maximum(row_sums, np.finfo(float).eps)
    inv_root = 1.0 / np.sqrt(row_sums)
    P = Q * inv_root[:, None] * inv_root[None, :]
    # I - alpha P is SPD: P is symmetric with spectral radius <= 1
    A = np.eye(n) - alpha * P
    Z = sla.solve(A, Gamma.T, assume_a="pos")
    scores = (1.0 - alpha) * Z.T
    scores = scores - scores.max(axis=0, keepdims=True)
    Pm = np.exp(scores)
    return Pm / Pm.sum(axis=0, keepdims=True)
