"""Dense linear-algebra kernels and proximal operators shared by both solvers.

Frontal-slice tensors are plain ndarrays of shape (n1, n2, n3); slice k is
T[:, :, k].  The mode-3 transform is unnormalized forward, 1/n3 on inverse
(numpy's fft convention), which makes every n3 = 1 operation reduce exactly
to its matrix counterpart.
"""

import numpy as np

__all__ = [
    "NumericalError",
    "check_matrix",
    "check_tensor3",
    "svd",
    "svt",
    "l21_shrink",
    "fft_mode3",
    "ifft_mode3",
    "tensor_nuclear_norm",
    "tubal_shrink",
]


class NumericalError(RuntimeError):
    """A dense factorization failed to converge.

    ``iterations`` carries the backend-reported iteration count when the
    backend exposes one (LAPACK drivers generally do not: None).
    """

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


def check_matrix(A, name="matrix"):
    """Validate and return a finite 2-D float64 array."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={A.ndim}")
    if not np.isfinite(A).all():
        raise ValueError(f"{name} contains non-finite entries")
    return A


def check_tensor3(T, name="tensor"):
    """Validate and return a finite 3-D float64 array (n1, n2, n3), n3 >= 1."""
    T = np.asarray(T, dtype=float)
    if T.ndim != 3:
        raise ValueError(f"{name} must be 3-D, got ndim={T.ndim}")
    if T.shape[2] < 1:
        raise ValueError(f"{name} must have at least one frontal slice")
    if not np.isfinite(T).all():
        raise ValueError(f"{name} contains non-finite entries")
    return T


def svd(A):
    """Compact SVD: A = U @ diag(s) @ Vt with s sorted descending."""
    A = check_matrix(A, "A")
    try:
        return np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc


def svt(A, tau):
    """Singular value thresholding: shrink every singular value by tau.

    Proximal operator of tau * nuclear norm; singular values map to
    max(sigma - tau, 0).
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    U, s, Vt = svd(A)
    return (U * np.maximum(s - tau, 0.0)) @ Vt


def l21_shrink(A, tau):
    """Column-wise L2,1 shrinkage.

    Column j becomes zero when its Euclidean norm is <= tau, and is scaled
    by (norm - tau) / norm otherwise.  Proximal operator of tau * sum of
    column norms.
    """
    A = check_matrix(A, "A")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    norms = np.linalg.norm(A, axis=0)
    # zero-norm columns stay zero; the where guard avoids 0/0
    scale = np.where(norms > tau, 1.0 - tau / np.where(norms > 0, norms, 1.0), 0.0)
    return A * scale


def fft_mode3(T):
    """Unnormalized FFT along the third (tube) axis."""
    T = check_tensor3(T, "T")
    return np.fft.fft(T, axis=2)


def ifft_mode3(F, imag_tol=1e-9):
    """Inverse of :func:`fft_mode3` (divides by n3); returns the real part.

    Raises ValueError when the imaginary residue exceeds ``imag_tol``,
    which only happens for inputs that are not transforms of real tensors.
    """
    F = np.asarray(F)
    if F.ndim != 3:
        raise ValueError(f"F must be 3-D, got ndim={F.ndim}")
    T = np.fft.ifft(F, axis=2)
    resid = np.abs(T.imag).max() if T.size else 0.0
    if resid > imag_tol:
        raise ValueError(f"inverse transform is not real: imaginary residue {resid:.3e}")
    return np.ascontiguousarray(T.real)


def tensor_nuclear_norm(T):
    """Sum of matrix nuclear norms over the Fourier-domain frontal slices."""
    F = fft_mode3(T)
    total = 0.0
    for k in range(F.shape[2]):
        try:
            s = np.linalg.svd(F[:, :, k], compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD did not converge on Fourier slice {k}: {exc}") from exc
        total += float(np.abs(s).sum())
    return total


def tubal_shrink(T, tau):
    """Tubal shrinkage: Fourier-domain per-slice singular value thresholding.

    Transforms along the tube axis, shrinks each slice's singular values by
    tau (multiplying sigma by max(1 - tau/sigma, 0)), and transforms back.
    For real input the Fourier slices come in conjugate pairs, so only the
    first half is factorized and the rest is mirrored.
    """
    T = check_tensor3(T, "T")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    F = np.fft.fft(T, axis=2)
    n3 = T.shape[2]
    out = np.empty_like(F)
    half = n3 // 2
    for k in range(half + 1):
        slab = F[:, :, k]
        if k == 0 or (n3 % 2 == 0 and k == half):
            slab = slab.real  # self-conjugate slices of a real tensor are real
        try:
            U, s, Vt = np.linalg.svd(slab, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD did not converge on Fourier slice {k}: {exc}") from exc
        out[:, :, k] = (U * np.maximum(s - tau, 0.0)) @ Vt
    for k in range(half + 1, n3):
        out[:, :, k] = np.conj(out[:, :, n3 - k])
    G = np.fft.ifft(out, axis=2)
    resid = np.abs(G.imag).max()
    if resid > 1e-9:
        raise NumericalError(f"tubal shrinkage produced imaginary residue {resid:.3e}")
    return np.ascontiguousarray(G.real)
