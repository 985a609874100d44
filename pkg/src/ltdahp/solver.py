"""Ridge least squares for the output coefficients, and the truncation operator."""

from __future__ import annotations

import numpy as np
from scipy import linalg

__all__ = ["DEFAULT_LAMBDA", "ridge_objective", "ridge_gradient", "ridge_solve", "truncate"]

DEFAULT_LAMBDA = 1e-4
GRAD_RTOL = 1e-8


def ridge_objective(Phi, y, a, lam):
    """``(1/m) ||Phi a - y||^2 + lam ||a||^2``."""
    r = Phi @ a - y
    return float(r @ r) / Phi.shape[0] + lam * float(a @ a)


def ridge_gradient(Phi, y, a, lam):
    return (2.0 / Phi.shape[0]) * (Phi.T @ (Phi @ a - y)) + 2.0 * lam * a


def _gradient_ok(Phi, y, a, lam):
    m = Phi.shape[0]
    bound = GRAD_RTOL * max(1.0, np.linalg.norm(Phi.T @ y) / m)
    return np.linalg.norm(ridge_gradient(Phi, y, a, lam)) <= bound


def _svd_solve(Phi, y, lam):
    m = Phi.shape[0]
    U, s, Vt = linalg.svd(Phi, full_matrices=False, lapack_driver="gesdd")
    uty = U.T @ y
    if lam > 0:
        filt = s / (s * s + m * lam)
    else:
        cutoff = max(Phi.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
        keep = s > cutoff
        filt = np.zeros_like(s)
        filt[keep] = 1.0 / s[keep]
    return Vt.T @ (filt * uty)


def ridge_solve(Phi, y, lam=DEFAULT_LAMBDA):
    """Minimise ``(1/m) ||Phi a - y||^2 + lam ||a||^2`` over ``a``.

    For ``lam > 0`` the regularised normal equations are solved by Cholesky
    factorisation and the result is accepted only if the objective gradient
    is below ``1e-8 * max(1, ||Phi^T y|| / m)``; otherwise, and always for
    ``lam == 0``, a thin SVD of ``Phi`` is used.  With ``lam == 0`` and a
    rank-deficient ``Phi`` the minimum-norm least-squares solution is
    returned.
    """
    Phi = np.asarray(Phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if Phi.ndim != 2 or y.ndim != 1 or Phi.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: design {Phi.shape}, targets {y.shape}")
    if lam < 0 or not np.isfinite(lam):
        raise ValueError(f"lam must be a finite number >= 0, got {lam!r}")
    if not (np.all(np.isfinite(Phi)) and np.all(np.isfinite(y))):
        raise ValueError("design matrix and targets must be finite")
    m, N = Phi.shape
    if lam > 0:
        A = Phi.T @ Phi / m
        A[np.diag_indices(N)] += lam
        try:
            a = linalg.cho_solve(linalg.cho_factor(A, lower=True), Phi.T @ y / m)
        except linalg.LinAlgError:
            a = None
        if a is not None and np.all(np.isfinite(a)) and _gradient_ok(Phi, y, a, lam):
            return a
    return _svd_solve(Phi, y, lam)


def truncate(v, M):
    """``sign(v) * min(M, |v|)``; works elementwise on arrays."""
    if not M > 0:
        raise ValueError(f"M must be > 0, got {M!r}")
    out = np.clip(v, -M, M)
    return float(out) if np.ndim(out) == 0 else out
