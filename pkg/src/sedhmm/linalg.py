"""Right-preconditioned BiCGSTAB with an SSOR preconditioner.

Matrices are :class:`scipy.sparse.csr_matrix`.  The SSOR sweeps run in
compiled code; the Krylov loop itself is plain numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels as K


class LinearSolveError(RuntimeError):
    """BiCGSTAB broke down or ran out of iterations."""

    def __init__(self, message: str, result: "SolveResult"):
        super().__init__(message)
        self.result = result


@dataclass
class SolveResult:
    x: np.ndarray
    iterations: int
    residual: float
    """True relative residual ``||b - A x|| / ||b||`` recomputed at exit."""
    converged: bool
    reason: str


@dataclass(frozen=True)
class SolverParams:
    tol: float = 1e-10
    max_iter: int = 0
    """0 means ``10 * n``."""
    omega: float = 0.955
    precondition: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.omega < 2:
            raise ValueError("SSOR relaxation must lie in (0, 2)")


class SSOR:
    """Symmetric successive over-relaxation preconditioner ``M^{-1}``."""

    def __init__(self, A: sp.csr_matrix, omega: float = 0.955):
        A = sp.csr_matrix(A)
        A.sort_indices()
        diag = A.diagonal()
        if np.any(diag == 0.0):
            raise ValueError("SSOR needs a zero-free diagonal")
        self.A = A
        self.diag = np.ascontiguousarray(diag, dtype=float)
        self.omega = float(omega)

    def __call__(self, r: np.ndarray) -> np.ndarray:
        z = np.empty_like(r)
        K.ssor_apply(self.A.indptr, self.A.indices, self.A.data, self.diag, self.omega,
                     np.ascontiguousarray(r, dtype=float), z)
        return z


def _identity(r):
    return r.copy()


def bicgstab(A, b, x0=None, params: SolverParams | None = None, raise_on_failure: bool = True
             ) -> SolveResult:
    """Solve ``A x = b`` with right-preconditioned BiCGSTAB.

    Convergence is declared when the recursively updated residual drops below
    ``tol * ||b||``; the returned residual is always recomputed from ``A x``.
    On breakdown (``rho`` or ``omega`` vanishing) or iteration exhaustion a
    :class:`LinearSolveError` is raised with the partial result attached,
    unless ``raise_on_failure`` is false.
    """
    params = params or SolverParams()
    A = sp.csr_matrix(A)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise ValueError("A must be square and b must match it")
    max_iter = params.max_iter or 10 * n
    if params.precondition and n > 0:
        try:
            M = SSOR(A, params.omega)
        except ValueError:
            M = _identity
    else:
        M = _identity
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return SolveResult(np.zeros(n), 0, 0.0, True, "zero right-hand side")

    def finish(it, converged, reason):
        res = np.linalg.norm(b - A @ x) / bnorm
        out = SolveResult(x, it, float(res), converged, reason)
        if not converged and raise_on_failure:
            raise LinearSolveError(f"BiCGSTAB {reason} after {it} iterations "
                                   f"(relative residual {res:.3e})", out)
        return out

    r = b - A @ x
    if np.linalg.norm(r) <= params.tol * bnorm:
        return finish(0, True, "initial guess")
    r_hat = r.copy()
    rho_old = alpha = omega = 1.0
    v = np.zeros(n)
    p = np.zeros(n)
    tiny = np.finfo(float).tiny
    for it in range(1, max_iter + 1):
        rho = r_hat @ r
        if abs(rho) <= tiny:
            return finish(it - 1, False, "breakdown (rho = 0)")
        beta = (rho / rho_old) * (alpha / omega)
        p = r + beta * (p - omega * v)
        p_hat = M(p)
        v = A @ p_hat
        denom = r_hat @ v
        if abs(denom) <= tiny:
            return finish(it - 1, False, "breakdown (r_hat . v = 0)")
        alpha = rho / denom
        s = r - alpha * v
        if np.linalg.norm(s) <= params.tol * bnorm:
            x = x + alpha * p_hat
            return finish(it, True, "converged")
        s_hat = M(s)
        t = A @ s_hat
        tt = t @ t
        if tt <= tiny:
            return finish(it, False, "breakdown (t = 0)")
        omega = (t @ s) / tt
        x = x + alpha * p_hat + omega * s_hat
        r = s - omega * t
        if not np.all(np.isfinite(x)):
            return finish(it, False, "breakdown (non-finite iterate)")
        if np.linalg.norm(r) <= params.tol * bnorm:
            return finish(it, True, "converged")
        if omega == 0.0:
            return finish(it, False, "breakdown (omega = 0)")
        rho_old = rho
    return finish(max_iter, False, "reached the iteration limit")
