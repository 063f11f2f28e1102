"""Linear fast/slow hyperbolic model and its homogenized approximations.

The model couples ``l`` fast variables ``U`` to one slow variable ``B``::

    U_t + A U_x = -g B_x,
    B_t + eps c^T U_x = 0,

i.e. ``V_t + C_eps V_x = 0`` with ``V = (U, B)``.  Everything here is exact
linear algebra plus translation along characteristics, so the error orders
of the homogenized models can be measured without discretization error.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

Profile = Callable[[np.ndarray], np.ndarray]


class SpectrumError(ValueError):
    """Complex, repeated or defective spectrum."""


@dataclass(frozen=True)
class LinearModelSpec:
    """Coefficients of the linear model.

    ``separation`` is the required ratio ``min |lambda_i| / eps``.
    """

    A: np.ndarray
    g: np.ndarray
    c: np.ndarray
    eps: float
    separation: float = 100.0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        g = np.atleast_1d(np.asarray(self.g, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "c", c)
        l = A.shape[0]
        if A.shape != (l, l) or g.shape != (l,) or c.shape != (l,):
            raise ValueError("A must be l x l and g, c must have length l")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        lam = self.eigenvalues
        if np.min(np.abs(lam)) <= self.separation * self.eps:
            raise SpectrumError(f"eigenvalues {lam} are not separated from eps={self.eps:g}")

    @classmethod
    def from_eigen(cls, eigenvalues, X, g, c, eps: float, **kw) -> "LinearModelSpec":
        """Build ``A = X^{-1} diag(eigenvalues) X`` (rows of ``X`` are left eigenvectors)."""
        X = np.asarray(X, dtype=float)
        A = np.linalg.solve(X, np.diag(np.asarray(eigenvalues, dtype=float)) @ X)
        return cls(A, g, c, eps, **kw)

    @property
    def l(self) -> int:
        return self.A.shape[0]

    @property
    def left_eigen(self) -> tuple[np.ndarray, np.ndarray]:
        """``(lam, X)`` with ``X A = diag(lam) X``, eigenvalues in decreasing order."""
        w, V = np.linalg.eig(self.A.T)
        if np.max(np.abs(w.imag)) > 1e-12 * max(1.0, np.max(np.abs(w))):
            raise SpectrumError("A has complex eigenvalues")
        w = w.real
        order = np.argsort(-w)
        w = w[order]
        if np.min(np.abs(np.diff(w)), initial=np.inf) <= 1e-10 * max(1.0, np.max(np.abs(w))):
            raise SpectrumError("A has a repeated eigenvalue")
        X = V.real[:, order].T
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        return w, X

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.left_eigen[0]

    @property
    def C_eps(self) -> np.ndarray:
        l = self.l
        C = np.zeros((l + 1, l + 1))
        C[:l, :l] = self.A
        C[:l, l] = self.g
        C[l, :l] = self.eps * self.c
        return C


def homogenized_speeds(spec: LinearModelSpec) -> tuple[float, float]:
    """Zeroth- and first-order bed speeds (in slow time ``tau = eps t``)."""
    Ainv_g = np.linalg.solve(spec.A, spec.g)
    lam0 = -float(spec.c @ Ainv_g)
    lam1 = lam0 - spec.eps * lam0 * float(spec.c @ np.linalg.solve(spec.A, Ainv_g))
    return lam0, lam1


@dataclass
class PerturbedEigen:
    """Exact and first-order blocks of the left eigen-decomposition of ``C_eps``.

    ``K C = D K`` at ``eps = 0`` and ``K_eps C_eps = D_eps K_eps``.  The hat
    fields are the differences ``(K_eps - K) / eps`` split into blocks, so
    they equal the first-order coefficients up to ``O(eps)``.
    """

    eps: float
    lam: np.ndarray
    X: np.ndarray
    K: np.ndarray
    D: np.ndarray
    K_eps: np.ndarray
    D_eps: np.ndarray
    X_hat: np.ndarray
    alpha_hat: np.ndarray
    beta_hat: np.ndarray
    theta_hat: float
    Lambda_hat: np.ndarray
    mu: float

    @property
    def eigenvalues_eps(self) -> np.ndarray:
        """Eigenvalues of ``C_eps``: the ``l`` fast ones, then ``eps * mu``."""
        return np.diag(self.D_eps).copy()

    def relation_residuals(self, g, c) -> tuple[float, float]:
        """``eps``-scaled residuals of the two first-order eigen-relations.

        Both relations hold up to ``eps`` times products of hat coefficients,
        so each returned value is ``O(eps^2)``.
        """
        lam, X, eps = self.lam, self.X, self.eps
        Lam = np.diag(lam)
        Lh = np.diag(self.Lambda_hat)
        Xg = X @ g
        r1 = self.X_hat @ g - Lam @ self.alpha_hat - Lh @ (Xg / lam)
        lhs = np.outer(Xg / lam, c)
        rhs = Lam @ self.X_hat + Lh @ X - self.X_hat @ np.linalg.solve(X, Lam @ X)
        return eps * float(np.max(np.abs(r1))), eps * float(np.max(np.abs(lhs - rhs)))


def _eig_real(C: np.ndarray):
    w, V = np.linalg.eig(C.T)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.max(np.abs(w.imag)) > 1e-10 * scale:
        raise SpectrumError("complex eigenvalues")
    if np.linalg.cond(V) > 1e12:
        raise SpectrumError("defective (nearly parallel eigenvectors)")
    return w.real, V.real.T


def decompose(spec: LinearModelSpec) -> PerturbedEigen:
    """Exact ``eps = 0`` blocks and the numerically perturbed ones."""
    l, eps = spec.l, spec.eps
    lam, X = spec.left_eigen
    Xg_over = (X @ spec.g) / lam
    K = np.zeros((l + 1, l + 1))
    K[:l, :l] = X
    K[:l, l] = Xg_over
    K[l, l] = 1.0
    D = np.diag(np.append(lam, 0.0))

    w, rows = _eig_real(spec.C_eps)
    fast = [int(np.argmin(np.abs(w - lk))) for lk in lam]
    if len(set(fast)) != l:
        raise SpectrumError("perturbed eigenvalues cannot be matched to A's")
    slow = (set(range(l + 1)) - set(fast)).pop()
    K_eps = np.zeros_like(K)
    for k, j in enumerate(fast):
        r = rows[j]
        K_eps[k] = r * (r @ K[k]) / (r @ r)
    K_eps[l] = rows[slow] / rows[slow][l]
    D_eps = np.diag(np.append(w[fast], w[slow]))

    return PerturbedEigen(
        eps=eps, lam=lam, X=X, K=K, D=D, K_eps=K_eps, D_eps=D_eps,
        X_hat=(K_eps[:l, :l] - X) / eps,
        alpha_hat=(K_eps[:l, l] - Xg_over) / eps,
        beta_hat=K_eps[l, :l] / eps,
        theta_hat=(K_eps[l, l] - 1.0) / eps,
        Lambda_hat=(w[fast] - lam) / eps,
        mu=w[slow] / eps,
    )


# ------------------------------------------------------------ exact solutions

def characteristic_solve(C: np.ndarray, V0: Callable[[np.ndarray], np.ndarray], x, t: float
                         ) -> np.ndarray:
    """Exact solution of ``V_t + C V_x = 0`` for diagonalizable real ``C``.

    ``V0(x)`` returns an array of shape ``(m, len(x))``.  Each characteristic
    projection of the initial data is translated at its own speed.
    """
    x = np.asarray(x, dtype=float)
    w, L = _eig_real(np.asarray(C, dtype=float))
    R = np.linalg.inv(L)
    out = np.zeros((C.shape[0], x.size))
    for k in range(w.size):
        proj = L[k] @ np.asarray(V0(x - w[k] * t), dtype=float)
        out += np.outer(R[:, k], proj)
    return out


def exact_solve(spec: LinearModelSpec, V0: Callable[[np.ndarray], np.ndarray], x, t: float
                ) -> np.ndarray:
    """``V(x, t)`` of the full model from initial data ``V0``."""
    return characteristic_solve(spec.C_eps, V0, x, t)


def periodic_mean(f: Profile, period: float = 1.0, n: int = 4096) -> float:
    """Mean of a smooth periodic function (rectangle rule, spectrally accurate)."""
    return float(np.mean(f(np.arange(n) * (period / n))))


def prepared_gradient_map(spec: LinearModelSpec, order: int, pe: PerturbedEigen | None = None
                          ) -> np.ndarray:
    """Vector ``m`` with ``U_x = m B_x`` for well-prepared data of the given order."""
    if order == 0:
        return -np.linalg.solve(spec.A, spec.g)
    if order != 1:
        raise ValueError("order must be 0 or 1")
    pe = pe or decompose(spec)
    XinvLam = np.linalg.solve(pe.X, np.diag(pe.lam))
    M = spec.A + spec.eps * XinvLam @ pe.X_hat
    v = spec.g + spec.eps * XinvLam @ pe.alpha_hat
    if np.linalg.cond(M) > 1e12:
        raise np.linalg.LinAlgError("corrected fast matrix is singular")
    return -np.linalg.solve(M, v)


def prepare_initial(spec: LinearModelSpec, B0: Profile, order: int = 1,
                    pe: PerturbedEigen | None = None, period: float = 1.0) -> Profile:
    """Fast initial data ``U0(x)`` (shape ``(l, n)``) balanced against ``B0``.

    ``U0 = m (B0 - mean B0)`` so that ``U0`` has zero mean and its gradient
    satisfies the order-0 or order-1 preparation condition.
    """
    m = prepared_gradient_map(spec, order, pe)
    mean = periodic_mean(B0, period)

    def U0(x):
        return np.outer(m, np.asarray(B0(x), dtype=float) - mean)

    return U0


def stack_initial(U0: Profile, B0: Profile) -> Callable[[np.ndarray], np.ndarray]:
    def V0(x):
        return np.vstack([U0(x), np.asarray(B0(x), dtype=float)[None, :]])

    return V0


def varphi_terms(spec: LinearModelSpec, B0: Profile, x, tau: float,
                 phi0: Profile | None = None, pe: PerturbedEigen | None = None
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Four-term decomposition of ``X phi`` where ``phi = U1 - U0``.

    ``U1`` solves the fast equations driven by the zeroth-order bed and
    ``U0`` is the steady state for the initial bed.  Returns the ``O(eps)``
    term, the ``O(tau)`` term and the two high-order terms, each of shape
    ``(l, len(x))``.  ``phi0`` defaults to the difference between order-1
    and order-0 prepared data.
    """
    x = np.asarray(x, dtype=float)
    pe = pe or decompose(spec)
    lam, X, eps = pe.lam, pe.X, spec.eps
    lam0, _ = homogenized_speeds(spec)
    if phi0 is None:
        U1 = prepare_initial(spec, B0, 1, pe)
        U0 = prepare_initial(spec, B0, 0, pe)

        def phi0(y):
            return U1(y) - U0(y)

    Xg = X @ spec.g
    l = spec.l
    t_eps = np.zeros((l, x.size))
    t_tau = np.zeros((l, x.size))
    t_hi1 = np.zeros((l, x.size))
    t_hi2 = np.zeros((l, x.size))
    b_here = B0(x)
    b_slow = B0(x - lam0 * tau)
    for k in range(l):
        coef = eps * Xg[k] * lam0 / (lam[k] * (lam[k] - eps * lam0))
        shifted = x - lam[k] / eps * tau
        t_eps[k] = -coef * b_here
        t_tau[k] = -Xg[k] / (lam[k] - eps * lam0) * (b_slow - b_here)
        t_hi1[k] = (X @ phi0(shifted))[k]
        t_hi2[k] = coef * B0(shifted)
    return t_eps, t_tau, t_hi1, t_hi2


def driven_fast_solution(spec: LinearModelSpec, U0: Profile, B0: Profile, x, t: float
                         ) -> np.ndarray:
    """Fast variables forced by the zeroth-order bed ``B0(x - eps lam0 t)``."""
    l = spec.l
    lam0, _ = homogenized_speeds(spec)
    C1 = np.zeros((l + 1, l + 1))
    C1[:l, :l] = spec.A
    C1[:l, l] = spec.g
    C1[l, l] = spec.eps * lam0
    return characteristic_solve(C1, stack_initial(U0, B0), x, t)[:l]


# --------------------------------------------------------------- order study

def smooth_bump(x) -> np.ndarray:
    """``sin(pi x)^4``: smooth, 1-periodic, finite Fourier content."""
    return np.sin(np.pi * np.asarray(x, dtype=float)) ** 4


def default_spec(eps: float = 1e-2) -> LinearModelSpec:
    """Two fast variables with speeds +3 and -3."""
    X = np.array([[1.0, 0.5], [0.3, 1.0]])
    return LinearModelSpec.from_eigen([3.0, -3.0], X, g=[1.0, 0.5], c=[1.0, -0.4], eps=eps)


@dataclass
class OrderStudy:
    eps: np.ndarray
    error0: np.ndarray
    error1: np.ndarray
    slope0: float
    slope1: float
    speed_error: np.ndarray
    """``|mu - lambda_B^(1)|`` per eps."""
    speed_slope: float
    relation_residual: np.ndarray
    """Largest eps-scaled eigen-relation residual per eps."""

    def rows(self):
        return [(e, a, b, s, r) for e, a, b, s, r in
                zip(self.eps, self.error0, self.error1, self.speed_error,
                    self.relation_residual)]


def fitted_slope(h, err) -> float:
    """Least-squares slope of ``log err`` against ``log h``."""
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def order_study(spec: LinearModelSpec, B0: Profile = smooth_bump, eps_list=None,
                c_time: float = 1.0, samples: int = 2048, order: int = 1) -> OrderStudy:
    """Errors of the homogenized beds at ``t = c_time / eps`` over an eps sweep.

    ``spec.eps`` is replaced by each entry of ``eps_list``.  The initial fast
    data are prepared to ``order``.
    """
    eps_list = np.asarray(eps_list if eps_list is not None
                          else [1e-2, 5e-3, 2.5e-3, 1.25e-3], dtype=float)
    if eps_list.size < 2:
        raise ValueError("need at least two values of eps")
    x = np.arange(samples) / samples
    e0, e1, se, rr = [], [], [], []
    for eps in eps_list:
        s = replace(spec, eps=float(eps))
        pe = decompose(s)
        U0 = prepare_initial(s, B0, order, pe)
        t = c_time / eps
        tau = eps * t
        B = exact_solve(s, stack_initial(U0, B0), x, t)[-1]
        lam0, lam1 = homogenized_speeds(s)
        e0.append(np.max(np.abs(B - B0(x - lam0 * tau))))
        e1.append(np.max(np.abs(B - B0(x - lam1 * tau))))
        se.append(abs(pe.mu - lam1))
        rr.append(max(pe.relation_residuals(s.g, s.c)))
    e0, e1, se, rr = map(np.asarray, (e0, e1, se, rr))
    return OrderStudy(eps_list, e0, e1, fitted_slope(eps_list, e0), fitted_slope(eps_list, e1),
                      se, fitted_slope(eps_list, se), rr)
