"""Least-squares SVM regression with a Gaussian RBF kernel.

Training reduces to one dense linear system

    [[0,   1^T        ],   [[b],     [[0],
     [1,   K + I/gamma]] .  [a]]  =   [y]]

where K is the RBF kernel matrix of the training inputs. The solver uses an
LU factorization with partial pivoting and refuses to return solutions from
systems that are numerically singular.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

# Pivots smaller than this fraction of the largest matrix entry are treated
# as a singular factorization.
PIVOT_RTOL = 1e-12
# Largest acceptable relative residual of the KKT solve.
RESIDUAL_RTOL = 1e-8


class NumericError(RuntimeError):
    """Raised when the KKT system is too ill-conditioned to solve reliably."""


@dataclass(frozen=True)
class Hyperparams:
    """Error penalty ``gamma`` and squared RBF width ``sigma2``, both > 0."""

    gamma: float
    sigma2: float

    def __post_init__(self):
        for name in ("gamma", "sigma2"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be a finite positive real, got {v!r}")


@dataclass(frozen=True)
class LssvmModel:
    """Trained dual model: stored inputs, dual coefficients, bias.

    Instances are immutable after construction (arrays are marked read-only)
    and safe to share between threads.
    """

    support_inputs: np.ndarray
    dual_coeffs: np.ndarray
    bias: float
    hyperparams: Hyperparams

    def __post_init__(self):
        X = np.asarray(self.support_inputs, dtype=float)
        a = np.asarray(self.dual_coeffs, dtype=float)
        if X.ndim != 2 or a.ndim != 1:
            raise ValueError("support_inputs must be 2-D and dual_coeffs 1-D")
        if a.shape[0] != X.shape[0]:
            raise ValueError(
                f"dual_coeffs length {a.shape[0]} != support row count {X.shape[0]}"
            )
        if not (np.isfinite(X).all() and np.isfinite(a).all() and np.isfinite(self.bias)):
            raise ValueError("model entries must all be finite")
        X = X.copy()
        a = a.copy()
        X.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "support_inputs", X)
        object.__setattr__(self, "dual_coeffs", a)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def n_support(self) -> int:
        return self.support_inputs.shape[0]


def rbf_kernel(x, x2, sigma2: float) -> float:
    """Gaussian kernel exp(-||x - x2||^2 / (2 sigma2)) of two feature vectors."""
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != x2.shape or x.ndim != 1:
        raise ValueError(f"vectors must be 1-D with equal length, got {x.shape} and {x2.shape}")
    if not np.isfinite(sigma2) or sigma2 <= 0:
        raise ValueError(f"sigma2 must be a finite positive real, got {sigma2!r}")
    d = x - x2
    return float(np.exp(-np.dot(d, d) / (2.0 * sigma2)))


def pairwise_sq_dists(X, X2=None) -> np.ndarray:
    """Squared Euclidean distances between rows of X and rows of X2 (or X).

    Computed via the Gram-matrix expansion so it stays O(n^2 d) in time and
    O(n^2) in memory. For X2 is None the result has an exactly zero diagonal
    and is exactly symmetric.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    symmetric = X2 is None
    X2 = X if symmetric else np.atleast_2d(np.asarray(X2, dtype=float))
    if X.shape[1] != X2.shape[1]:
        raise ValueError(f"column counts differ: {X.shape[1]} vs {X2.shape[1]}")
    sq1 = np.einsum("ij,ij->i", X, X)
    sq2 = sq1 if symmetric else np.einsum("ij,ij->i", X2, X2)
    d2 = sq1[:, None] + sq2[None, :] - 2.0 * (X @ X2.T)
    np.maximum(d2, 0.0, out=d2)
    if symmetric:
        d2 = 0.5 * (d2 + d2.T)
        np.fill_diagonal(d2, 0.0)
    return d2


def kernel_from_sq_dists(sq_dists: np.ndarray, sigma2: float, out=None) -> np.ndarray:
    """RBF kernel values from precomputed squared distances."""
    if not np.isfinite(sigma2) or sigma2 <= 0:
        raise ValueError(f"sigma2 must be a finite positive real, got {sigma2!r}")
    out = np.multiply(sq_dists, -0.5 / sigma2, out=out)
    return np.exp(out, out=out)


def build_kernel_matrix(X, sigma2: float) -> np.ndarray:
    """N x N RBF kernel matrix of the rows of X; symmetric with unit diagonal."""
    return kernel_from_sq_dists(pairwise_sq_dists(X), sigma2)


def train(X, y, hp: Hyperparams, sq_dists: np.ndarray | None = None) -> LssvmModel:
    """Solve the dual KKT system for (a, b) and return the trained model.

    Parameters
    ----------
    X : (N, m) training inputs.
    y : (N,) training targets.
    hp : hyperparameters (gamma, sigma2).
    sq_dists : optional precomputed ``pairwise_sq_dists(X)``. The squared
        distances do not depend on sigma2, so callers evaluating many
        hyperparameter settings on one training set should precompute them.

    Raises
    ------
    NumericError
        If the factorization produces a near-zero pivot or the solution's
        relative residual exceeds ``RESIDUAL_RTOL``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"row count {X.shape[0]} != target count {y.shape[0]}")
    if X.shape[0] < 1:
        raise ValueError("need at least one training sample")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("training data must be finite")

    n = X.shape[0]
    if sq_dists is None:
        sq_dists = pairwise_sq_dists(X)
    K = kernel_from_sq_dists(sq_dists, hp.sigma2)

    A = np.empty((n + 1, n + 1))
    A[0, 0] = 0.0
    A[0, 1:] = 1.0
    A[1:, 0] = 1.0
    A[1:, 1:] = K
    idx = np.arange(1, n + 1)
    A[idx, idx] += 1.0 / hp.gamma
    rhs = np.concatenate(([0.0], y))

    with warnings.catch_warnings():
        # The pivot check below turns singularity into NumericError.
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A, check_finite=False)
    min_pivot = np.abs(np.diag(lu)).min()
    scale = np.abs(A).max()
    if min_pivot < PIVOT_RTOL * scale:
        raise NumericError(
            f"near-singular KKT system: min pivot {min_pivot:.3e} "
            f"< {PIVOT_RTOL:.0e} * max|A| ({scale:.3e}); "
            f"gamma={hp.gamma:.6g} sigma2={hp.sigma2:.6g} n={n}"
        )
    sol = lu_solve((lu, piv), rhs, check_finite=False)

    rhs_norm = np.linalg.norm(rhs)
    residual = np.linalg.norm(A @ sol - rhs)
    rel_residual = residual / rhs_norm if rhs_norm > 0 else residual
    if not np.isfinite(rel_residual) or rel_residual > RESIDUAL_RTOL:
        raise NumericError(
            f"KKT solve residual {rel_residual:.3e} exceeds {RESIDUAL_RTOL:.0e} "
            f"(min pivot {min_pivot:.3e}, gamma={hp.gamma:.6g}, sigma2={hp.sigma2:.6g}, n={n})"
        )

    return LssvmModel(support_inputs=X, dual_coeffs=sol[1:], bias=float(sol[0]), hyperparams=hp)


def predict(model: LssvmModel, Xq, sq_dists: np.ndarray | None = None) -> np.ndarray:
    """Evaluate f(x) = sum_i a_i k(x, x_i) + b at each query row of Xq.

    ``sq_dists`` may carry precomputed squared distances between the query
    rows and the support rows.
    """
    Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
    if Xq.shape[1] != model.support_inputs.shape[1]:
        raise ValueError(
            f"query dimension {Xq.shape[1]} != model dimension {model.support_inputs.shape[1]}"
        )
    if sq_dists is None:
        sq_dists = pairwise_sq_dists(Xq, model.support_inputs)
    K = kernel_from_sq_dists(sq_dists, model.hyperparams.sigma2)
    return K @ model.dual_coeffs + model.bias
