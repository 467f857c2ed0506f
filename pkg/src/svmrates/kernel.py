"""Gaussian kernel, Gram matrices and finite kernel expansions.

The kernel is ``exp(-||x - x'||^2 / sigma^2)`` on the unit cube.  A trained
model is a finite expansion ``f(x) = sum_i coeffs[i] * k(x, x_i)`` over its
support points; its squared RKHS norm is the quadratic form of the Gram
matrix, by the reproducing property.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .losses import sign_plus

# Batch prediction streams the cross-kernel matrix in row blocks so that a
# fine evaluation grid against a large support set stays within ~100 MB.
_PREDICT_BLOCK = 2048


@dataclass(frozen=True)
class GaussianKernel:
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ValueError(f"sigma must be a positive real, got {self.sigma}")


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ValueError(f"points must be an (m, d) array, got shape {pts.shape}")
    return pts


def gauss(kernel: GaussianKernel, x, x2) -> float:
    """Kernel value between two points of equal dimension."""
    a = np.atleast_1d(np.asarray(x, dtype=float))
    b = np.atleast_1d(np.asarray(x2, dtype=float))
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d2 = float(np.sum((a - b) ** 2))
    return float(np.exp(-d2 / kernel.sigma**2))


def gram(kernel: GaussianKernel, points) -> np.ndarray:
    """Dense m-by-m kernel matrix of a point set.

    Symmetric with unit diagonal; positive semidefinite (strictly positive
    definite when the points are distinct).
    """
    pts = _as_points(points)
    if pts.shape[0] == 0:
        raise ValueError("gram requires a nonempty point set")
    d2 = cdist(pts, pts, "sqeuclidean")
    k = np.exp(-d2 / kernel.sigma**2)
    np.fill_diagonal(k, 1.0)
    return k


def cross_gram(kernel: GaussianKernel, x, support) -> np.ndarray:
    """(n, m) kernel matrix between evaluation points and support points."""
    xe = _as_points(x)
    sp = _as_points(support)
    if xe.shape[1] != sp.shape[1]:
        raise ValueError(
            f"dimension mismatch: points have d={xe.shape[1]}, support d={sp.shape[1]}"
        )
    return np.exp(-cdist(xe, sp, "sqeuclidean") / kernel.sigma**2)


def rkhs_norm_sq(gram_matrix: np.ndarray, coeffs) -> float:
    """Squared RKHS norm coeffs' K coeffs of a finite expansion."""
    c = np.asarray(coeffs, dtype=float)
    k = np.asarray(gram_matrix, dtype=float)
    if k.shape != (c.size, c.size):
        raise ValueError(f"dimension mismatch: gram {k.shape}, coeffs {c.shape}")
    return float(c @ (k @ c))


@dataclass(frozen=True)
class SolverDiagnostics:
    iterations: int
    final_objective: float
    stationarity_residual: float
    converged: bool
    method: str


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """Finite Gaussian-kernel expansion produced by the solver.

    ``norm_sq`` is the squared RKHS norm at training time; the solver
    guarantees ``lam * norm_sq <= 1`` (the loss value at margin zero) up to
    1e-8 because the zero function is always feasible.
    """

    support_points: np.ndarray
    coeffs: np.ndarray
    sigma: float
    lam: float
    norm_sq: float
    diagnostics: SolverDiagnostics

    def __post_init__(self):
        pts = _as_points(self.support_points)
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size != pts.shape[0]:
            raise ValueError(
                f"coeffs shape {c.shape} does not match {pts.shape[0]} support points"
            )
        object.__setattr__(self, "support_points", pts)
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self) -> int:
        return self.support_points.shape[1]

    def kernel(self) -> GaussianKernel:
        return GaussianKernel(self.sigma)

    def predict(self, x) -> float | np.ndarray:
        """Score f(x).

        A scalar or a (d,) vector is a single point and returns a float; an
        (n, d) array is a batch and returns an (n,) array.
        """
        xa = np.asarray(x, dtype=float)
        single = xa.ndim <= 1
        xe = xa.reshape(1, -1) if single else xa
        if xe.ndim != 2 or xe.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: x has shape {xa.shape}, model d={self.dim}")
        out = np.empty(xe.shape[0])
        ker = self.kernel()
        for lo in range(0, xe.shape[0], _PREDICT_BLOCK):
            hi = min(lo + _PREDICT_BLOCK, xe.shape[0])
            out[lo:hi] = cross_gram(ker, xe[lo:hi], self.support_points) @ self.coeffs
        return float(out[0]) if single else out

    def classify(self, x) -> float | np.ndarray:
        """Label sign_plus(f(x)) in {-1, +1}."""
        return sign_plus(self.predict(x))


def predict(model: TrainedModel, x) -> float | np.ndarray:
    return model.predict(x)
