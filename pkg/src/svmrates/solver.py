"""Regularized empirical-risk training over the Gaussian RKHS.

The trainer minimizes ``mean_i phi(y_i f(x_i)) + lam * ||f||^2`` over the
kernel space.  By the representer theorem the minimizer is a kernel
expansion over the sample points, so the problem reduces to a convex
program in the coefficient vector.

Smooth losses are solved by L-BFGS on the coefficients with the analytic
gradient and a Euclidean gradient-norm stopping rule.  The hinge loss is
solved by dual coordinate descent on the equivalent bias-free SVM dual
(box constraint C = 1/(2*lam*m)) with a duality-gap certificate.  Both
start from the zero expansion, whose objective equals the loss value at
margin zero, so the final objective and the scaled RKHS norm never exceed
that value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .kernel import GaussianKernel, SolverDiagnostics, TrainedModel, gram
from .losses import HINGE, Loss

DUAL_COORDINATE_DESCENT = "dual_coordinate_descent"

# Schedule regimes, named by the setting they cover.  The tags are the ones
# used in experiment configs and reports.
REGIME_NO_NOISE = "T1"            # smoothness only
REGIME_TSYBAKOV_SMOOTH = "T2"     # smoothness + noise exponent, smooth loss
REGIME_TSYBAKOV_HINGE = "T3"      # smoothness + noise exponent, hinge loss
REGIME_INFINITELY_SMOOTH = "C5"   # flat-width fast-rate setting
REGIMES = (REGIME_NO_NOISE, REGIME_TSYBAKOV_SMOOTH, REGIME_TSYBAKOV_HINGE,
           REGIME_INFINITELY_SMOOTH)

_DEFAULT_HINGE_GAP_TOL = 1e-6
_GRAM_REFRESH_EPOCHS = 64


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Regularization weight and termination controls.

    ``tol`` is the Euclidean norm bound on the coefficient-space gradient
    for smooth losses and the duality-gap bound for the hinge loss.  When
    None it defaults to ``1e-8 * m`` (smooth) or ``1e-6`` (hinge).
    ``max_iters`` caps L-BFGS iterations or coordinate-descent epochs.
    """

    lam: float
    max_iters: int = 4000
    tol: float | None = None
    hinge_strategy: str = DUAL_COORDINATE_DESCENT

    def __post_init__(self):
        if not (self.lam > 0.0 and np.isfinite(self.lam)):
            raise ValueError(f"lam must be a positive real, got {self.lam}")
        if self.tol is not None and not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.hinge_strategy != DUAL_COORDINATE_DESCENT:
            raise ValueError(f"unknown hinge strategy {self.hinge_strategy!r}")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labeled sample on the unit cube with its generating seed."""

    points: np.ndarray
    labels: np.ndarray
    seed: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        y = np.asarray(self.labels, dtype=float)
        if pts.ndim != 2 or y.ndim != 1 or pts.shape[0] != y.size:
            raise ValueError(
                f"points {pts.shape} and labels {y.shape} are inconsistent"
            )
        if pts.size and (pts.min() < -1e-12 or pts.max() > 1.0 + 1e-12):
            raise ValueError("points must lie in the unit cube")
        if not np.all(np.abs(y) == 1.0):
            raise ValueError("labels must be -1 or +1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", y)

    @property
    def m(self) -> int:
        return self.labels.size

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def objective(data: Dataset, loss: Loss, sigma: float, lam: float, coeffs) -> float:
    """Regularized empirical risk of a coefficient vector on the sample."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (data.m,):
        raise ValueError(f"coeffs shape {c.shape} does not match m={data.m}")
    k = gram(GaussianKernel(sigma), data.points)
    f = k @ c
    emp = float(np.mean(loss.value(data.labels * f)))
    return emp + lam * float(c @ f)


def _train_smooth(k: np.ndarray, y: np.ndarray, loss: Loss, lam: float,
                  max_iters: int, tol: float):
    m = y.size
    last_grad_norm = [math.inf]

    def fun(alpha):
        f = k @ alpha
        u = y * f
        val = float(np.mean(loss.value(u))) + lam * float(alpha @ f)
        grad = k @ (y * loss.deriv(u)) / m + 2.0 * lam * f
        last_grad_norm[0] = float(np.linalg.norm(grad))
        return val, grad

    def stop_when_stationary(_xk):
        # the Euclidean stopping rule; L-BFGS-B's own test uses max|g|
        if last_grad_norm[0] <= tol:
            raise StopIteration

    alpha = np.zeros(m)
    nit = 0
    residual = math.inf
    val = float(loss.value(0.0))
    # restart when the inner loop quits (rounding stalls the line search)
    # with budget left over
    while nit < max_iters:
        res = minimize(
            fun,
            alpha,
            jac=True,
            method="L-BFGS-B",
            callback=stop_when_stationary,
            options=dict(maxiter=max_iters - nit, maxfun=40 * max_iters,
                         maxcor=20, gtol=tol / (10.0 * math.sqrt(m)), ftol=0.0),
        )
        alpha = res.x
        nit += max(int(res.nit), 1)
        val, grad = fun(alpha)
        residual = float(np.linalg.norm(grad))
        if residual <= tol or not res.nit:
            break
    return alpha, SolverDiagnostics(
        iterations=nit,
        final_objective=val,
        stationarity_residual=residual,
        converged=residual <= tol,
        method="lbfgs",
    )


def _train_hinge_dcd(k: np.ndarray, y: np.ndarray, lam: float,
                     max_iters: int, tol: float, order_seed: int):
    m = y.size
    c_box = 1.0 / (2.0 * lam * m)
    beta = np.zeros(m)
    alpha = np.zeros(m)
    f = np.zeros(m)  # cached K @ alpha
    rng = np.random.default_rng((order_seed & 0xFFFFFFFF, 0xD0A1))
    gap = math.inf
    primal = 1.0
    epoch = 0

    for epoch in range(1, max_iters + 1):
        for i in rng.permutation(m):
            g_i = y[i] * f[i] - 1.0
            b = beta[i]
            if (b <= 0.0 and g_i >= 0.0) or (b >= c_box and g_i <= 0.0):
                continue
            nb = min(max(b - g_i, 0.0), c_box)  # unit kernel diagonal
            step = nb - b
            if step != 0.0:
                beta[i] = nb
                alpha[i] += y[i] * step
                f += (y[i] * step) * k[i]
        if epoch % _GRAM_REFRESH_EPOCHS == 0:
            f = k @ alpha  # shed incremental round-off
        reg = float(alpha @ f)
        primal = float(np.mean(np.maximum(1.0 - y * f, 0.0))) + lam * reg
        dual = 2.0 * lam * float(beta.sum()) - lam * reg
        gap = primal - dual
        if gap <= tol:
            break

    return alpha, SolverDiagnostics(
        iterations=epoch,
        final_objective=primal,
        stationarity_residual=gap,
        converged=gap <= tol,
        method="dual_coordinate_descent",
    )


def train(data: Dataset, loss: Loss, sigma: float, config: SolverConfig) -> TrainedModel:
    """Fit the regularized kernel minimizer on a dataset.

    Non-convergence within the iteration budget is reported through
    ``diagnostics.converged``, never silently.
    """
    if data.m < 1:
        raise ValueError("training requires at least one sample")
    k = gram(GaussianKernel(sigma), data.points)
    y = data.labels
    if loss.kind == HINGE:
        tol = config.tol if config.tol is not None else _DEFAULT_HINGE_GAP_TOL
        alpha, diag = _train_hinge_dcd(k, y, config.lam, config.max_iters, tol,
                                       order_seed=data.seed)
    else:
        tol = config.tol if config.tol is not None else 1e-8 * data.m
        alpha, diag = _train_smooth(k, y, loss, config.lam, config.max_iters, tol)
    norm_sq = float(alpha @ (k @ alpha))
    return TrainedModel(
        support_points=data.points,
        coeffs=alpha,
        sigma=sigma,
        lam=config.lam,
        norm_sq=norm_sq,
        diagnostics=diag,
    )


def schedule(m: int, r: float, d: int, q: float, loss: Loss, regime: str):
    """Regularization and width schedule (lam, sigma) for a sample size.

    The regularization weight is 1/m in every regime.  The width is
    m**(-1/(2r+d)) under T1/T2, m**(-(q+1)/((q+2)r+(q+1)d)) under T3 and
    the constant 1 under C5.  Infinite r or q are taken as limits.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    if regime == REGIME_TSYBAKOV_HINGE and loss.kind != HINGE:
        raise ValueError("regime T3 applies to the hinge loss only")
    if regime == REGIME_TSYBAKOV_SMOOTH and loss.kind == HINGE:
        raise ValueError("regime T2 applies to smooth losses only")
    lam = 1.0 / m
    if regime == REGIME_INFINITELY_SMOOTH:
        return lam, 1.0
    if regime == REGIME_TSYBAKOV_HINGE:
        if q < 0.0:
            raise ValueError(f"q must be >= 0, got {q}")
        if math.isinf(r):
            expo = 0.0
        elif math.isinf(q):
            expo = 1.0 / (r + d)
        else:
            expo = (q + 1.0) / ((q + 2.0) * r + (q + 1.0) * d)
    else:  # T1 / T2 share the width schedule
        if not r > 0.0:
            raise ValueError(f"r must be positive, got {r}")
        expo = 0.0 if math.isinf(r) else 1.0 / (2.0 * r + d)
    return lam, float(m) ** (-expo)
