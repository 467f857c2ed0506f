"""Convex margin losses for binary classification.

Three losses are supported: the hinge loss ``max(1-u, 0)``, the quadratic
loss ``(1-u)**2`` and the truncated quadratic loss ``max(1-u, 0)**2``.
All of them are convex, vanish for u >= 1 and have a negative slope at 0,
so thresholding a small-risk score function gives a small-regret
classifier.  The two quadratic-type losses additionally have a Lipschitz
derivative and a quadratic modulus of convexity on the clipped range
[-1, 1]; the constants are stored on the loss object.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HINGE = "hinge"
QUADRATIC = "quadratic"
TRUNCATED_QUADRATIC = "truncated_quadratic"

LOSS_KINDS = (HINGE, QUADRATIC, TRUNCATED_QUADRATIC)


class UnsupportedLossError(ValueError):
    """Raised when an operation requires curvature the loss does not have."""


def _scalar_or_array(out: np.ndarray, like) -> float | np.ndarray:
    if np.isscalar(like) or getattr(like, "ndim", 0) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Loss:
    """One margin loss with its curvature constants.

    ``mu`` is the largest constant with modulus-of-convexity
    ``delta(eps) >= mu * eps**2`` over the clipped range [-1, 1] and
    ``lipschitz_deriv`` the smallest Lipschitz constant of the derivative.
    Both are None for the hinge loss, which is not differentiable.
    ``phi_zero`` is the loss value at margin 0 (equal to 1 for all kinds);
    it bounds the trained objective and the scaled RKHS norm.
    """

    kind: str
    mu: float | None
    lipschitz_deriv: float | None
    phi_zero: float = 1.0

    def value(self, u) -> float | np.ndarray:
        """Loss value at margin u; total on all of R."""
        u = np.asarray(u, dtype=float)
        if self.kind == QUADRATIC:
            out = (1.0 - u) ** 2
        elif self.kind == TRUNCATED_QUADRATIC:
            out = np.maximum(1.0 - u, 0.0) ** 2
        else:
            out = np.maximum(1.0 - u, 0.0)
        return _scalar_or_array(out, u)

    def deriv(self, u) -> float | np.ndarray:
        """Derivative at margin u.

        The hinge loss is not differentiable at u = 1; the subgradient 0 is
        returned there, so a perfectly separated dataset is a fixed point.
        """
        u = np.asarray(u, dtype=float)
        if self.kind == QUADRATIC:
            out = -2.0 * (1.0 - u)
        elif self.kind == TRUNCATED_QUADRATIC:
            out = -2.0 * np.maximum(1.0 - u, 0.0)
        else:
            out = np.where(u < 1.0, -1.0, 0.0)
        return _scalar_or_array(out, u)

    def regression_target(self, eta) -> float | np.ndarray:
        """Pointwise minimizer of the conditional loss risk at P[y=1|x]=eta.

        Quadratic-type losses give 2*eta - 1; the hinge loss gives its sign,
        with the tie eta = 1/2 resolved to +1.
        """
        eta = np.asarray(eta, dtype=float)
        if np.any(eta < 0.0) or np.any(eta > 1.0):
            raise ValueError("eta must lie in [0, 1]")
        t = 2.0 * eta - 1.0
        if self.kind == HINGE:
            t = sign_plus(t)
        return _scalar_or_array(t, eta)


_LOSSES = {
    HINGE: Loss(kind=HINGE, mu=None, lipschitz_deriv=None),
    QUADRATIC: Loss(kind=QUADRATIC, mu=0.25, lipschitz_deriv=2.0),
    TRUNCATED_QUADRATIC: Loss(kind=TRUNCATED_QUADRATIC, mu=0.25, lipschitz_deriv=2.0),
}


def make_loss(kind: str) -> Loss:
    """Return the loss object for one of the kind strings in LOSS_KINDS."""
    try:
        return _LOSSES[kind]
    except KeyError:
        raise ValueError(f"unknown loss kind {kind!r}; expected one of {LOSS_KINDS}")


def curvature_constants(loss: Loss) -> tuple[float, float]:
    """(mu, lipschitz) pair of a smooth loss; hinge is rejected."""
    if loss.kind == HINGE:
        raise UnsupportedLossError("hinge loss has no Lipschitz derivative")
    return loss.mu, loss.lipschitz_deriv


def clip(v) -> float | np.ndarray:
    """Truncate scores to [-1, 1].  Idempotent."""
    v = np.asarray(v, dtype=float)
    return _scalar_or_array(np.minimum(1.0, np.maximum(-1.0, v)), v)


def sign_plus(v) -> float | np.ndarray:
    """Sign with the convention sign_plus(0) = +1, matching the Bayes rule."""
    v = np.asarray(v, dtype=float)
    return _scalar_or_array(np.where(v >= 0.0, 1.0, -1.0), v)
