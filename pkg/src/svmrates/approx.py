"""Constructive smoothing of bounded functions on the unit cube.

A target f on [0,1]^d is extended to an even, 2-periodic function of R^d by
coordinate folding, then convolved with a signed combination of Gaussians

    K(x) = sum_{j=1..s} C(s,j) (-1)^(1-j) j^-d (2/(sigma^2 pi))^(d/2)
           exp(-2 ||x||^2 / (j^2 sigma^2)),

whose total integral is exactly one.  The smoothed function approximates f
at rate sigma^r when f has Hoelder order r <= s, lies in the Gaussian RKHS
of width sigma with norm at most (sqrt(pi))^(-d/2) (2^s - 1) sigma^(-d/2)
times the sup of f, and its own sup is at most (2^s - 1) times that of f.

The convolution is evaluated by tensor trapezoid quadrature truncated at
radius 6*s*sigma per coordinate with step sigma/20, which resolves the
narrowest Gaussian with 10 nodes per standard deviation and leaves tail
mass below 1e-8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EVAL_BLOCK = 512


class BudgetExceededError(RuntimeError):
    """The tensor quadrature grid would exceed the node budget."""


@dataclass(frozen=True)
class ConvKernelSpec:
    """Binomial order s >= 1, Gaussian width and ambient dimension."""

    order: int
    sigma: float
    dim: int = 1

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"order must be an integer >= 1, got {self.order}")
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ValueError(f"sigma must be a positive real, got {self.sigma}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class ConvQuadSpec:
    """Truncation radius (in units of s*sigma), step (sigma fraction), budget."""

    radius_mult: float = 6.0
    step_divisor: float = 20.0
    max_nodes: int = 4_000_000


def binomial_order(r: float) -> int:
    """Smallest integer order covering Hoelder smoothness r."""
    if not r > 0.0:
        raise ValueError(f"r must be positive, got {r}")
    return max(1, math.ceil(r))


def fold(x) -> np.ndarray | float:
    """Map points of R^d into [0,1]^d by even 2-periodic reflection.

    Identity on [0,1]^d; fold(-x) = fold(x) = fold(x + 2*e_j) coordinatewise.
    """
    xa = np.asarray(x, dtype=float)
    w = np.mod(xa, 2.0)
    out = np.minimum(w, 2.0 - w)
    return float(out) if out.ndim == 0 else out


def conv_kernel(spec: ConvKernelSpec, x) -> float | np.ndarray:
    """Kernel value at x (a (d,) point or an (n, d) batch).

    May be negative for order >= 2; the signed masses sum to one.
    """
    xa = np.asarray(x, dtype=float)
    single = xa.ndim <= 1
    pts = xa.reshape(1, -1) if single else xa
    if pts.shape[1] != spec.dim:
        raise ValueError(f"x has dimension {pts.shape[1]}, spec has {spec.dim}")
    s, sig, d = spec.order, spec.sigma, spec.dim
    n2 = np.sum(pts * pts, axis=1)
    scale = (2.0 / (sig * sig * math.pi)) ** (d / 2.0)
    out = np.zeros(pts.shape[0])
    for j in range(1, s + 1):
        coef = math.comb(s, j) * (-1.0) ** (1 - j) / float(j) ** d
        out += coef * np.exp(-2.0 * n2 / (j * j * sig * sig))
    out *= scale
    return float(out[0]) if single else out


def _tensor_grid(spec: ConvKernelSpec, quad: ConvQuadSpec):
    """Offsets (K, d) and trapezoid weights (K,) for the truncated box."""
    radius = quad.radius_mult * spec.order * spec.sigma
    h = spec.sigma / quad.step_divisor
    half = int(math.ceil(radius / h))
    n1 = 2 * half + 1
    if n1**spec.dim > quad.max_nodes:
        raise BudgetExceededError(
            f"{n1}^{spec.dim} quadrature nodes exceed the budget of {quad.max_nodes}"
        )
    t1 = h * np.arange(-half, half + 1)
    w1 = np.full(n1, h)
    w1[0] *= 0.5
    w1[-1] *= 0.5
    grids = np.meshgrid(*([t1] * spec.dim), indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.ones(offsets.shape[0])
    wgrids = np.meshgrid(*([w1] * spec.dim), indexing="ij")
    for g in wgrids:
        weights *= g.ravel()
    return offsets, weights


def kernel_mass(spec: ConvKernelSpec, quad: ConvQuadSpec = ConvQuadSpec()) -> float:
    """Quadrature of the kernel over its truncation box; close to one."""
    offsets, weights = _tensor_grid(spec, quad)
    return float(weights @ conv_kernel(spec, offsets))


class SmoothedFunction:
    """Truncated quadrature convolution of a folded target with the kernel."""

    def __init__(self, f, spec: ConvKernelSpec, quad: ConvQuadSpec = ConvQuadSpec()):
        self.spec = spec
        self.quad = quad
        self._f = f
        offsets, weights = _tensor_grid(spec, quad)
        self._offsets = offsets
        self._weights = weights * conv_kernel(spec, offsets)

    def __call__(self, x) -> float | np.ndarray:
        xa = np.asarray(x, dtype=float)
        single = xa.ndim <= 1
        pts = xa.reshape(1, -1) if single else xa
        if pts.shape[1] != self.spec.dim:
            raise ValueError(f"x has dimension {pts.shape[1]}, spec has {self.spec.dim}")
        out = np.empty(pts.shape[0])
        for lo in range(0, pts.shape[0], _EVAL_BLOCK):
            hi = min(lo + _EVAL_BLOCK, pts.shape[0])
            shifted = fold(pts[lo:hi, None, :] - self._offsets[None, :, :])
            vals = np.asarray(self._f(shifted.reshape(-1, self.spec.dim)), dtype=float)
            out[lo:hi] = vals.reshape(hi - lo, -1) @ self._weights
        return float(out[0]) if single else out


def smooth_approximant(f, spec: ConvKernelSpec,
                       quad: ConvQuadSpec = ConvQuadSpec()) -> SmoothedFunction:
    """Deterministic smoothed version of a bounded f on [0,1]^d.

    ``f`` must be vectorized over (n, d) point arrays.
    """
    return SmoothedFunction(f, spec, quad)


def rkhs_norm_bound(spec: ConvKernelSpec, f_sup: float) -> float:
    """Certified RKHS-norm bound of the smoothed function.

    Equals (sqrt(pi))^(-d/2) * (2^s - 1) * sigma^(-d/2) * f_sup; halving the
    width grows the bound by 2^(d/2).
    """
    if f_sup < 0.0:
        raise ValueError(f"f_sup must be nonnegative, got {f_sup}")
    d = spec.dim
    return (math.sqrt(math.pi)) ** (-d / 2.0) * (2.0**spec.order - 1.0) * \
        spec.sigma ** (-d / 2.0) * f_sup


def sup_error(f, f0, grid) -> float:
    """Largest |f - f0| over a nonempty point grid in the unit cube."""
    pts = np.asarray(grid, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.size == 0:
        raise ValueError("grid must be nonempty")
    fv = np.asarray(f(pts), dtype=float)
    gv = np.asarray(f0(pts), dtype=float)
    return float(np.max(np.abs(fv - gv)))
