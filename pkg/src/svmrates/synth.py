"""Synthetic label distributions with known conditional probability.

Every family fixes the marginal to Uniform([0,1]^d) and specifies the
conditional probability eta(x) = P[y=+1 | x] in closed form, together with
declared smoothness (r, c0) of the regression function 2*eta - 1 and a
declared low-noise exponent (q, c_hat): the mass of
{x : |2*eta(x) - 1| <= c_hat * t} is at most t**q for every t > 0.

Risk functionals (Bayes risk, excess misclassification, excess surrogate
risk) are computed against the known eta by adaptive quadrature in one
dimension and by seeded Monte Carlo in higher dimension, so learning-curve
measurements carry no test-set noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .kernel import TrainedModel
from .losses import Loss, clip, sign_plus
from .quadrature import adaptive_trapezoid, mc_mean, sign_change_roots
from .solver import Dataset

FAMILIES = ("affine", "holder", "margin", "product")

_DEFAULT_MC_BUDGET = 10**6
_MC_SEED_RISK = 202_401


@dataclass(frozen=True)
class Smoothness:
    r: float  # Hoelder order of the regression function, may be inf
    c0: float


@dataclass(frozen=True)
class NoiseExponent:
    q: float  # Tsybakov exponent, may be inf
    c_hat: float


@dataclass(frozen=True, eq=False)
class Distribution:
    """Uniform-marginal distribution with conditional probability ``eta``.

    ``eta`` must be vectorized over an (n, d) array of points and return an
    (n,) array of probabilities.  ``breakpoints`` lists 1-D abscissae where
    eta has kinks or jumps; quadrature inserts them as panel boundaries.
    """

    dim: int
    eta: Callable[[np.ndarray], np.ndarray]
    smoothness: Smoothness
    noise: NoiseExponent
    family_tag: str = "custom"
    params: dict = field(default_factory=dict)
    breakpoints: tuple = ()
    marginal: str = "uniform"

    def eta_1d(self, xs: np.ndarray) -> np.ndarray:
        if self.dim != 1:
            raise ValueError("eta_1d requires a one-dimensional distribution")
        return np.asarray(self.eta(np.asarray(xs, dtype=float)[:, None]), dtype=float)


def _product_sqrt_poly_sup(d: int) -> float:
    # sup over v in (0,1] of sqrt(v) * sum_{k<d} log(1/v)^k / k!,
    # the constant relating the product-of-uniforms CDF to sqrt(v)
    ell = np.linspace(0.0, 80.0, 200_001)  # ell = log(1/v)
    s = np.zeros_like(ell)
    term = np.ones_like(ell)
    for k in range(d):
        if k > 0:
            term = term * ell / k
        s += term
    return float(np.max(np.exp(-0.5 * ell) * s))


def builtin(name: str, **params) -> Distribution:
    """Construct one of the built-in families.

    affine            eta(x) = 1/2 + x/4 on [0,1]; r = inf, q = 1, c_hat = 1/2.
    holder(a, r)      eta(x) = 1/2 + a*sign(x-1/2)*|x-1/2|**r, 0 < r <= 1.
    margin(p, gap)    eta piecewise constant in {1-p, p} with the jump at
                      x = 1/2; |2*eta-1| = 2p-1 >= gap everywhere, so the
                      low-margin set is empty below the gap (q = inf).
    product(a, r, dim) tensorized holder factor in dim >= 2 coordinates.
    """
    if name == "affine":
        if params:
            raise ValueError(f"affine takes no parameters, got {params}")
        return Distribution(
            dim=1,
            eta=lambda x: 0.5 + 0.25 * x[:, 0],
            smoothness=Smoothness(r=math.inf, c0=0.5),
            noise=NoiseExponent(q=1.0, c_hat=0.5),
            family_tag="affine",
        )

    if name == "holder":
        a = float(params.pop("a", 0.5))
        r = float(params.pop("r", 1.0))
        if params:
            raise ValueError(f"unknown holder parameters {params}")
        problems = []
        if not 0.0 < r <= 1.0:
            problems.append(f"r must be in (0, 1], got {r}")
        if a <= 0.0:
            problems.append(f"a must be positive, got {a}")
        elif a * 0.5**r > 0.5 + 1e-15:
            problems.append(f"a*(1/2)^r = {a * 0.5**r:.4g} > 1/2 pushes eta outside [0,1]")
        if problems:
            raise ValueError("; ".join(problems))

        def eta(x, a=a, r=r):
            s = x[:, 0] - 0.5
            return 0.5 + a * np.sign(s) * np.abs(s) ** r

        return Distribution(
            dim=1,
            eta=eta,
            smoothness=Smoothness(r=r, c0=a * 2.0 ** (2.0 - r)),
            noise=NoiseExponent(q=1.0 / r, c_hat=a * 2.0 ** (1.0 - r)),
            family_tag="holder",
            params={"a": a, "r": r},
            breakpoints=(0.5,),
        )

    if name == "margin":
        p = float(params.pop("p", 0.9))
        gap = float(params.pop("gap", 0.2))
        if params:
            raise ValueError(f"unknown margin parameters {params}")
        problems = []
        if not 0.5 < p <= 1.0:
            problems.append(f"p must be in (1/2, 1], got {p}")
        if not 0.0 < gap <= 2.0 * p - 1.0:
            problems.append(f"gap must be in (0, 2p-1] = (0, {2 * p - 1:.3g}], got {gap}")
        if problems:
            raise ValueError("; ".join(problems))

        def eta(x, p=p):
            return np.where(x[:, 0] >= 0.5, p, 1.0 - p)

        return Distribution(
            dim=1,
            eta=eta,
            smoothness=Smoothness(r=math.inf, c0=2.0 / gap),
            noise=NoiseExponent(q=math.inf, c_hat=gap),
            family_tag="margin",
            params={"p": p, "gap": gap},
            breakpoints=(0.5,),
        )

    if name == "product":
        a = float(params.pop("a", 0.5))
        r = float(params.pop("r", 1.0))
        dim = int(params.pop("dim", 2))
        if params:
            raise ValueError(f"unknown product parameters {params}")
        problems = []
        if dim < 2:
            problems.append(f"dim must be >= 2, got {dim}")
        if not 0.0 < r <= 1.0:
            problems.append(f"r must be in (0, 1], got {r}")
        if a <= 0.0:
            problems.append(f"a must be positive, got {a}")
        elif dim >= 2 and a * 0.5 ** (r * dim) > 0.5 + 1e-15:
            problems.append(f"a*(1/2)^(r*dim) = {a * 0.5 ** (r * dim):.4g} > 1/2")
        if problems:
            raise ValueError("; ".join(problems))

        def eta(x, a=a, r=r):
            s = x - 0.5
            return 0.5 + a * np.prod(np.sign(s) * np.abs(s) ** r, axis=1)

        # Level sets reduce to a product of uniforms:  with u_j ~ U(0,1),
        # P(prod u_j <= v) = v * sum_{k<dim} log(1/v)^k / k! <= C_dim*sqrt(v).
        # Declaring q = 1/(2r) and calibrating c_hat against C_dim keeps the
        # ratio below one for every t; the 0.9 keeps Monte Carlo checks clear
        # of the boundary.
        c_dim = _product_sqrt_poly_sup(dim)
        c_hat = 0.9 * 2.0 * a * c_dim ** (-2.0 * r) * 2.0 ** (-r * dim)
        c0 = 2.0 * a * 2.0 ** (1.0 - r) * 2.0 ** (-r * (dim - 1)) * dim ** (1.0 - r / 2.0)
        return Distribution(
            dim=dim,
            eta=eta,
            smoothness=Smoothness(r=r, c0=c0),
            noise=NoiseExponent(q=0.5 / r, c_hat=c_hat),
            family_tag="product",
            params={"a": a, "r": r, "dim": dim},
        )

    raise ValueError(f"unknown family {name!r}; expected one of {FAMILIES}")


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample(dist: Distribution, m: int, seed: int) -> Dataset:
    """Draw m labeled points; deterministic given the seed.

    Points are uniform on the cube and labels are +1 with probability
    eta(x), else -1.  The seed is carried on the returned dataset.
    """
    if m < 1:
        raise ValueError(f"sample size must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    x = rng.random((m, dist.dim))
    u = rng.random(m)
    y = np.where(u < dist.eta(x), 1.0, -1.0)
    return Dataset(points=x, labels=y, seed=seed)


# ---------------------------------------------------------------------------
# Risk functionals
# ---------------------------------------------------------------------------


def _model_fn(model, dim: int):
    """Vectorized score function from a TrainedModel or a raw callable."""
    if isinstance(model, TrainedModel):
        if model.dim != dim:
            raise ValueError(f"model dimension {model.dim} != distribution dimension {dim}")
        return lambda x: model.predict(np.asarray(x, dtype=float))
    if callable(model):
        return lambda x: np.asarray(model(np.asarray(x, dtype=float)), dtype=float)
    raise TypeError(f"model must be a TrainedModel or a callable, got {type(model)}")


def _scan_num(model) -> int:
    # enough scan nodes to bracket every sign change of a kernel expansion
    if isinstance(model, TrainedModel):
        return int(max(2049, min(2**17 + 1, math.ceil(32.0 / model.sigma))))
    return 2049


def _eta_crossings(dist: Distribution) -> np.ndarray:
    g = lambda xs: dist.eta_1d(xs) - 0.5
    return sign_change_roots(g, 0.0, 1.0)


def bayes_risk(dist: Distribution, *, target: float = 1e-8,
               mc_budget: int = _DEFAULT_MC_BUDGET, mc_seed: int = _MC_SEED_RISK) -> float:
    """Misclassification risk of the Bayes rule, E[min(eta, 1 - eta)]."""
    if dist.dim == 1:
        pts = tuple(dist.breakpoints) + tuple(_eta_crossings(dist))
        f = lambda xs: np.minimum(dist.eta_1d(xs), 1.0 - dist.eta_1d(xs))
        return adaptive_trapezoid(f, 0.0, 1.0, target=target, breakpoints=pts)
    val, _ = mc_mean(lambda x: np.minimum(dist.eta(x), 1.0 - dist.eta(x)),
                     dist.dim, mc_budget, mc_seed)
    return val


def excess_misclass(dist: Distribution, model, *, target: float = 1e-8,
                    mc_budget: int = _DEFAULT_MC_BUDGET, mc_seed: int = _MC_SEED_RISK) -> float:
    """Excess misclassification risk of sign_plus(f) against the Bayes rule.

    Equals the integral of |2*eta - 1| over the disagreement region, which
    is zero exactly when the score's sign matches the Bayes label almost
    everywhere.  Clipping does not change the value because it preserves
    signs.
    """
    f = _model_fn(model, dist.dim)
    if dist.dim == 1:
        f1 = lambda xs: f(np.asarray(xs, dtype=float)[:, None])
        nodes = [0.0, 1.0]
        nodes.extend(dist.breakpoints)
        nodes.extend(_eta_crossings(dist))
        nodes.extend(sign_change_roots(f1, 0.0, 1.0, num=_scan_num(model)))
        nodes = np.unique(np.clip(np.asarray(nodes, dtype=float), 0.0, 1.0))
        total = 0.0
        for lo, hi in zip(nodes[:-1], nodes[1:]):
            if hi - lo <= 1e-14:
                continue
            mid = np.array([0.5 * (lo + hi)])
            disagree = sign_plus(f1(mid))[0] != sign_plus(2.0 * dist.eta_1d(mid) - 1.0)[0]
            if disagree:
                g = lambda xs: np.abs(2.0 * dist.eta_1d(xs) - 1.0)
                total += adaptive_trapezoid(g, lo, hi, target=target * (hi - lo))
        return float(total)

    def integrand(x):
        e = dist.eta(x)
        return np.abs(2.0 * e - 1.0) * (sign_plus(f(x)) != sign_plus(2.0 * e - 1.0))

    val, _ = mc_mean(integrand, dist.dim, mc_budget, mc_seed)
    return val


def excess_phi_risk(dist: Distribution, loss: Loss, model, *, clipped: bool = True,
                    target: float = 1e-8, mc_budget: int = _DEFAULT_MC_BUDGET,
                    mc_seed: int = _MC_SEED_RISK) -> float:
    """Excess surrogate risk of the score function against its regression target.

    The integrand at x is the conditional excess
    ``eta*(phi(g) - phi(t)) + (1-eta)*(phi(-g) - phi(-t))`` with t the
    pointwise risk minimizer and g the (optionally clipped) score; it is
    nonnegative pointwise.
    """
    f = _model_fn(model, dist.dim)

    def pointwise(e, v):
        g = clip(v) if clipped else v
        t = loss.regression_target(e)
        return e * (loss.value(g) - loss.value(t)) + (1.0 - e) * (
            loss.value(-g) - loss.value(-t)
        )

    if dist.dim == 1:
        f1 = lambda xs: f(np.asarray(xs, dtype=float)[:, None])
        nodes = [0.0, 1.0]
        nodes.extend(dist.breakpoints)
        nodes.extend(_eta_crossings(dist))  # hinge target jumps there
        for level in (-1.0, 1.0):  # clip and hinge/truncation kinks
            nodes.extend(sign_change_roots(lambda xs: f1(xs) - level, 0.0, 1.0,
                                           num=_scan_num(model)))
        nodes = np.unique(np.clip(np.asarray(nodes, dtype=float), 0.0, 1.0))
        integrand = lambda xs: pointwise(dist.eta_1d(xs), f1(xs))
        val = adaptive_trapezoid(integrand, 0.0, 1.0, target=target, breakpoints=nodes)
        return max(val, 0.0)

    val, _ = mc_mean(lambda x: pointwise(dist.eta(x), f(x)), dist.dim, mc_budget, mc_seed)
    return max(val, 0.0)


def _low_margin_measure(dist: Distribution, threshold: float, *,
                        mc_budget: int, mc_seed: int) -> float:
    """Mass of {x : |2*eta(x) - 1| <= threshold}."""
    if dist.dim == 1:
        g = lambda xs: np.abs(2.0 * dist.eta_1d(xs) - 1.0) - threshold
        nodes = [0.0, 1.0]
        nodes.extend(dist.breakpoints)
        nodes.extend(_eta_crossings(dist))
        nodes.extend(sign_change_roots(g, 0.0, 1.0))
        nodes = np.unique(np.clip(np.asarray(nodes, dtype=float), 0.0, 1.0))
        mids = 0.5 * (nodes[:-1] + nodes[1:])
        inside = g(mids) <= 0.0
        return float(np.sum((nodes[1:] - nodes[:-1])[inside]))
    val, _ = mc_mean(lambda x: (np.abs(2.0 * dist.eta(x) - 1.0) <= threshold).astype(float),
                     dist.dim, mc_budget, mc_seed)
    return val


def tsybakov_ratio(dist: Distribution, q: float, c_hat: float, t_grid, *,
                   mc_budget: int = _DEFAULT_MC_BUDGET, mc_seed: int = _MC_SEED_RISK) -> float:
    """Largest value over the grid of mass{|2*eta-1| <= c_hat*t} / t**q.

    The declared noise exponent is certified when the result is <= 1.
    For q = inf the ratio is 0 when the level set is empty, the raw mass at
    t = 1, and 0 beyond (any mass below t = 1 yields inf).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0.0):
        raise ValueError("t_grid must be positive")
    worst = 0.0
    for t in t_grid:
        mass = _low_margin_measure(dist, c_hat * t, mc_budget=mc_budget, mc_seed=mc_seed)
        if math.isinf(q):
            if t < 1.0:
                ratio = 0.0 if mass == 0.0 else math.inf
            elif t == 1.0:
                ratio = mass
            else:
                ratio = 0.0
        else:
            ratio = mass / t**q
        worst = max(worst, float(ratio))
    return worst
