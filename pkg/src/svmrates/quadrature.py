"""Deterministic 1-D quadrature and Monte Carlo helpers for risk functionals.

The adaptive trapezoid rule bisects intervals until each local Richardson
error estimate fits within a share of the absolute target proportional to
the interval length.  Known kink or jump locations are passed in as
breakpoints so the refinement does not have to discover them.  Integrands
are called on arrays of abscissae, one call per refinement level.
"""

from __future__ import annotations

import numpy as np


class QuadratureError(RuntimeError):
    """Quadrature failed to reach its error target within the depth budget."""


def adaptive_trapezoid(
    f,
    a: float,
    b: float,
    *,
    target: float = 1e-8,
    max_depth: int = 30,
    breakpoints=(),
) -> float:
    """Integral of a vectorized f over [a, b] to absolute accuracy ~target."""
    if not b > a:
        raise ValueError(f"empty interval [{a}, {b}]")
    nodes = [a, b]
    for p in breakpoints:
        if a < p < b:
            nodes.append(float(p))
    nodes = np.unique(np.asarray(nodes, dtype=float))
    vals = np.asarray(f(nodes), dtype=float)

    lo, hi = nodes[:-1], nodes[1:]
    flo, fhi = vals[:-1], vals[1:]
    est = 0.5 * (hi - lo) * (flo + fhi)
    total = 0.0
    span = b - a

    for _ in range(max_depth):
        mid = 0.5 * (lo + hi)
        fmid = np.asarray(f(mid), dtype=float)
        left = 0.25 * (hi - lo) * (flo + fmid)
        right = 0.25 * (hi - lo) * (fmid + fhi)
        refined = left + right
        err = np.abs(refined - est) / 3.0
        done = err <= target * (hi - lo) / span
        total += refined[done].sum()
        if done.all():
            return float(total)
        keep = ~done
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        flo = np.concatenate([flo[keep], fmid[keep]])
        fhi = np.concatenate([fmid[keep], fhi[keep]])
        est = np.concatenate([left[keep], right[keep]])

    # depth exhausted: accept what is left only if its error share is small
    residual = np.abs(est).sum()
    mid = 0.5 * (lo + hi)
    fmid = np.asarray(f(mid), dtype=float)
    refined = 0.25 * (hi - lo) * (flo + 2.0 * fmid + fhi)
    leftover = np.abs(refined - est).sum() / 3.0
    if leftover > 10.0 * target:
        raise QuadratureError(
            f"quadrature did not converge: residual error ~{leftover:.3e} "
            f"over {lo.size} intervals at depth {max_depth}"
        )
    return float(total + refined.sum())


def sign_change_roots(f, a: float, b: float, *, num: int = 2049, iters: int = 60):
    """Roots of a vectorized f located by scanning for sign changes.

    Returns the scanned grid points where f is exactly zero plus one
    bisection-refined root per bracketing pair.  Jump discontinuities that
    cross zero are located the same way (the bisection converges to the
    jump abscissa).
    """
    xs = np.linspace(a, b, num)
    v = np.asarray(f(xs), dtype=float)
    exact = xs[v == 0.0]
    s = np.sign(v)
    bracket = (s[:-1] * s[1:]) < 0
    lo = xs[:-1][bracket].copy()
    hi = xs[1:][bracket].copy()
    if lo.size:
        slo = s[:-1][bracket]
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            sm = np.sign(np.asarray(f(mid), dtype=float))
            go_right = sm == slo
            lo = np.where(go_right, mid, lo)
            hi = np.where(go_right, hi, mid)
    roots = 0.5 * (lo + hi)
    return np.unique(np.concatenate([exact, roots]))


def mc_mean(f, dim: int, budget: int, seed: int, *, chunk: int = 200_000):
    """Monte Carlo mean of f over the uniform cube; returns (mean, stderr)."""
    if budget < 2:
        raise ValueError("Monte Carlo budget must be at least 2")
    rng = np.random.default_rng(seed)
    n = 0
    acc = 0.0
    acc2 = 0.0
    while n < budget:
        take = min(chunk, budget - n)
        x = rng.random((take, dim))
        v = np.asarray(f(x), dtype=float)
        acc += v.sum()
        acc2 += (v * v).sum()
        n += take
    mean = acc / n
    var = max(acc2 / n - mean * mean, 0.0)
    return float(mean), float(np.sqrt(var / n))
