"""Learning-curve experiments and rate diagnostics.

A learning-curve run draws independent samples of increasing size from a
synthetic distribution, trains the regularized kernel classifier under a
parameter schedule, measures the exact excess misclassification risk of
each trained model by quadrature, and fits a power law to the mean excess
versus the sample size.  The fitted exponent is reported next to the
theoretical rate exponent for the chosen regime:

    T1:  r / (2r + d)
    T2:  2r(q+1) / ((2r + d)(q + 2))
    T3:  (q+1)r / ((q+2)r + (q+1)d)
    C5:  1

with infinite r or q taken as limits.  The module also verifies the
surrogate-to-misclassification comparison inequalities on trained models:
the square-root bound with constant one for the quadratic-type losses and
the constant-one bound for the hinge loss.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import synth
from .kernel import TrainedModel
from .losses import HINGE, LOSS_KINDS, Loss, make_loss
from .solver import (
    REGIME_TSYBAKOV_HINGE,
    REGIME_TSYBAKOV_SMOOTH,
    REGIMES,
    SolverConfig,
    schedule,
    train,
)

THEOREMS = ("T1", "T2", "T3", "C5")

# a learning-curve run aborts when more than this fraction of trials fail
_MAX_FAILURE_FRACTION = 0.10


class ExperimentError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


def theoretical_exponent(r: float, d: int = 1, q: float | None = None,
                         loss: Loss | str | None = None, theorem: str = "T1") -> float:
    """Rate exponent beta with excess risk O(m**-beta) for a theorem tag."""
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")
    kind = loss.kind if isinstance(loss, Loss) else loss
    if theorem == "T2" and kind == HINGE:
        raise ValueError("theorem T2 covers smooth losses, not hinge")
    if theorem == "T3" and kind not in (None, HINGE):
        raise ValueError("theorem T3 covers the hinge loss only")
    if theorem == "C5":
        return 1.0
    if not r > 0.0:
        raise ValueError(f"r must be positive, got {r}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if theorem == "T1":
        return 0.5 if math.isinf(r) else r / (2.0 * r + d)
    if q is None or q < 0.0:
        raise ValueError(f"theorem {theorem} needs a noise exponent q >= 0, got {q}")
    if theorem == "T2":
        if math.isinf(r) and math.isinf(q):
            return 1.0
        if math.isinf(r):
            return (q + 1.0) / (q + 2.0)
        if math.isinf(q):
            return 2.0 * r / (2.0 * r + d)
        return 2.0 * r * (q + 1.0) / ((2.0 * r + d) * (q + 2.0))
    # T3
    if math.isinf(r) and math.isinf(q):
        return 1.0
    if math.isinf(r):
        return (q + 1.0) / (q + 2.0)
    if math.isinf(q):
        return r / (r + d)
    return (q + 1.0) * r / ((q + 2.0) * r + (q + 1.0) * d)


# ---------------------------------------------------------------------------
# Experiment configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one learning-curve experiment.

    ``schedule_r`` and ``schedule_q`` override the distribution's declared
    smoothness and noise exponents when the schedule should treat them
    differently (for example a finite proxy for an infinitely smooth
    target).  All randomness flows from ``seed``.
    """

    family: str
    loss: str
    regime: str
    m_grid: tuple
    seed: int = 0
    trials_per_m: int = 20
    family_params: dict = field(default_factory=dict)
    schedule_r: float | None = None
    schedule_q: float | None = None
    solver_tol: float | None = None
    solver_max_iters: int = 4000
    quad_target: float = 1e-8
    mc_budget: int = 10**6

    def problems(self) -> list[str]:
        """All invariant violations at once; empty when valid."""
        out = []
        if self.family not in synth.FAMILIES:
            out.append(f"unknown family {self.family!r}")
        if self.loss not in LOSS_KINDS:
            out.append(f"unknown loss {self.loss!r}")
        if self.regime not in REGIMES:
            out.append(f"unknown regime {self.regime!r}")
        else:
            if self.regime == REGIME_TSYBAKOV_SMOOTH and self.loss == HINGE:
                out.append("regime T2 cannot be paired with the hinge loss")
            if self.regime == REGIME_TSYBAKOV_HINGE and self.loss != HINGE:
                out.append("regime T3 requires the hinge loss")
        grid = tuple(self.m_grid)
        if len(grid) < 4:
            out.append(f"m_grid needs at least 4 entries, got {len(grid)}")
        if any(int(m) != m or m < 1 for m in grid):
            out.append("m_grid entries must be positive integers")
        elif any(b <= a for a, b in zip(grid, grid[1:])):
            out.append("m_grid must be strictly increasing")
        if self.trials_per_m < 1:
            out.append(f"trials_per_m must be >= 1, got {self.trials_per_m}")
        if self.schedule_r is not None and not self.schedule_r > 0.0:
            out.append(f"schedule_r must be positive, got {self.schedule_r}")
        if self.schedule_q is not None and self.schedule_q < 0.0:
            out.append(f"schedule_q must be >= 0, got {self.schedule_q}")
        if not 0.0 < self.quad_target:
            out.append(f"quad_target must be positive, got {self.quad_target}")
        if self.mc_budget < 2:
            out.append(f"mc_budget must be >= 2, got {self.mc_budget}")
        if self.solver_tol is not None and not self.solver_tol > 0.0:
            out.append(f"solver_tol must be positive, got {self.solver_tol}")
        if self.solver_max_iters < 1:
            out.append(f"solver_max_iters must be >= 1, got {self.solver_max_iters}")
        return out

    def validated(self) -> "ExperimentConfig":
        problems = self.problems()
        if problems:
            raise ConfigError("invalid experiment config: " + "; ".join(problems))
        return self


def trial_seed(config_seed: int, m: int, trial: int) -> int:
    """Stable per-trial seed derived from the config seed."""
    digest = hashlib.sha256(f"{config_seed}:{m}:{trial}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class TrialRecord:
    m: int
    trial: int
    excess_misclass: float
    excess_phi: float
    objective: float
    norm_sq: float
    solver_iters: int
    failed: bool


@dataclass(frozen=True)
class RateFit:
    """Power-law fit of mean excess risk against sample size.

    ``exponent`` is the fitted decay-rate magnitude, computed from the
    grid entries with strictly positive mean excess only.
    """

    points: tuple  # (m, mean_excess, std_excess) triples
    exponent: float
    intercept: float
    r_squared: float
    theoretical_exponent: float
    theorem_tag: str


def fit_exponent(points) -> tuple[float, float, float]:
    """OLS fit of log(excess) on log(m); returns (slope, intercept, r_squared).

    The slope is d log(excess) / d log(m), so a decaying curve has a
    negative slope; report the rate as its magnitude.  Entries with
    nonpositive excess are dropped; at least 3 positive points are needed.
    """
    pts = [(float(m), float(e)) for m, e in points if e > 0.0]
    if len(pts) < 3:
        raise ValueError(
            f"exponent fit needs at least 3 points with positive excess, got {len(pts)}"
        )
    lm = np.log([m for m, _ in pts])
    le = np.log([e for _, e in pts])
    slope, intercept = np.polyfit(lm, le, 1)
    resid = le - (slope * lm + intercept)
    ss_res = float(resid @ resid)
    centered = le - le.mean()
    ss_tot = float(centered @ centered)
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r_squared


def _schedule_params(config: ExperimentConfig, dist: synth.Distribution):
    r = config.schedule_r if config.schedule_r is not None else dist.smoothness.r
    q = config.schedule_q if config.schedule_q is not None else dist.noise.q
    return r, q


def learning_curve_detail(config: ExperimentConfig):
    """Run the experiment; returns (RateFit, list of TrialRecord)."""
    config.validated()
    dist = synth.builtin(config.family, **config.family_params)
    loss = make_loss(config.loss)
    r, q = _schedule_params(config, dist)

    records: list[TrialRecord] = []
    failures = 0
    total = len(config.m_grid) * config.trials_per_m
    for m in config.m_grid:
        m = int(m)
        lam, sigma = schedule(m, r, dist.dim, q, loss, config.regime)
        solver_config = SolverConfig(lam=lam, max_iters=config.solver_max_iters,
                                     tol=config.solver_tol)
        for t in range(config.trials_per_m):
            seed_t = trial_seed(config.seed, m, t)
            data = synth.sample(dist, m, seed_t)
            model = train(data, loss, sigma, solver_config)
            failed = not model.diagnostics.converged
            failures += failed
            records.append(TrialRecord(
                m=m,
                trial=t,
                excess_misclass=synth.excess_misclass(
                    dist, model, target=config.quad_target,
                    mc_budget=config.mc_budget),
                excess_phi=synth.excess_phi_risk(
                    dist, loss, model, clipped=True, target=config.quad_target,
                    mc_budget=config.mc_budget),
                objective=model.diagnostics.final_objective,
                norm_sq=model.norm_sq,
                solver_iters=model.diagnostics.iterations,
                failed=failed,
            ))
    if failures > _MAX_FAILURE_FRACTION * total:
        raise ExperimentError(
            f"{failures} of {total} trials failed to converge; aborting"
        )

    points = []
    for m in config.m_grid:
        vals = np.array([rec.excess_misclass for rec in records
                         if rec.m == m and not rec.failed])
        if vals.size == 0:
            continue
        std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
        points.append((int(m), float(vals.mean()), std))

    slope, intercept, r_squared = fit_exponent([(m, mean) for m, mean, _ in points])
    theo = theoretical_exponent(r, dist.dim, q, loss, theorem=config.regime)
    fit = RateFit(
        points=tuple(points),
        exponent=-slope,
        intercept=intercept,
        r_squared=r_squared,
        theoretical_exponent=theo,
        theorem_tag=config.regime,
    )
    return fit, records


def learning_curve(config: ExperimentConfig) -> RateFit:
    fit, _ = learning_curve_detail(config)
    return fit


# ---------------------------------------------------------------------------
# Comparison inequalities
# ---------------------------------------------------------------------------

_COMPARISON_SLACK = 1e-6


@dataclass(frozen=True)
class ComparisonReport:
    """Measured sides of the comparison inequalities for one model.

    ``sqrt_bound_holds`` checks excess_misclass <= sqrt(excess_phi) with
    constant one (quadratic-type losses).  ``hinge_bound_holds`` checks
    excess_misclass <= excess_phi with constant one (hinge loss).
    ``power_ratio`` records excess_misclass / excess_phi**((q+1)/(q+2));
    its constant is loss-dependent and unspecified, so no verdict is
    attached.
    """

    loss_kind: str
    excess_misclass: float
    excess_phi: float
    sqrt_bound: float | None
    sqrt_bound_holds: bool | None
    hinge_bound_holds: bool | None
    power_exponent: float | None
    power_ratio: float | None

    def as_dict(self) -> dict:
        return {
            "loss": self.loss_kind,
            "excess_misclass": self.excess_misclass,
            "excess_phi": self.excess_phi,
            "sqrt_bound": self.sqrt_bound,
            "sqrt_bound_holds": self.sqrt_bound_holds,
            "hinge_bound_holds": self.hinge_bound_holds,
            "power_exponent": self.power_exponent,
            "power_ratio": self.power_ratio,
        }


def check_comparison(dist: synth.Distribution, loss: Loss, model,
                     q: float | None = None, c_hat: float | None = None, *,
                     target: float = 1e-8,
                     mc_budget: int = 10**6) -> ComparisonReport:
    """Measure the comparison inequalities for a (clipped) score function."""
    del c_hat  # recorded by callers; the ratio track does not use it
    excess = synth.excess_misclass(dist, model, target=target, mc_budget=mc_budget)
    phi_excess = synth.excess_phi_risk(dist, loss, model, clipped=True,
                                       target=target, mc_budget=mc_budget)
    if loss.kind == HINGE:
        sqrt_bound = None
        sqrt_holds = None
        hinge_holds = excess <= phi_excess + _COMPARISON_SLACK
    else:
        sqrt_bound = math.sqrt(max(phi_excess, 0.0))
        sqrt_holds = excess <= sqrt_bound + _COMPARISON_SLACK
        hinge_holds = None
    if q is None:
        power_exponent = None
        power_ratio = None
    else:
        power_exponent = 1.0 if math.isinf(q) else (q + 1.0) / (q + 2.0)
        if phi_excess > 0.0:
            power_ratio = excess / phi_excess**power_exponent
        else:
            power_ratio = 0.0 if excess <= 0.0 else math.inf
    return ComparisonReport(
        loss_kind=loss.kind,
        excess_misclass=excess,
        excess_phi=phi_excess,
        sqrt_bound=sqrt_bound,
        sqrt_bound_holds=sqrt_holds,
        hinge_bound_holds=hinge_holds,
        power_exponent=power_exponent,
        power_ratio=power_ratio,
    )


def model_norm_bound_ok(model: TrainedModel, phi_zero: float = 1.0,
                        slack: float = 1e-8) -> bool:
    """Whether lam * ||f||^2 <= phi(0) + slack holds for a trained model."""
    return model.lam * model.norm_sq <= phi_zero + slack
