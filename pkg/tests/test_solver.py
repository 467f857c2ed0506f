"""Trainer correctness: closed forms, oracle equivalence, duality, schedules."""

import math

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from svmrates import (
    Dataset,
    GaussianKernel,
    SolverConfig,
    builtin,
    gram,
    make_loss,
    objective,
    sample,
    schedule,
    train,
)

QUAD = make_loss("quadratic")
TRUNC = make_loss("truncated_quadratic")
HINGE = make_loss("hinge")


def _random_instance(rng, m_max=6):
    """Small random training instance with separated points."""
    m = int(rng.integers(1, m_max + 1))
    d = int(rng.integers(1, 3))
    while True:
        pts = rng.random((m, d))
        if m == 1 or pdist(pts).min() > 0.05:
            break
    y = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    sigma = float(rng.uniform(0.2, 0.8))
    lam = float(rng.uniform(0.1, 1.0))
    return pts, y, sigma, lam


class TestDataset:
    def test_validation(self):
        with pytest.raises(ValueError):
            Dataset([[0.5]], [2.0])
        with pytest.raises(ValueError):
            Dataset([[1.5]], [1.0])
        with pytest.raises(ValueError):
            Dataset([[0.5], [0.6]], [1.0])

    def test_1d_points_promoted(self):
        data = Dataset([0.1, 0.9], [1.0, -1.0])
        assert data.points.shape == (2, 1) and data.m == 2 and data.dim == 1


class TestSolverConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(lam=0.0)
        with pytest.raises(ValueError):
            SolverConfig(lam=0.1, tol=-1.0)
        with pytest.raises(ValueError):
            SolverConfig(lam=0.1, hinge_strategy="smo")


class TestClosedForms:
    def test_single_sample_quadratic(self):
        # K = [1]: minimize (1 - a)^2 + lam a^2  =>  a = 1/(1 + lam)
        data = Dataset([[0.5]], [1.0])
        model = train(data, QUAD, 1.0, SolverConfig(lam=0.5, tol=1e-13))
        np.testing.assert_allclose(model.coeffs, [2.0 / 3.0], atol=1e-10)
        np.testing.assert_allclose(model.predict([0.5]), 2.0 / 3.0, atol=1e-10)
        np.testing.assert_allclose(model.diagnostics.final_objective, 1.0 / 3.0,
                                   atol=1e-10)

    def test_huge_regularization_collapses_to_zero(self):
        data = sample(builtin("affine"), 40, seed=2)
        model = train(data, QUAD, 0.5, SolverConfig(lam=1e9, tol=1e-10))
        assert np.abs(model.coeffs).max() <= 1e-6
        np.testing.assert_allclose(model.diagnostics.final_objective, 1.0, atol=1e-6)

    def test_duplicated_symmetric_pair(self):
        # identical points with opposite labels force a zero prediction
        data = Dataset([[0.3], [0.3]], [1.0, -1.0])
        model = train(data, QUAD, 1.0, SolverConfig(lam=0.25, tol=1e-12))
        np.testing.assert_allclose(model.predict([0.3]), 0.0, atol=1e-8)


class TestOracleEquivalence:
    def test_quadratic_matches_linear_system(self):
        # stationarity of the quadratic objective: (K + lam*m*I) alpha = y
        rng = np.random.default_rng(42)
        for _ in range(20):
            pts, y, sigma, lam = _random_instance(rng)
            data = Dataset(pts, y)
            model = train(data, QUAD, sigma, SolverConfig(lam=lam, tol=1e-12,
                                                          max_iters=500))
            k = gram(GaussianKernel(sigma), pts)
            exact = np.linalg.solve(k + lam * len(y) * np.eye(len(y)), y)
            np.testing.assert_allclose(model.coeffs, exact, atol=1e-6)


class TestObjective:
    def test_zero_coefficients(self):
        data = sample(builtin("affine"), 10, seed=1)
        for loss in (QUAD, TRUNC, HINGE):
            assert objective(data, loss, 0.5, 0.1, np.zeros(10)) == 1.0

    def test_perfectly_fit_hinge_is_pure_penalty(self):
        # margins >= 1 zero the empirical term exactly
        data = Dataset([[0.1], [0.9]], [1.0, -1.0])
        coeffs = np.array([2.0, -2.0])
        k = gram(GaussianKernel(0.1), data.points)
        f = k @ coeffs
        assert np.all(data.labels * f >= 1.0)
        lam = 0.3
        val = objective(data, HINGE, 0.1, lam, coeffs)
        np.testing.assert_allclose(val, lam * coeffs @ f, atol=1e-15)

    def test_matches_training_report(self):
        data = sample(builtin("affine"), 30, seed=3)
        model = train(data, TRUNC, 0.5, SolverConfig(lam=0.05))
        val = objective(data, TRUNC, 0.5, 0.05, model.coeffs)
        np.testing.assert_allclose(val, model.diagnostics.final_objective, atol=1e-12)


class TestTrainedModelBounds:
    @pytest.mark.parametrize("kind", ["quadratic", "truncated_quadratic", "hinge"])
    @pytest.mark.parametrize("m,sigma", [(25, 0.3), (120, 0.1), (60, 1.0)])
    def test_objective_and_norm_bounds(self, kind, m, sigma):
        # zero expansion is feasible, so objective <= 1 and lam*norm^2 <= 1
        loss = make_loss(kind)
        dist = builtin("margin", p=0.8, gap=0.2) if kind == "hinge" else builtin("affine")
        data = sample(dist, m, seed=m)
        model = train(data, loss, sigma, SolverConfig(lam=1.0 / m))
        assert model.diagnostics.converged
        assert model.diagnostics.final_objective <= 1.0 + 1e-12
        assert model.lam * model.norm_sq <= 1.0 + 1e-8

    def test_hinge_duality_gap_certificate(self):
        dist = builtin("margin", p=0.9, gap=0.2)
        for m in (50, 400, 2000):
            data = sample(dist, m, seed=m)
            model = train(data, HINGE, 1.0, SolverConfig(lam=1.0 / m))
            assert model.diagnostics.converged
            assert model.diagnostics.stationarity_residual <= 1e-6

    def test_nonconvergence_is_flagged(self):
        data = sample(builtin("affine"), 200, seed=7)
        model = train(data, QUAD, 0.5,
                      SolverConfig(lam=1.0 / 200, max_iters=1, tol=1e-14))
        assert not model.diagnostics.converged
        assert model.diagnostics.stationarity_residual > 1e-14

    def test_smooth_residual_meets_tolerance(self):
        data = sample(builtin("affine"), 80, seed=9)
        tol = 1e-9 * 80
        model = train(data, TRUNC, 0.4, SolverConfig(lam=0.0125, tol=tol))
        assert model.diagnostics.stationarity_residual <= tol


class TestSchedule:
    def test_pinned_values(self):
        lam, sigma = schedule(1000, 1.0, 1, 1.0, QUAD, "T1")
        assert lam == 1e-3
        np.testing.assert_allclose(sigma, 1000 ** (-1 / 3))
        lam, sigma = schedule(1000, 1.0, 1, 1.0, HINGE, "T3")
        np.testing.assert_allclose(sigma, 1000 ** (-2 / 5))
        assert schedule(50, math.inf, 1, math.inf, QUAD, "C5") == (0.02, 1.0)

    def test_t2_matches_t1_width(self):
        assert schedule(500, 2.0, 3, 1.0, QUAD, "T2") == schedule(500, 2.0, 3, 0.0,
                                                                  QUAD, "T1")

    def test_infinite_smoothness_limits(self):
        _, sigma = schedule(1000, math.inf, 1, 1.0, QUAD, "T2")
        assert sigma == 1.0
        _, sigma = schedule(1000, math.inf, 1, 1.0, HINGE, "T3")
        assert sigma == 1.0

    def test_pairing_validated(self):
        with pytest.raises(ValueError):
            schedule(100, 1.0, 1, 1.0, QUAD, "T3")
        with pytest.raises(ValueError):
            schedule(100, 1.0, 1, 1.0, HINGE, "T2")
        with pytest.raises(ValueError):
            schedule(100, 1.0, 1, 1.0, QUAD, "T9")

    def test_m_validated(self):
        with pytest.raises(ValueError):
            schedule(0, 1.0, 1, 1.0, QUAD, "T1")
