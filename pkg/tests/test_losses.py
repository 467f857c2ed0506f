"""Loss values, derivatives, regression targets and curvature constants."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from svmrates import (
    HINGE,
    LOSS_KINDS,
    QUADRATIC,
    TRUNCATED_QUADRATIC,
    UnsupportedLossError,
    clip,
    curvature_constants,
    make_loss,
    sign_plus,
)

QUAD = make_loss(QUADRATIC)
TRUNC = make_loss(TRUNCATED_QUADRATIC)
HINGE_LOSS = make_loss(HINGE)
SMOOTH = (QUAD, TRUNC)

# pairs grid used by the curvature oracles; restricted to the clipped range
# [-1, 1] where the constants are certified
_GRID = np.linspace(-1.0, 1.0, 41)


class TestValues:
    def test_pinned_values(self):
        assert QUAD.value(0.0) == 1.0
        assert HINGE_LOSS.value(1.0) == 0.0
        assert TRUNC.value(2.0) == 0.0
        assert QUAD.value(-1.0) == 4.0

    def test_zero_beyond_one(self):
        u = np.linspace(1.0, 5.0, 17)
        assert np.all(HINGE_LOSS.value(u) == 0.0)
        assert np.all(TRUNC.value(u) == 0.0)

    def test_phi_zero_is_one(self):
        for kind in LOSS_KINDS:
            loss = make_loss(kind)
            assert loss.value(0.0) == 1.0
            assert loss.phi_zero == 1.0

    def test_negative_slope_at_zero(self):
        for kind in LOSS_KINDS:
            assert make_loss(kind).deriv(0.0) < 0.0

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_loss("logistic")


class TestDerivatives:
    def test_pinned_values(self):
        assert QUAD.deriv(0.0) == -2.0
        assert TRUNC.deriv(3.0) == 0.0
        assert HINGE_LOSS.deriv(0.5) == -1.0
        assert HINGE_LOSS.deriv(1.0) == 0.0  # subgradient convention

    def test_matches_finite_differences(self):
        u = np.linspace(-3.0, 0.9, 101)
        h = 1e-7
        for loss in SMOOTH:
            numeric = (loss.value(u + h) - loss.value(u - h)) / (2 * h)
            np.testing.assert_allclose(loss.deriv(u), numeric, atol=1e-6)


class TestRegressionTargets:
    def test_pinned_values(self):
        assert QUAD.regression_target(0.75) == 0.5
        assert HINGE_LOSS.regression_target(0.75) == 1.0
        assert QUAD.regression_target(0.5) == 0.0
        assert HINGE_LOSS.regression_target(0.5) == 1.0  # tie goes to +1

    def test_eta_range_checked(self):
        with pytest.raises(ValueError):
            QUAD.regression_target(1.5)

    def test_conditional_risk_minimizer(self):
        # the target must beat every candidate score pointwise
        etas = np.linspace(0.0, 1.0, 21)
        cand = np.linspace(-2.0, 2.0, 81)
        for loss in (QUAD, TRUNC, HINGE_LOSS):
            for eta in etas:
                t = loss.regression_target(eta)
                risk = lambda s: eta * loss.value(s) + (1 - eta) * loss.value(-s)
                assert risk(t) <= min(risk(s) for s in cand) + 1e-12

    def test_derivative_ratio_relation(self):
        # phi'(t)/phi'(-t) + 1 = 1/eta at t = 2*eta - 1 for the quadratic loss
        etas = np.linspace(0.05, 0.95, 19)
        t = 2 * etas - 1
        lhs = QUAD.deriv(t) / QUAD.deriv(-t) + 1.0
        np.testing.assert_allclose(lhs, 1.0 / etas, atol=1e-10)


class TestCurvature:
    def test_constants(self):
        assert curvature_constants(QUAD) == (0.25, 2.0)
        assert curvature_constants(TRUNC) == (0.25, 2.0)

    def test_hinge_rejected(self):
        with pytest.raises(UnsupportedLossError):
            curvature_constants(HINGE_LOSS)

    def test_mu_oracle(self):
        # largest mu with (phi(u)+phi(v))/2 - phi((u+v)/2) >= mu (u-v)^2
        u, v = np.meshgrid(_GRID, _GRID)
        mask = np.abs(u - v) > 1e-9
        for loss in SMOOTH:
            gap = 0.5 * (loss.value(u) + loss.value(v)) - loss.value(0.5 * (u + v))
            ratio = gap[mask] / (u - v)[mask] ** 2
            assert ratio.min() >= 0.25 - 1e-12
            np.testing.assert_allclose(ratio.min(), 0.25, atol=1e-12)

    def test_lipschitz_oracle(self):
        # smallest L with |phi'(u)-phi'(v)| <= L|u-v|, over a global grid
        grid = np.linspace(-4.0, 4.0, 81)
        u, v = np.meshgrid(grid, grid)
        mask = np.abs(u - v) > 1e-9
        for loss in SMOOTH:
            ratio = np.abs(loss.deriv(u) - loss.deriv(v))[mask] / np.abs(u - v)[mask]
            assert ratio.max() <= 2.0 + 1e-12
            np.testing.assert_allclose(ratio.max(), 2.0, atol=1e-9)

    def test_modulus_inequality_on_clipped_range(self):
        u, v = np.meshgrid(_GRID, _GRID)
        for loss in SMOOTH:
            mu, _ = curvature_constants(loss)
            gap = 0.5 * (loss.value(u) + loss.value(v)) - loss.value(0.5 * (u + v))
            assert np.all(gap >= mu * (u - v) ** 2 - 1e-12)


@given(st.floats(-50, 50), st.floats(-50, 50), st.sampled_from([0.25, 0.5, 0.75]))
def test_convexity(u, v, t):
    for kind in LOSS_KINDS:
        loss = make_loss(kind)
        chord = t * loss.value(u) + (1 - t) * loss.value(v)
        assert loss.value(t * u + (1 - t) * v) <= chord + 1e-12


class TestClip:
    def test_pinned_values(self):
        assert clip(1.5) == 1.0
        assert clip(-0.3) == -0.3
        assert clip(-2.0) == -1.0

    @given(st.floats(-1e6, 1e6))
    def test_idempotent(self, v):
        assert clip(clip(v)) == clip(v)

    def test_vectorized(self):
        np.testing.assert_array_equal(clip(np.array([-3.0, 0.2, 3.0])),
                                      [-1.0, 0.2, 1.0])


def test_sign_plus_convention():
    np.testing.assert_array_equal(sign_plus(np.array([-0.5, 0.0, 0.5])),
                                  [-1.0, 1.0, 1.0])
