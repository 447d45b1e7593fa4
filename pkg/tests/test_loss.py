import math
from dataclasses import replace

import numpy as np
import pytest

from hadaseg.codes import sylvester
from hadaseg.errors import ShapeError
from hadaseg.loss import (
    DiscriminatorOutput,
    LossWeights,
    cross_entropy,
    cross_entropy_grad,
    discriminator_loss,
    discriminator_loss_grads,
    generator_loss,
    generator_loss_grads,
    mae,
    mae_grad,
)

from helpers import finite_difference, rel_error


class TestCrossEntropy:
    def test_perfect_one_hot(self):
        z = np.array([1.0, 0.0, 0.0, 0.0])
        assert abs(cross_entropy(z, z)) < 1e-10

    def test_uniform_binary(self):
        assert math.isclose(
            cross_entropy(np.array([0.5, 0.5]), np.array([1.0, 0.0])),
            math.log(2) / 2,
            rel_tol=1e-12,
        )

    def test_all_ones_target_map(self):
        z_hat = np.full((2, 2), 0.5)
        assert math.isclose(cross_entropy(z_hat, np.ones((2, 2))), math.log(2), rel_tol=1e-12)

    def test_clamp_keeps_loss_finite(self):
        z_hat = np.array([0.0, 1.0])
        z = np.array([1.0, 0.0])
        assert np.isfinite(cross_entropy(z_hat, z))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            cross_entropy(np.zeros(3), np.zeros(4))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(21)
        z_hat = rng.uniform(0.05, 0.95, size=(3, 4))
        z = rng.uniform(0.0, 1.0, size=(3, 4))
        analytic = cross_entropy_grad(z_hat, z)
        numeric = finite_difference(lambda a: cross_entropy(a, z), z_hat.copy())
        assert rel_error(analytic, numeric) < 1e-6


class TestMae:
    def test_identical(self):
        assert mae(np.ones(5), np.ones(5)) == 0.0

    def test_signed_difference(self):
        assert mae(np.array([1.0, -1.0]), np.array([-1.0, 1.0])) == 2.0

    def test_scalar_loop_oracle(self):
        rng = np.random.default_rng(30)
        z_hat = rng.standard_normal(8)
        z = rng.standard_normal(8)
        expected = sum(abs(a - b) for a, b in zip(z_hat, z)) / 8
        assert math.isclose(mae(z_hat, z), expected, rel_tol=1e-15)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(31)
        z = rng.standard_normal((2, 3))
        z_hat = z + rng.choice([-1.0, 1.0], size=(2, 3)) * rng.uniform(0.2, 1.0, (2, 3))
        analytic = mae_grad(z_hat, z)
        numeric = finite_difference(lambda a: mae(a, z), z_hat.copy())
        assert rel_error(analytic, numeric) < 1e-6

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mae(np.zeros((2, 2)), np.zeros((2, 3)))


class TestDiscriminatorLoss:
    def test_perfect_discriminator(self):
        eps = 1e-12
        a_real = np.full((2, 2), 1.0 - eps)
        a_fake = np.full((2, 2), eps)
        assert abs(discriminator_loss(a_real, a_fake)) < 1e-9

    def test_coin_flip(self):
        half = np.full((3, 3), 0.5)
        assert math.isclose(discriminator_loss(half, half), 2 * math.log(2), rel_tol=1e-12)

    def test_single_cell(self):
        value = discriminator_loss(np.array([[0.9]]), np.array([[0.1]]))
        assert math.isclose(value, -2 * math.log(0.9), rel_tol=1e-12)

    def test_accepts_wrapper_type(self):
        half = DiscriminatorOutput(np.full((2, 2), 0.5))
        assert math.isclose(discriminator_loss(half, half), 2 * math.log(2), rel_tol=1e-12)

    def test_cross_entropy_identity(self):
        # S(1|a) + S(0|b) == CE(a, ones) + CE(1 - b, ones), algebraically.
        rng = np.random.default_rng(40)
        a = rng.uniform(0.05, 0.95, (4, 4))
        b = rng.uniform(0.05, 0.95, (4, 4))
        via_ce = cross_entropy(a, np.ones_like(a)) + cross_entropy(1.0 - b, np.ones_like(b))
        assert math.isclose(discriminator_loss(a, b), via_ce, rel_tol=1e-14)

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(41)
        a_real = rng.uniform(0.1, 0.9, (2, 3))
        a_fake = rng.uniform(0.1, 0.9, (2, 3))
        g_real, g_fake = discriminator_loss_grads(a_real, a_fake)
        numeric_real = finite_difference(
            lambda a: discriminator_loss(a, a_fake), a_real.copy()
        )
        numeric_fake = finite_difference(
            lambda a: discriminator_loss(a_real, a), a_fake.copy()
        )
        assert rel_error(g_real, numeric_real) < 1e-6
        assert rel_error(g_fake, numeric_fake) < 1e-6


def _single_pixel_fixture():
    cb = sylvester(1)
    y_hat = np.array([[[0.5, 0.5]]])
    y = np.array([[[1.0, 0.0]]])
    y_c_hat = np.zeros((1, 1, 2))
    y_c = cb.matrix[0].astype(np.float64).reshape(1, 1, 2)
    alpha_fake = np.array([[0.5]])
    return alpha_fake, y_hat, y, y_c_hat, y_c


class TestGeneratorLoss:
    def test_default_weights(self):
        w = LossWeights()
        assert (w.lambda1, w.lambda2, w.lambda3) == (1000.0, 100.0, 250.0)

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            LossWeights(lambda1=-1.0)
        with pytest.raises(ValueError):
            LossWeights(lambda2=float("nan"))

    def test_perfect_prediction_is_near_zero(self):
        y = np.zeros((2, 2, 4))
        y[..., 1] = 1.0
        y_c = np.tile(sylvester(2).matrix[1].astype(np.float64), (2, 2, 1))
        alpha = np.full((1, 1), 1.0 - 1e-12)
        total, terms = generator_loss(alpha, y, y, y_c, y_c, LossWeights())
        assert 0.0 <= total < 1e-9
        assert terms.cross_entropy == 0.0
        assert terms.mae_probability == 0.0
        assert terms.mae_code == 0.0

    def test_single_pixel_scalar_oracle(self):
        alpha_fake, y_hat, y, y_c_hat, y_c = _single_pixel_fixture()
        # Hand-computed: adv = -ln(0.5); ce = -(1*ln 0.5)/2; mae_y = 0.5;
        # mae_yc = 1. Total with (1000, 100, 250) weights follows directly.
        expected_adv = -math.log(0.5)
        expected_ce = math.log(2) / 2
        expected_total = expected_adv + 1000 * expected_ce + 100 * 0.5 + 250 * 1.0
        total, terms = generator_loss(alpha_fake, y_hat, y, y_c_hat, y_c, LossWeights())
        assert math.isclose(terms.adversarial, expected_adv, rel_tol=1e-12)
        assert math.isclose(terms.cross_entropy, expected_ce, rel_tol=1e-12)
        assert terms.mae_probability == 0.5
        assert terms.mae_code == 1.0
        assert math.isclose(total, expected_total, rel_tol=1e-12)

    def test_monotone_in_each_lambda(self):
        alpha_fake, y_hat, y, y_c_hat, y_c = _single_pixel_fixture()
        base = LossWeights()
        total_base, _ = generator_loss(alpha_fake, y_hat, y, y_c_hat, y_c, base)
        for name in ("lambda1", "lambda2", "lambda3"):
            heavier = replace(base, **{name: getattr(base, name) + 10.0})
            total_heavier, _ = generator_loss(alpha_fake, y_hat, y, y_c_hat, y_c, heavier)
            assert total_heavier > total_base

    def test_nonnegative_and_finite(self):
        rng = np.random.default_rng(50)
        for _ in range(20):
            y_hat = rng.uniform(1e-15, 1.0, (2, 2, 4))
            y_hat /= y_hat.sum(axis=-1, keepdims=True)
            y = np.eye(4)[rng.integers(0, 4, (2, 2))]
            y_c_hat = rng.standard_normal((2, 2, 4))
            y_c = rng.choice([-1.0, 1.0], (2, 2, 4))
            alpha = rng.uniform(0.0, 1.0, (1, 1))
            total, terms = generator_loss(alpha, y_hat, y, y_c_hat, y_c, LossWeights())
            assert np.isfinite(total) and total >= 0
            for value in (terms.adversarial, terms.cross_entropy, terms.mae_probability, terms.mae_code):
                assert np.isfinite(value) and value >= 0

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(51)
        y = np.eye(4)[rng.integers(0, 4, (2, 2))]
        y_hat = rng.uniform(0.1, 0.9, (2, 2, 4))
        y_c = rng.choice([-1.0, 1.0], (2, 2, 4))
        y_c_hat = y_c + rng.choice([-1.0, 1.0], (2, 2, 4)) * rng.uniform(0.2, 0.8, (2, 2, 4))
        alpha = rng.uniform(0.2, 0.8, (2, 2))
        w = LossWeights(3.0, 5.0, 7.0)

        g_alpha, g_y_hat, g_y_c_hat = generator_loss_grads(alpha, y_hat, y, y_c_hat, y_c, w)
        numeric_alpha = finite_difference(
            lambda a: generator_loss(a, y_hat, y, y_c_hat, y_c, w)[0], alpha.copy()
        )
        numeric_y_hat = finite_difference(
            lambda a: generator_loss(alpha, a, y, y_c_hat, y_c, w)[0], y_hat.copy()
        )
        numeric_y_c_hat = finite_difference(
            lambda a: generator_loss(alpha, y_hat, y, a, y_c, w)[0], y_c_hat.copy()
        )
        assert rel_error(g_alpha, numeric_alpha) < 1e-5
        assert rel_error(g_y_hat, numeric_y_hat) < 1e-5
        assert rel_error(g_y_c_hat, numeric_y_c_hat) < 1e-5

    def test_shape_mismatch(self):
        alpha_fake, y_hat, y, y_c_hat, y_c = _single_pixel_fixture()
        with pytest.raises(ShapeError):
            generator_loss(alpha_fake, y_hat, y[:, :, :1], y_c_hat, y_c, LossWeights())


class TestDiscriminatorOutput:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            DiscriminatorOutput(np.array([0.0, 0.5]))
        with pytest.raises(ValueError):
            DiscriminatorOutput(np.array([0.5, 1.0]))

    def test_accepts_open_interval(self):
        DiscriminatorOutput(np.array([[0.01, 0.99]]))
