import numpy as np
import pytest

from gadl.autoencoder import (
    Gradients,
    TiedAutoencoder,
    decode,
    encode,
    gradient,
    init_autoencoder,
    reconstruct,
    rmse,
    sgd_step,
    sparsity,
)
from gadl.numerics import RandomStream, sigmoid

from conftest import fd_gradients, rand_ae


def zero_ae(hidden=3, visible=5):
    return TiedAutoencoder(np.zeros((hidden, visible)), np.zeros(hidden),
                           np.zeros(visible))


class TestShapes:
    def test_bias_lengths_validated(self):
        with pytest.raises(ValueError, match="enc_bias"):
            TiedAutoencoder(np.zeros((2, 3)), np.zeros(3), np.zeros(3))
        with pytest.raises(ValueError, match="dec_bias"):
            TiedAutoencoder(np.zeros((2, 3)), np.zeros(2), np.zeros(2))

    def test_init_bounds_and_zero_biases(self):
        ae = init_autoencoder(8, 16, RandomStream(3).fork("i"))
        bound = 1.0 / 4.0
        assert np.all(np.abs(ae.weights) <= bound)
        assert np.all(ae.enc_bias == 0.0) and np.all(ae.dec_bias == 0.0)

    def test_init_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            init_autoencoder(0, 4, RandomStream(0))


class TestEncodeDecode:
    def test_zero_params_encode_is_half(self):
        ae = zero_ae()
        assert np.all(encode(ae, np.full(5, 0.7)) == 0.5)

    def test_one_by_two_layer(self):
        ae = TiedAutoencoder([[1.0, 1.0]], [0.0], [0.0, 0.0])
        assert np.array_equal(encode(ae, [0.0, 0.0]), [0.5])

    def test_encode_matches_scalar_loop(self):
        ae = rand_ae(17, 4, 6)
        x = RandomStream(18).uniform(0, 1, 6)
        expected = [
            sigmoid(sum(ae.weights[i, j] * x[j] for j in range(6)) + ae.enc_bias[i])
            for i in range(4)
        ]
        np.testing.assert_allclose(encode(ae, x), expected, rtol=1e-12)

    def test_encode_rejects_mismatch(self):
        with pytest.raises(ValueError):
            encode(zero_ae(), np.zeros(4))

    def test_zero_params_decode_is_half(self):
        assert np.all(decode(zero_ae(), np.zeros(3)) == 0.5)

    def test_decode_matches_explicit_transpose(self):
        ae = rand_ae(19, 5, 7)
        h = RandomStream(20).uniform(0, 1, 5)
        wt = np.ascontiguousarray(ae.weights.T)
        expected = sigmoid(wt @ h + ae.dec_bias)
        np.testing.assert_allclose(decode(ae, h), expected, rtol=1e-12)

    def test_decode_rejects_mismatch(self):
        with pytest.raises(ValueError):
            decode(zero_ae(), np.zeros(5))

    def test_tied_weight_perturbation_hits_both_paths(self):
        ae = rand_ae(21, 4, 6)
        x = RandomStream(22).uniform(0, 1, 6)
        h = RandomStream(23).uniform(0, 1, 4)
        base_enc = encode(ae, x)
        base_dec = decode(ae, h)
        bumped = ae.copy()
        bumped.weights[2, 3] += 0.25
        enc_diff = encode(bumped, x) != base_enc
        dec_diff = decode(bumped, h) != base_dec
        assert enc_diff[2] and np.sum(enc_diff) == 1  # row path
        assert dec_diff[3] and np.sum(dec_diff) == 1  # column path


class TestReconstruct:
    def test_zero_params_reconstruct_is_half(self):
        assert np.all(reconstruct(zero_ae(), np.full(5, 0.9)) == 0.5)

    def test_composition_is_bit_exact(self):
        ae = rand_ae(24, 3, 8)
        x = RandomStream(25).uniform(0, 1, 8)
        assert np.array_equal(reconstruct(ae, x), decode(ae, encode(ae, x)))

    def test_error_vector_matches_loop(self):
        ae = rand_ae(26, 3, 5)
        x = RandomStream(27).uniform(0, 1, 5)
        e = x - reconstruct(ae, x)
        h = [sigmoid(sum(ae.weights[i, j] * x[j] for j in range(5)) + ae.enc_bias[i])
             for i in range(3)]
        manual = [x[j] - sigmoid(sum(ae.weights[i, j] * h[i] for i in range(3))
                                 + ae.dec_bias[j])
                  for j in range(5)]
        np.testing.assert_allclose(e, manual, rtol=1e-12, atol=1e-15)


class TestRmse:
    def test_perfect_reconstruction_is_zero(self):
        # zero parameters map any input to 0.5, so 0.5 inputs reconstruct exactly
        ae = zero_ae()
        assert rmse(ae, np.full((4, 5), 0.5)) == 0.0

    def test_formula_value(self):
        # push reconstruction to ~(0,0): rmse for x=(1,0) -> sqrt(1/2)
        ae = TiedAutoencoder(np.zeros((1, 2)), [0.0], [-50.0, -50.0])
        assert abs(rmse(ae, [[1.0, 0.0]]) - 0.7071067811865476) < 1e-9

    def test_duplication_invariance(self):
        ae = rand_ae(28, 4, 6)
        x = RandomStream(29).uniform(0, 1, (7, 6))
        doubled = np.vstack([x, x])
        assert abs(rmse(ae, x) - rmse(ae, doubled)) < 1e-12

    def test_matches_scalar_loop_oracle(self):
        ae = rand_ae(30, 4, 6)
        x = RandomStream(31).uniform(0, 1, (5, 6))
        total = 0.0
        for row in x:
            r = row - reconstruct(ae, row)
            total += float(r @ r)
        expected = np.sqrt(total / x.size)
        assert abs(rmse(ae, x) - expected) < 1e-12

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            rmse(zero_ae(), np.empty((0, 5)))


class TestGradient:
    def test_zero_at_exact_reconstruction(self):
        g = gradient(zero_ae(), np.full((3, 5), 0.5))
        assert np.all(g.d_weights == 0.0)
        assert np.all(g.d_enc_bias == 0.0)
        assert np.all(g.d_dec_bias == 0.0)

    def test_matches_finite_differences(self):
        ae = rand_ae(33, 5, 8)
        x = RandomStream(34).uniform(0, 1, (3, 8))
        g = gradient(ae, x)
        fd_w, fd_e, fd_d = fd_gradients(ae, x)
        for got, ref in ((g.d_weights, fd_w), (g.d_enc_bias, fd_e),
                         (g.d_dec_bias, fd_d)):
            rel = np.abs(got - ref) / np.maximum(np.abs(ref), 1e-8)
            assert rel.max() < 1e-6

    def test_batch_gradient_is_mean_of_sample_gradients(self):
        ae = rand_ae(35, 4, 6)
        x = RandomStream(36).uniform(0, 1, (4, 6))
        batch = gradient(ae, x)
        singles = [gradient(ae, row.reshape(1, -1)) for row in x]
        np.testing.assert_allclose(
            batch.d_weights,
            np.mean([s.d_weights for s in singles], axis=0), rtol=1e-12)
        np.testing.assert_allclose(
            batch.d_dec_bias,
            np.mean([s.d_dec_bias for s in singles], axis=0), rtol=1e-12)

    def test_rejects_empty_batch(self):
        with pytest.raises(ValueError):
            gradient(zero_ae(), np.empty((0, 5)))


class TestSgdStep:
    def test_zero_gradient_leaves_parameters(self):
        ae = rand_ae(37, 3, 4)
        g = Gradients(np.zeros((3, 4)), np.zeros(3), np.zeros(4))
        out = sgd_step(ae, g, 0.5)
        assert np.array_equal(out.weights, ae.weights)
        assert np.array_equal(out.enc_bias, ae.enc_bias)

    def test_arithmetic(self):
        ae = TiedAutoencoder([[1.0]], [0.0], [0.0])
        g = Gradients(np.array([[2.0]]), np.zeros(1), np.zeros(1))
        assert sgd_step(ae, g, 0.1).weights[0, 0] == 0.8

    def test_does_not_mutate_input(self):
        ae = rand_ae(38, 3, 4)
        before = ae.weights.copy()
        g = gradient(ae, RandomStream(39).uniform(0, 1, (2, 4)))
        sgd_step(ae, g, 0.1)
        assert np.array_equal(ae.weights, before)

    def test_small_step_decreases_loss(self):
        ae = rand_ae(40, 4, 6)
        x = RandomStream(41).uniform(0, 1, (6, 6))
        before = rmse(ae, x)
        after = rmse(sgd_step(ae, gradient(ae, x), 1e-3), x)
        assert after < before

    def test_rejects_bad_learning_rate(self):
        ae = rand_ae(42, 2, 3)
        g = gradient(ae, np.full((1, 3), 0.5))
        with pytest.raises(ValueError):
            sgd_step(ae, g, 0.0)


class TestSparsity:
    def test_all_zero_weights(self):
        assert sparsity(zero_ae(), 0.0) == 1.0
        assert sparsity(zero_ae(), 5.0) == 1.0

    def test_identity_counts_half(self):
        ae = TiedAutoencoder(np.eye(2), np.zeros(2), np.zeros(2))
        assert sparsity(ae, 0.0) == 0.5

    def test_biases_excluded(self):
        ae = TiedAutoencoder(np.eye(2), np.full(2, 9.0), np.full(2, 9.0))
        assert sparsity(ae, 0.0) == 0.5

    def test_threshold_validated(self):
        with pytest.raises(ValueError):
            sparsity(zero_ae(), -0.1)


def test_tying_against_untied_twin():
    # an untied twin built from W and an explicit W^T must reproduce both paths
    ae = rand_ae(44, 6, 9)
    wt = np.ascontiguousarray(ae.weights.T)
    x = RandomStream(45).uniform(0, 1, 9)
    h = encode(ae, x)
    np.testing.assert_allclose(
        decode(ae, h), sigmoid(wt @ h + ae.dec_bias), rtol=1e-12)
