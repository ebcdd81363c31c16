import math

import numpy as np
import pytest

from multitag.core import DrbmParams, LabeledExample, sigm
from multitag.estimators import (DivergenceError, GaussianRbmParams,
                                 TrainConfig, cd_gradient,
                                 generative_cd_gradient, lbp_gradient,
                                 mfcd_gradient, pl_gradient, sgd_train,
                                 sgd_train_generative)
from multitag.oracle import exact_grad, finite_diff, log_pl_reference
from conftest import random_instance


class TestCdGradient:
    def test_decoupled_label_bias_expectation(self):
        # with U = W = 0 and c = 0, the chain's label resample is an
        # unbiased draw from sigm(d), so E[dd] = y - sigm(d)
        rng = np.random.default_rng(5)
        C, n, D = 3, 2, 2
        p = DrbmParams(np.zeros((n, C)), np.zeros((n, D)), np.zeros(n),
                       np.array([0.4, -0.8, 0.1]))
        ex = LabeledExample(np.zeros(D), np.array([1.0, 0.0, 1.0]))
        runs = 100_000
        acc = np.zeros(C)
        for _ in range(runs):
            acc += cd_gradient(ex, p, K=1, rng=rng).dd
        mean = acc / runs
        target = ex.y - sigm(p.d)
        se = np.sqrt(sigm(p.d) * (1 - sigm(p.d)) / runs)
        assert np.all(np.abs(mean - target) < 3 * se)

    def test_zero_when_phases_coincide(self, rng):
        # degenerate biases pin the chain to the training configuration
        _, p = random_instance(rng, scale=0.1)
        p.d[:] = 50.0
        ex = LabeledExample(np.zeros(p.D), np.ones(p.C))
        g = cd_gradient(ex, p, K=3, rng=rng)
        assert g.max_abs() < 1e-12

    def test_reproducible_given_rng_state(self, rng):
        ex, p = random_instance(rng)
        a = cd_gradient(ex, p, K=5, rng=np.random.default_rng(9))
        b = cd_gradient(ex, p, K=5, rng=np.random.default_rng(9))
        np.testing.assert_array_equal(a.flat(), b.flat())

    def test_rejects_bad_k(self, rng):
        ex, p = random_instance(rng)
        with pytest.raises(ValueError):
            cd_gradient(ex, p, K=0, rng=rng)


class TestMfcdGradient:
    def test_decoupled_recovers_logistic_biases(self, rng):
        _, p = random_instance(rng)
        p.U[:] = 0.0
        ex = LabeledExample(rng.normal(size=p.D),
                            (rng.random(p.C) < 0.5).astype(float))
        g = mfcd_gradient(ex, p, K=1)
        np.testing.assert_allclose(g.dd, ex.y - sigm(p.d), atol=1e-12)
        np.testing.assert_allclose(g.dc, np.zeros(p.n), atol=1e-12)
        np.testing.assert_allclose(g.dW, np.zeros_like(p.W), atol=1e-12)

    def test_deterministic(self, rng):
        ex, p = random_instance(rng)
        np.testing.assert_array_equal(mfcd_gradient(ex, p, K=4).flat(),
                                      mfcd_gradient(ex, p, K=4).flat())

    def test_bias_versus_exact_recorded(self, rng, capsys):
        # mean-field CD is biased; record the typical gap, assert only a
        # loose sanity bound on the ascent direction's alignment
        dots = []
        for _ in range(20):
            ex, p = random_instance(rng, scale=0.3)
            g = mfcd_gradient(ex, p, K=5)
            e = exact_grad(ex, p)
            dots.append(float(g.flat() @ e.flat()))
        print(f"mfcd/exact inner products: min {min(dots):.3e}")
        assert np.mean(dots) > 0.0


class TestLbpGradient:
    def test_decoupled_matches_exact(self, rng):
        _, p = random_instance(rng)
        p.U[:] = 0.0
        ex = LabeledExample(rng.normal(size=p.D),
                            (rng.random(p.C) < 0.5).astype(float))
        g = lbp_gradient(ex, p, K=5, beta=0.0)
        e = exact_grad(ex, p)
        np.testing.assert_allclose(g.flat(), e.flat(), atol=1e-10)

    def test_single_hidden_unit_matches_exact(self, rng):
        # one hidden unit makes the graph a tree, so the marginals and
        # hence the estimated model expectation are exact
        for _ in range(5):
            ex, p = random_instance(rng, C=5, n=1)
            g = lbp_gradient(ex, p, K=25, beta=0.0)
            e = exact_grad(ex, p)
            np.testing.assert_allclose(g.flat(), e.flat(), atol=1e-7)

    def test_bounded_entries(self, rng):
        # every statistic is a probability difference, scaled by x for dW
        ex, p = random_instance(rng, scale=1.0)
        g = lbp_gradient(ex, p, K=20, beta=0.5)
        assert np.max(np.abs(g.dU)) <= 1 + 1e-9
        assert np.max(np.abs(g.dc)) <= 1 + 1e-9
        assert np.max(np.abs(g.dd)) <= 1 + 1e-9
        assert np.max(np.abs(g.dW)) <= np.max(np.abs(ex.x)) + 1e-9


class TestPlGradient:
    def test_single_label_equals_exact(self, rng):
        # with one label the pseudo-likelihood is the likelihood
        for _ in range(5):
            ex, p = random_instance(rng, C=1)
            g, log_pl = pl_gradient(ex, p)
            np.testing.assert_allclose(g.flat(), exact_grad(ex, p).flat(),
                                       atol=1e-10)
            assert log_pl == pytest.approx(log_pl_reference(ex, p), abs=1e-10)

    def test_matches_finite_differences(self, rng):
        for _ in range(5):
            ex, p = random_instance(rng)
            g, log_pl = pl_gradient(ex, p)
            fd = finite_diff(lambda q: log_pl_reference(ex, q), p)
            np.testing.assert_allclose(g.flat(), fd.flat(), rtol=1e-6,
                                       atol=1e-8)
            assert log_pl == pytest.approx(log_pl_reference(ex, p), abs=1e-10)

    def test_log_pl_nonpositive(self, rng):
        for _ in range(10):
            ex, p = random_instance(rng, scale=1.0)
            _, log_pl = pl_gradient(ex, p)
            assert log_pl <= 1e-12


class TestGenerativeCd:
    def test_decoupled_feature_bias(self, rng):
        # with W = 0 the reconstruction is bx itself, so dbx = x - bx
        p = GaussianRbmParams(np.zeros((2, 3)), np.zeros((2, 4)), np.zeros(2),
                              np.zeros(3), rng.normal(size=4))
        ex = LabeledExample(rng.normal(size=4),
                            (rng.random(3) < 0.5).astype(float))
        g = generative_cd_gradient(ex, p, K=1, rng=rng)
        np.testing.assert_allclose(g.dbx, ex.x - p.bx, atol=1e-12)

    def test_zero_when_pinned(self, rng):
        p = GaussianRbmParams(np.zeros((2, 2)), np.zeros((2, 3)),
                              np.full(2, 50.0), np.full(2, 50.0), np.ones(3))
        ex = LabeledExample(p.bx.copy(), np.ones(2))
        g = generative_cd_gradient(ex, p, K=2, rng=rng)
        for a in (g.dU, g.dW, g.dc, g.dd, g.dbx):
            assert np.max(np.abs(a)) < 1e-12

    def test_drbm_view_shares_values_not_storage(self, rng):
        p = GaussianRbmParams.random_init(3, 2, 4, rng)
        v = p.drbm_view()
        np.testing.assert_array_equal(v.U, p.U)
        v.U[0, 0] = 99.0
        assert p.U[0, 0] != 99.0


class TestSgdTrain:
    def test_zero_learning_rate_is_noop(self, rng):
        data = [random_instance(rng)[0] for _ in range(4)]
        _, p0 = random_instance(rng)
        cfg = TrainConfig(estimator="pl", lr=0.0, epochs=3, seed=1)
        p = sgd_train(data, p0, cfg)
        np.testing.assert_array_equal(p.U, p0.U)
        np.testing.assert_array_equal(p.d, p0.d)

    def test_pl_training_fits_small_dataset(self, rng):
        # a separable two-example dataset should be fit almost perfectly
        x0, x1 = np.array([2.0, 0.0]), np.array([-2.0, 0.0])
        data = [LabeledExample(x0, np.array([1.0, 1.0])),
                LabeledExample(x1, np.array([0.0, 0.0]))]
        p0 = DrbmParams.random_init(3, 2, 2, rng)
        cfg = TrainConfig(estimator="pl", lr=0.5, epochs=500, seed=0)
        p = sgd_train(data, p0, cfg)
        from multitag.oracle import exact_cond_prob
        for ex in data:
            assert exact_cond_prob(ex.y, ex.x, p) > 0.99

    def test_deterministic_for_fixed_seed(self, rng):
        data = [random_instance(rng)[0] for _ in range(6)]
        _, p0 = random_instance(rng)
        cfg = TrainConfig(estimator="cd", k=2, lr=0.05, epochs=3, seed=7)
        a = sgd_train(data, p0, cfg)
        b = sgd_train(data, p0, cfg)
        np.testing.assert_array_equal(a.U, b.U)
        np.testing.assert_array_equal(a.W, b.W)

    def test_divergence_guard(self, rng):
        data = [random_instance(rng)[0] for _ in range(2)]
        _, p0 = random_instance(rng)
        cfg = TrainConfig(estimator="pl", lr=1e9, epochs=5, seed=0)
        with pytest.raises(DivergenceError):
            sgd_train(data, p0, cfg)

    def test_exact_ascent_monotone_on_average(self, rng):
        # small steps along pl gradients should not reduce the total
        # pseudo-likelihood over a full pass
        data = [random_instance(rng, C=3, n=2, D=2)[0] for _ in range(5)]
        _, p0 = random_instance(rng, C=3, n=2, D=2)
        before = sum(log_pl_reference(ex, p0) for ex in data)
        cfg = TrainConfig(estimator="pl", lr=1e-3, epochs=200, seed=0)
        p = sgd_train(data, p0, cfg)
        after = sum(log_pl_reference(ex, p) for ex in data)
        assert after > before - 1e-9

    def test_log_file_written(self, rng, tmp_path):
        data = [random_instance(rng)[0] for _ in range(2)]
        _, p0 = random_instance(rng)
        cfg = TrainConfig(estimator="mfcd", lr=0.01, epochs=2, seed=0)
        log = tmp_path / "train.log"
        with open(log, "w") as fh:
            sgd_train(data, p0, cfg, log_file=fh)
        lines = log.read_text().splitlines()
        assert len(lines) == 2 and lines[0].startswith("epoch 0")

    def test_empty_dataset_rejected(self, rng):
        _, p0 = random_instance(rng)
        with pytest.raises(ValueError):
            sgd_train([], p0, TrainConfig())


class TestSgdTrainGenerative:
    def test_learns_feature_means(self, rng):
        # a decoupled generative model should move bx toward the data mean
        mean = np.array([1.5, -0.5])
        data = [LabeledExample(mean + 0.1 * rng.normal(size=2),
                               np.zeros(1)) for _ in range(30)]
        p0 = GaussianRbmParams(np.zeros((1, 1)), np.zeros((1, 2)),
                               np.array([-50.0]), np.array([-50.0]),
                               np.zeros(2))
        cfg = TrainConfig(estimator="cd", k=1, lr=0.05, epochs=40, seed=0)
        p = sgd_train_generative(data, p0, cfg)
        np.testing.assert_allclose(p.bx, mean, atol=0.1)


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(estimator="gibbs")
    with pytest.raises(ValueError):
        TrainConfig(k=0)
    with pytest.raises(ValueError):
        TrainConfig(beta=1.0)
    with pytest.raises(ValueError):
        TrainConfig(lr=-0.1)
