import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multitag.core import (DrbmParams, LabeledExample, ShapeError,
                           cond_free_energy, energy, log1pexp,
                           p_hidden_given, p_label_given, sample_bernoulli,
                           sigm)
from conftest import random_instance


class TestSigm:
    def test_symmetry_at_zero(self):
        assert sigm(0.0) == 0.5

    def test_saturation(self):
        assert abs(sigm(500.0) - 1.0) < 1e-12
        assert abs(sigm(-500.0)) < 1e-12

    def test_algebraic_identity(self):
        assert sigm(math.log(3.0)) == pytest.approx(0.75, abs=1e-12)

    @given(st.floats(min_value=-500, max_value=500))
    def test_range_and_complement(self, z):
        s = sigm(z)
        assert 0.0 <= s <= 1.0
        assert s + sigm(-z) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(min_value=-700, max_value=700))
def test_log1pexp_matches_naive_where_safe(z):
    v = log1pexp(z)
    assert np.isfinite(v)
    if z < 30:
        assert v == pytest.approx(math.log1p(math.exp(z)), rel=1e-12)
    else:
        assert v == pytest.approx(z, rel=1e-12)


def energy_by_loops(y, h, x, p):
    """Independent term-by-term summation."""
    total = 0.0
    for k in range(p.n):
        for j in range(p.C):
            total -= h[k] * p.U[k, j] * y[j]
    for k in range(p.n):
        for i in range(p.D):
            total -= h[k] * p.W[k, i] * x[i]
    for j in range(p.C):
        total -= p.d[j] * y[j]
    for k in range(p.n):
        total -= p.c[k] * h[k]
    return total


class TestEnergy:
    def test_all_zero_configuration(self, rng):
        _, p = random_instance(rng)
        assert energy(np.zeros(p.C), np.zeros(p.n), rng.normal(size=p.D), p) == 0.0

    def test_bias_only(self):
        n, C = 3, 2
        p = DrbmParams(np.zeros((n, C)), np.zeros((n, 0)), np.ones(n), np.ones(C))
        assert energy(np.ones(C), np.ones(n), np.zeros(0), p) == -(n + C)

    def test_matches_loop_oracle(self, rng):
        for _ in range(10):
            ex, p = random_instance(rng, C=2, n=2, D=2)
            h = (rng.random(2) < 0.5).astype(float)
            assert energy(ex.y, h, ex.x, p) == pytest.approx(
                energy_by_loops(ex.y, h, ex.x, p), rel=1e-12)

    def test_bilinear_in_coupling(self, rng):
        ex, p = random_instance(rng)
        h = np.ones(p.n)
        base = energy(ex.y, h, ex.x, p)
        p2 = p.copy()
        p2.U *= 2.0
        coupling = -h @ p.U @ ex.y
        assert energy(ex.y, h, ex.x, p2) == pytest.approx(base + coupling, rel=1e-9)

    def test_shape_mismatch(self, rng):
        ex, p = random_instance(rng)
        with pytest.raises(ShapeError):
            energy(np.zeros(p.C + 1), np.zeros(p.n), ex.x, p)


class TestCondFreeEnergy:
    def test_zero_params_gives_n_log2(self):
        p = DrbmParams.zeros(4, 3, 2)
        assert cond_free_energy(np.zeros(3), np.zeros(2), p) == pytest.approx(
            -4 * math.log(2), rel=1e-12)

    def test_single_unit_closed_form(self):
        c1, u, delta = 0.3, -0.7, 1.1
        p = DrbmParams(np.array([[u]]), np.zeros((1, 0)), np.array([c1]),
                       np.array([delta]))
        expected = -delta - math.log1p(math.exp(c1 + u))
        assert cond_free_energy(np.ones(1), np.zeros(0), p) == pytest.approx(
            expected, rel=1e-12)

    def test_matches_hidden_enumeration(self, rng):
        for _ in range(5):
            ex, p = random_instance(rng, C=3, n=6, D=4)
            brute = -np.log(sum(
                math.exp(-energy(ex.y, np.array(h, dtype=float), ex.x, p))
                for h in product((0, 1), repeat=p.n)))
            assert cond_free_energy(ex.y, ex.x, p) == pytest.approx(brute, abs=1e-10)


class TestConditionals:
    def test_hidden_decoupled_reductions(self, rng):
        _, p = random_instance(rng)
        p0 = DrbmParams(np.zeros_like(p.U), np.zeros_like(p.W), p.c, p.d)
        x = rng.normal(size=p.D)
        np.testing.assert_allclose(p_hidden_given(np.ones(p.C), x, p0), sigm(p.c))
        pw = DrbmParams(p.U, np.zeros_like(p.W), p.c, p.d)
        np.testing.assert_allclose(p_hidden_given(np.zeros(p.C), x, pw), sigm(p.c))

    def test_label_decoupled_reductions(self, rng):
        _, p = random_instance(rng)
        p0 = DrbmParams(np.zeros_like(p.U), p.W, p.c, p.d)
        np.testing.assert_allclose(p_label_given(np.ones(p.n), p0), sigm(p.d))
        np.testing.assert_allclose(p_label_given(np.zeros(p.n), p), sigm(p.d))

    def test_hidden_matches_joint_enumeration(self, rng):
        ex, p = random_instance(rng, C=3, n=3, D=2)
        # p(h_k=1|y,x) from the joint table over h
        weights = {h: math.exp(-energy(ex.y, np.array(h, dtype=float), ex.x, p))
                   for h in product((0, 1), repeat=p.n)}
        z = sum(weights.values())
        for k in range(p.n):
            marg = sum(w for h, w in weights.items() if h[k] == 1) / z
            assert p_hidden_given(ex.y, ex.x, p)[k] == pytest.approx(marg, abs=1e-10)

    def test_label_matches_enumeration(self, rng):
        _, p = random_instance(rng, C=3, n=3, D=2)
        h = np.array([1.0, 0.0, 1.0])
        # with x-terms constant in y, p(y|h) factorizes over labels
        x = np.zeros(p.D)
        weights = {y: math.exp(-energy(np.array(y, dtype=float), h, x, p))
                   for y in product((0, 1), repeat=p.C)}
        z = sum(weights.values())
        for j in range(p.C):
            marg = sum(w for y, w in weights.items() if y[j] == 1) / z
            assert p_label_given(h, p)[j] == pytest.approx(marg, abs=1e-10)


class TestSampleBernoulli:
    def test_degenerate_probabilities(self, rng):
        np.testing.assert_array_equal(sample_bernoulli(np.zeros(8), rng), np.zeros(8))
        np.testing.assert_array_equal(sample_bernoulli(np.ones(8), rng), np.ones(8))

    def test_law_of_large_numbers(self):
        rng = np.random.default_rng(11)
        draws = np.stack([sample_bernoulli(np.full(4, 0.5), rng)
                          for _ in range(100_000)])
        assert np.all(np.abs(draws.mean(axis=0) - 0.5) < 0.01)

    def test_reproducible_given_seed(self):
        a = np.stack([sample_bernoulli(np.full(5, 0.3), np.random.default_rng(42))
                      for _ in range(1)])
        b = np.stack([sample_bernoulli(np.full(5, 0.3), np.random.default_rng(42))
                      for _ in range(1)])
        np.testing.assert_array_equal(a, b)

    def test_rejects_bad_probabilities(self, rng):
        with pytest.raises(ValueError):
            sample_bernoulli(np.array([0.5, 1.5]), rng)


def test_params_validate_shapes():
    with pytest.raises(ShapeError):
        DrbmParams(np.zeros((2, 3)), np.zeros((3, 1)), np.zeros(2), np.zeros(3))
    with pytest.raises(ValueError):
        DrbmParams(np.full((2, 3), np.nan), np.zeros((2, 1)), np.zeros(2), np.zeros(3))


def test_labeled_example_validates():
    with pytest.raises(ValueError):
        LabeledExample(np.zeros(2), np.array([0.0, 0.5]))
