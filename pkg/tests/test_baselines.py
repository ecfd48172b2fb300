import math

import numpy as np
import pytest
from _oracles import em_step, random_instance

from smivb.baselines import em_ml, log_likelihood, svd_pinv_weights
from smivb.model import ComponentBasis, Smi, WaveGrid, WeightDistribution, superpose
from smivb.vb import posterior_mean, run_vb


def _basis(mat):
    mat = np.asarray(mat, dtype=float)
    return ComponentBasis(
        WaveGrid(np.arange(1, mat.shape[1] + 1, dtype=float)),
        tuple(f"c{i}" for i in range(mat.shape[0])),
        mat,
    )


class TestEm:
    def test_identity_one_iteration(self):
        b = _basis(np.eye(2))
        rep = em_ml(Smi(b.grid, [30, 70]), b, max_iter=1)
        np.testing.assert_allclose(rep.weights.w, [0.3, 0.7])

    def test_single_component(self):
        b = _basis([[0.3, 0.7]])
        rep = em_ml(Smi(b.grid, [3, 4]), b, max_iter=1)
        np.testing.assert_array_equal(rep.weights.w, [1.0])

    def test_monotone_trace(self):
        rng = np.random.default_rng(0)
        b, s, _ = random_instance(rng, 10, 8)
        trace = em_ml(s, b, max_iter=300).log_likelihood_trace
        assert np.all(np.diff(trace) >= -1e-9)

    def test_steps_match_loop_oracle(self):
        rng = np.random.default_rng(2)
        b, s, _ = random_instance(rng, 4, 9, zero_frac=0.2)
        eta = b.normalized().intensity.tolist()
        w = [0.25] * 4
        for _ in range(5):
            w = em_step(s.counts.tolist(), eta, w)
        np.testing.assert_allclose(em_ml(s, b, max_iter=5).weights.w, w, rtol=1e-12)

    def test_trace_is_log_likelihood(self):
        rng = np.random.default_rng(3)
        b, s, _ = random_instance(rng, 6, 15)
        rep = em_ml(s, b, max_iter=7)
        assert rep.log_likelihood_trace[-1] == pytest.approx(
            log_likelihood(s, b.normalized(), rep.weights), rel=1e-12
        )

    def test_fixed_point(self):
        rng = np.random.default_rng(4)
        mat = rng.uniform(0.05, 1.0, size=(4, 25))
        b = _basis(mat)
        true = np.array([0.1, 0.2, 0.3, 0.4])
        s = Smi(b.grid, 5000 * (true @ b.normalized().intensity))
        w = em_ml(s, b, max_iter=200_000, tol=0).weights.w
        w2 = w.copy()
        eta = b.normalized().intensity
        p = w2 @ eta
        w2 = w2 * (eta @ (s.counts / p)) / s.total
        assert np.max(np.abs(w2 - w)) < 1e-12

    def test_tolerance_stops(self):
        rng = np.random.default_rng(5)
        b, s, _ = random_instance(rng, 5, 20)
        rep = em_ml(s, b, max_iter=100_000, tol=1e-8)
        assert rep.converged and rep.iterations < 100_000

    def test_dead_bin_with_counts(self):
        b = _basis([[1.0, 0.0], [2.0, 0.0]])
        with pytest.raises(ValueError):
            em_ml(Smi(b.grid, [3, 1]), b)


class TestSvd:
    def test_invertible_square(self):
        b = _basis([[2.0, 1.0], [1.0, 3.0]])
        a = np.array([0.7, 2.5])
        s = Smi(b.grid, a @ b.intensity)
        np.testing.assert_allclose(svd_pinv_weights(s, b).w, a, atol=1e-10)

    def test_row_gives_one_hot(self):
        rng = np.random.default_rng(0)
        b = _basis(rng.random((5, 12)))
        assert np.linalg.matrix_rank(b.intensity) == 5
        for i in range(5):
            w = svd_pinv_weights(Smi(b.grid, b.intensity[i]), b).w
            np.testing.assert_allclose(w, np.eye(5)[i], atol=1e-10)
        assert svd_pinv_weights(Smi(b.grid, b.intensity[0]), b).unconstrained

    def test_matches_lstsq(self):
        rng = np.random.default_rng(1)
        b = _basis(rng.random((6, 30)))
        s = Smi(b.grid, rng.random(30) * 10)
        ref = np.linalg.lstsq(b.intensity.T, s.counts, rcond=None)[0]
        np.testing.assert_allclose(svd_pinv_weights(s, b).w, ref, rtol=1e-9)

    def test_overlapping_noisy_instance_has_negatives(self, overlapping_instance):
        basis, smi = overlapping_instance
        assert np.any(svd_pinv_weights(smi, basis).w < 0)

    def test_residual_optimality(self):
        rng = np.random.default_rng(2)
        b, s, _ = random_instance(rng, 8, 40)
        a = svd_pinv_weights(s, b).w
        best = np.linalg.norm(s.counts - a @ b.intensity)
        for _ in range(100):
            w = rng.dirichlet(np.ones(8))
            for scale in (1.0, s.total / b.intensity.sum(axis=1).mean()):
                assert best <= np.linalg.norm(s.counts - scale * w @ b.intensity) + 1e-9

    def test_rank_deficient_truncation(self):
        b = _basis([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
        w = svd_pinv_weights(Smi(b.grid, [1.0, 2.0, 3.0]), b).w
        # minimum-norm solution splits along the shared direction
        np.testing.assert_allclose(w, [0.2, 0.4], atol=1e-12)

    def test_degenerate(self):
        b = _basis([[1.0, 0.0]])
        object.__setattr__(b, "intensity", np.zeros((1, 2)))
        with pytest.raises(ValueError):
            svd_pinv_weights(Smi(b.grid, [1.0, 1.0]), b)


class TestLogLikelihood:
    def test_uniform(self):
        k = 7
        b = _basis(np.ones((1, k)))
        s = Smi(b.grid, np.arange(k, dtype=float))
        ll = log_likelihood(s, b, WeightDistribution(b.labels, [1.0]))
        assert ll == pytest.approx(s.total * math.log(1 / k), rel=1e-14)

    def test_one_hot_direct_sum(self):
        rng = np.random.default_rng(6)
        mat = rng.random((3, 10))
        mat[1, 4] = 0.0
        b = _basis(mat)
        counts = rng.multinomial(200, b.normalized().intensity[1]).astype(float)
        s = Smi(b.grid, counts)
        w = WeightDistribution(b.labels, [0.0, 1.0, 0.0])
        row = mat[1] / mat[1].sum()
        ref = sum(counts[k] * math.log(row[k]) for k in range(10) if counts[k] > 0)
        assert log_likelihood(s, b, w) == pytest.approx(ref, rel=1e-13)

    def test_zero_probability_gives_minus_inf(self):
        b = _basis([[1.0, 0.0], [0.0, 1.0]])
        w = WeightDistribution(b.labels, [1.0, 0.0])
        assert log_likelihood(Smi(b.grid, [2, 0]), b, w) == pytest.approx(2 * math.log(1.0))
        assert log_likelihood(Smi(b.grid, [2, 1]), b, w) == -math.inf

    def test_truth_beats_perturbations(self):
        rng = np.random.default_rng(7)
        mat = rng.random((5, 25))
        b = _basis(mat)
        true = WeightDistribution(b.labels, rng.dirichlet(np.ones(5)))
        s = Smi(b.grid, 1000 * superpose(b, true))
        best = log_likelihood(s, b, true)
        for _ in range(50):
            w = np.abs(true.w + rng.normal(scale=0.05, size=5))
            assert log_likelihood(s, b, WeightDistribution(b.labels, w / w.sum())) <= best


def test_vb_approaches_em_with_vanishing_prior():
    rng = np.random.default_rng(9)
    mat = rng.uniform(0.05, 1.0, size=(5, 40))
    b = _basis(mat)
    true = rng.dirichlet(np.ones(5) * 3)
    s = Smi(b.grid, 100_000 * (true @ b.normalized().intensity))
    w_vb = posterior_mean(run_vb(s, b, 1e-6, max_iter=20_000, tol=1e-13).posterior).w
    w_em = em_ml(s, b, max_iter=20_000, tol=0).weights.w
    assert np.max(np.abs(w_vb - w_em)) <= 0.01
