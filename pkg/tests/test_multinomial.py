"""Tests for the multinomial (J x K x N) sampler and its softmax helpers."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pgtables import (
    GibbsConfig,
    MatrixNormalPrior,
    MultinomialChain,
    MultinomialTable,
    NumericalError,
    batch_means_mcse,
    multinomial_gibbs,
    softmax_probs,
    summarize_multinomial,
)
from pgtables.multinomial import add_baseline_column, compute_offset, _block_offsets

from oracles import quadrature_multinomial3


class TestSoftmax:
    def test_known_values(self):
        assert_allclose(softmax_probs([0.0, 0.0]), [0.5, 0.5])
        assert_allclose(softmax_probs([np.log(2.0), 0.0]), [2.0 / 3.0, 1.0 / 3.0])

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        logits = rng.normal(scale=3.0, size=(50, 4, 5))
        probs = softmax_probs(logits)
        assert np.all(np.abs(probs.sum(axis=-1) - 1.0) < 1e-12)
        assert np.all(probs >= 0.0)

    def test_extreme_logits_stable(self):
        probs = softmax_probs([800.0, 0.0, -800.0])
        assert_allclose(probs, [1.0, 0.0, 0.0], atol=1e-300)
        assert np.isfinite(probs).all()

    def test_shift_invariance(self):
        x = np.array([0.3, -1.2, 2.0])
        assert_allclose(softmax_probs(x), softmax_probs(x + 57.0), rtol=1e-12)


class TestBaselineColumn:
    def test_appends_zero_column(self):
        free = np.array([[1.0, 2.0], [3.0, 4.0]])
        full = add_baseline_column(free)
        assert full.shape == (2, 3)
        assert_allclose(full[:, -1], 0.0)
        assert_allclose(full[:, :2], free)


class TestOffsets:
    def test_hand_computed(self):
        psi_full = np.array([[[1.0, 2.0, 0.0]]])
        assert_allclose(compute_offset(psi_full, 0, 0, 0), np.logaddexp(2.0, 0.0))
        assert_allclose(compute_offset(psi_full, 0, 0, 2), np.logaddexp(1.0, 2.0))

    def test_two_outcome_offset_is_zero(self):
        # With K = 2 the only other column is the zero baseline.
        psi_full = np.array([[[0.7, 0.0]]])
        assert compute_offset(psi_full, 0, 0, 0) == 0.0

    def test_large_values_stable(self):
        psi_full = np.array([[[49.0, 0.0, 0.0]]])
        got = compute_offset(psi_full, 0, 0, 1)
        assert_allclose(got, 49.0 + np.log1p(np.exp(-49.0)), rtol=1e-15)

    def test_block_offsets_match_scalar_helper(self):
        rng = np.random.default_rng(3)
        full = rng.normal(size=(4, 5))
        for k in range(4):
            got = _block_offsets(full, k)
            want = [compute_offset(full[None], 0, j, k) for j in range(4)]
            assert_allclose(got, want, rtol=1e-14)


def quick_table():
    counts = np.array(
        [
            [[12.0, 5.0, 7.0], [3.0, 9.0, 6.0]],
            [[8.0, 8.0, 8.0], [10.0, 2.0, 12.0]],
        ]
    )
    return MultinomialTable(counts, ["c1", "c2"], ["t1", "t2"], ["good", "ok", "bad"])


def quick_prior():
    return MatrixNormalPrior(np.zeros((2, 2)), np.eye(2), np.eye(2))


class TestMultinomialGibbs:
    def test_deterministic_rerun(self):
        cfg = GibbsConfig(iters=80, burnin=20, seed=9)
        a = multinomial_gibbs(quick_table(), quick_prior(), cfg)
        b = multinomial_gibbs(quick_table(), quick_prior(), cfg)
        assert np.array_equal(a.psi, b.psi)

    def test_chain_shape_and_labels(self):
        cfg = GibbsConfig(iters=60, burnin=10, thin=2, seed=1)
        chain = multinomial_gibbs(quick_table(), quick_prior(), cfg)
        assert chain.psi.shape == (25, 2, 2, 2)
        assert chain.param_names()[0] == "psi_c1_t1_good"
        assert chain.outcome_labels[-1] == "bad"

    def test_prior_shape_mismatch_rejected(self):
        bad = MatrixNormalPrior(np.zeros((2, 3)), np.eye(2), np.eye(3))
        with pytest.raises(ValueError, match="J x"):
            multinomial_gibbs(quick_table(), bad, GibbsConfig(iters=10, burnin=1))

    def test_hyperprior_mode_rejected(self):
        with pytest.raises(ValueError, match="hyperprior"):
            multinomial_gibbs(
                quick_table(), quick_prior(), GibbsConfig(iters=10, burnin=1, hyper_mode="niw")
            )

    def test_symmetric_outcomes_have_symmetric_posteriors(self):
        # Equal counts for the two free outcomes and an exchangeable prior
        # make their posterior means equal up to Monte-Carlo error.
        counts = np.array([[[9.0, 9.0, 6.0]]])
        table = MultinomialTable(counts)
        prior = MatrixNormalPrior(np.zeros((1, 2)), np.eye(1), np.eye(2))
        chain = multinomial_gibbs(table, prior, GibbsConfig(iters=6_000, burnin=1_000, seed=20260825))
        a = chain.psi[:, 0, 0, 0]
        b = chain.psi[:, 0, 0, 1]
        band = 3.0 * np.hypot(batch_means_mcse(a), batch_means_mcse(b))
        assert abs(a.mean() - b.mean()) < band

    def test_single_cell_matches_quadrature_oracle(self):
        y = np.array([12.0, 5.0, 7.0])
        m = np.array([0.2, -0.1])
        sigma_cols = np.array([[1.0, 0.3], [0.3, 1.5]])
        table = MultinomialTable(y[None, None, :])
        prior = MatrixNormalPrior(m[None, :], np.eye(1), sigma_cols)
        chain = multinomial_gibbs(
            table, prior, GibbsConfig(iters=20_000, burnin=4_000, seed=20260825)
        )
        want_logits, want_probs = quadrature_multinomial3(y, m, sigma_cols)
        for k in range(2):
            draws = chain.psi[:, 0, 0, k]
            band = 3.0 * batch_means_mcse(draws)
            assert abs(draws.mean() - want_logits[k]) < band, k
        got_probs = chain.mean_probs()[0, 0]
        assert_allclose(got_probs, want_probs, atol=0.01)
        assert abs(got_probs.sum() - 1.0) < 1e-12


class TestMultinomialChain:
    def make(self):
        rng = np.random.default_rng(2)
        return MultinomialChain(
            rng.normal(size=(6, 2, 2, 2)), ["c1", "c2"], ["t1", "t2"], ["g", "o", "b"]
        )

    def test_param_names_cover_free_outcomes_only(self):
        names = self.make().param_names()
        assert len(names) == 8
        assert "psi_c1_t1_b" not in names

    def test_mean_probs_normalized(self):
        probs = self.make().mean_probs()
        assert probs.shape == (2, 2, 3)
        assert_allclose(probs.sum(axis=-1), 1.0, atol=1e-12)

    def test_csv_round_trip(self, tmp_path):
        chain = self.make()
        path = tmp_path / "chain.csv"
        chain.to_csv(path, manifest="m.json")
        back = MultinomialChain.from_csv(path)
        assert np.array_equal(back.psi, chain.psi)
        assert back.center_labels == chain.center_labels
        assert back.treatment_labels == chain.treatment_labels

    def test_from_csv_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n1,2\n")
        with pytest.raises(ValueError):
            MultinomialChain.from_csv(path)

    def test_outcome_labels_must_include_baseline(self):
        with pytest.raises(ValueError):
            MultinomialChain(np.zeros((2, 1, 1, 2)), ["c"], ["t"], ["a", "b"])

    def test_summary_keys(self):
        chain = self.make()
        summary = summarize_multinomial(chain)
        assert set(summary) == set(chain.param_names())
        first = summary["psi_c1_t1_g"]
        assert {"mean", "sd", "q2.5", "q97.5"} <= set(first)

    def test_summary_rejects_empty(self):
        chain = MultinomialChain(np.zeros((0, 1, 1, 2)), ["c"], ["t"], ["a", "b", "c"])
        with pytest.raises(ValueError):
            summarize_multinomial(chain)
