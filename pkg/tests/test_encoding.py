"""Encoder: ridge solver, dataset invariants, fitting, and encode/decode."""

import numpy as np
import pytest

from latentsynth import Dataset, LinearEncoder, solve_ridge
from sklearn.exceptions import NotFittedError

from conftest import planted_bilinear


class TestSolveRidge:
    def test_identity_design_returns_target(self):
        rng = np.random.default_rng(0)
        target = rng.standard_normal((3, 2))
        out = solve_ridge(np.eye(3), target, 0.0)
        np.testing.assert_allclose(out, target, atol=1e-12)

    def test_diagonal_hand_solved(self):
        # normal equations: diag(1, 4) x = (1, 4) -> x = (1, 1)
        out = solve_ridge([[1.0, 0.0], [0.0, 2.0]], [[1.0], [2.0]], 0.0)
        np.testing.assert_allclose(out, [[1.0], [1.0]], atol=1e-12)

    def test_infinite_ridge_shrinks_to_zero(self):
        out = solve_ridge([[1.0], [1.0]], [[1.0], [1.0]], 1e9)
        assert np.all(np.abs(out) < 1e-6)

    def test_singular_without_ridge_raises_with_advice(self):
        with pytest.raises(np.linalg.LinAlgError, match="positive ridge"):
            solve_ridge([[1.0, 1.0], [1.0, 1.0]], [[1.0], [1.0]], 0.0)

    def test_singular_with_ridge_succeeds(self):
        out = solve_ridge([[1.0, 1.0], [1.0, 1.0]], [[2.0], [2.0]], 1e-6)
        np.testing.assert_allclose(out, [[1.0], [1.0]], rtol=1e-4)

    def test_row_count_mismatch(self):
        with pytest.raises(ValueError, match="rows"):
            solve_ridge(np.eye(3), np.ones((2, 1)), 0.0)

    def test_negative_ridge_rejected(self):
        with pytest.raises(ValueError):
            solve_ridge(np.eye(2), np.ones((2, 1)), -1.0)

    def test_vector_target_round_trips(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((10, 3))
        x = rng.standard_normal(3)
        out = solve_ridge(A, A @ x, 0.0)
        assert out.shape == (3,)
        np.testing.assert_allclose(out, x, atol=1e-10)


class TestDataset:
    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="NaN"):
            Dataset(np.array([[1.0, np.nan]]))

    def test_rejects_inf(self):
        with pytest.raises(ValueError, match="NaN or infinite"):
            Dataset(np.array([[1.0, np.inf]]))

    def test_rejects_duplicate_names(self):
        with pytest.raises(ValueError, match="duplicate"):
            Dataset(np.ones((2, 2)), ("a", "a"))

    def test_rejects_name_length_mismatch(self):
        with pytest.raises(ValueError, match="feature_names"):
            Dataset(np.ones((2, 2)), ("a",))

    def test_rejects_label_length_mismatch(self):
        with pytest.raises(ValueError, match="label"):
            Dataset(np.ones((3, 2)), label=["x", "y"])

    def test_auto_names(self):
        ds = Dataset(np.ones((2, 3)))
        assert ds.feature_names == ("f0", "f1", "f2")
        assert ds.n_samples == 2 and ds.n_features == 3


class TestFitting:
    def test_rank_one_exact_recovery(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((1, 30))
        b = rng.standard_normal((6, 1))
        data = a.T @ np.array([[2.0]]) @ b.T + rng.standard_normal(6)
        enc = LinearEncoder(
            k_samples=1, k_features=1, max_sweeps=200, rel_tol=1e-14,
            ridge=0.0, seed=3,
        ).fit(Dataset(data, name="m"))
        rmse = np.sqrt(np.mean((enc.reconstruct("m") - data) ** 2))
        assert rmse < 1e-6

    def test_planted_rank_three_recovery(self):
        data = planted_bilinear(n=80, p=12, k=3, seed=7)
        enc = LinearEncoder(
            k_samples=3, k_features=3, max_sweeps=200, rel_tol=1e-15,
            ridge=0.0, seed=0,
        ).fit(Dataset(data))
        rmse = np.sqrt(np.mean((enc.reconstruct() - data) ** 2))
        assert rmse < 1e-6

    def test_loss_within_svd_envelope(self):
        """Converged residual lands within 5% of the best rank-k residual.

        The oracle is an independent SVD of the same centered, scaled
        matrix; the truncated SVD is also a hard lower bound.
        """
        rng = np.random.default_rng(4)
        data = rng.standard_normal((50, 8))
        enc = LinearEncoder(
            k_samples=3, k_features=3, max_sweeps=500, rel_tol=1e-11, seed=4
        ).fit(Dataset(data))
        mu = data.mean(axis=0)
        sd = data.std(axis=0)
        centered = (data - mu) / sd
        singular = np.linalg.svd(centered, compute_uv=False)
        svd_residual = float(np.sum(singular[3:] ** 2))
        assert enc.loss_trace_[-1] <= 1.05 * svd_residual
        assert enc.loss_trace_[-1] >= svd_residual * (1 - 1e-9)

    def test_loss_trace_monotone(self):
        for seed in range(5):
            rng = np.random.default_rng(100 + seed)
            data = rng.standard_normal((40, 9))
            enc = LinearEncoder(
                k_samples=3, k_features=3, max_sweeps=60, rel_tol=1e-12, seed=seed
            ).fit(Dataset(data))
            trace = np.asarray(enc.loss_trace_)
            assert np.all(trace[1:] <= trace[:-1] * (1 + 1e-9))

    def test_two_modalities_share_one_code(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((50, 8))
        y = rng.standard_normal((50, 4))
        enc = LinearEncoder(
            k_samples=3, k_features=2, max_sweeps=60, rel_tol=1e-12, seed=8
        ).fit([Dataset(x, name="x"), Dataset(y, name="y")])
        # one shared code object, and both reconstructions consume it
        assert enc.code_.shape == (3, 2)
        for name in ("x", "y"):
            trace = np.asarray(enc.loss_traces_[name])
            assert np.all(trace[1:] <= trace[:-1] * (1 + 1e-9))
        rec_x = enc.reconstruct("x")
        assert rec_x.shape == x.shape

    def test_misaligned_modalities_rejected(self):
        with pytest.raises(ValueError, match="same number of rows"):
            LinearEncoder().fit(
                [Dataset(np.ones((3, 2)), name="a"), Dataset(np.ones((4, 2)), name="b")]
            )

    def test_duplicate_modality_names_rejected(self):
        with pytest.raises(ValueError, match="unique"):
            LinearEncoder().fit(
                [Dataset(np.ones((3, 2)), name="a"), Dataset(np.ones((3, 2)), name="a")]
            )

    def test_config_errors(self):
        data = Dataset(np.random.default_rng(0).standard_normal((10, 4)))
        with pytest.raises(ValueError, match="k_samples"):
            LinearEncoder(k_samples=11, k_features=2).fit(data)
        with pytest.raises(ValueError, match="k_features"):
            LinearEncoder(k_samples=2, k_features=5).fit(data)
        with pytest.raises(ValueError, match="k_samples"):
            LinearEncoder(k_samples=0, k_features=2).fit(data)
        with pytest.raises(ValueError, match="rel_tol"):
            LinearEncoder(rel_tol=0.0).fit(data)

    def test_determinism(self):
        rng = np.random.default_rng(5)
        data = rng.standard_normal((30, 6))
        first = LinearEncoder(k_samples=2, k_features=2, max_sweeps=50, seed=9).fit(
            Dataset(data)
        )
        second = LinearEncoder(k_samples=2, k_features=2, max_sweeps=50, seed=9).fit(
            Dataset(data)
        )
        assert first.loss_trace_ == second.loss_trace_
        assert np.array_equal(first.code_, second.code_)
        assert np.array_equal(
            first.sample_loadings_["data"], second.sample_loadings_["data"]
        )

    def test_constant_column_keeps_scale_one(self):
        data = np.column_stack([np.ones(10), np.arange(10.0)])
        enc = LinearEncoder(k_samples=1, k_features=1, max_sweeps=20, seed=0).fit(
            Dataset(data)
        )
        assert enc.column_scale_["data"][0] == 1.0


class TestEncodeDecode:
    def test_training_data_is_a_fixed_point(self, small_fitted_encoder):
        enc, values = small_fitted_encoder
        latent = enc.transform(values, "m")
        assert np.max(np.abs(latent - enc.sample_loadings_["m"].T)) < 1e-8

    def test_all_mean_row_encodes_to_zero(self, small_fitted_encoder):
        enc, _ = small_fitted_encoder
        row = enc.intercept_["m"][None, :]
        assert np.linalg.norm(enc.transform(row, "m")) < 1e-12

    def test_heldout_row_round_trips_on_planted_data(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal((1, 50))
        b = rng.standard_normal((8, 1))
        core = np.array([[1.5]])
        data = a.T @ core @ b.T + 0.3
        holdout = rng.standard_normal((1, 1)).T @ core @ b.T + 0.3
        enc = LinearEncoder(
            k_samples=1, k_features=1, max_sweeps=200, rel_tol=1e-14,
            ridge=0.0, seed=2,
        ).fit(Dataset(data, name="m"))
        back = enc.inverse_transform(enc.transform(holdout, "m"), "m")
        assert np.max(np.abs(back - holdout)) < 1e-6

    def test_zeroed_loadings_reconstruct_the_intercept(self, small_fitted_encoder):
        enc, _ = small_fitted_encoder
        enc.sample_loadings_["m"] = np.zeros_like(enc.sample_loadings_["m"])
        expected = np.tile(enc.intercept_["m"], (40, 1))
        np.testing.assert_array_equal(enc.reconstruct("m"), expected)

    def test_feature_count_mismatch(self, small_fitted_encoder):
        enc, _ = small_fitted_encoder
        with pytest.raises(ValueError, match="columns"):
            enc.transform(np.ones((2, 5)), "m")

    def test_unknown_modality(self, small_fitted_encoder):
        enc, _ = small_fitted_encoder
        with pytest.raises(ValueError, match="unknown modality"):
            enc.reconstruct("nope")

    def test_unfitted_raises(self):
        with pytest.raises(NotFittedError):
            LinearEncoder().transform(np.ones((2, 2)))

    def test_latent_dimension_checked(self, small_fitted_encoder):
        enc, _ = small_fitted_encoder
        with pytest.raises(ValueError, match="k_samples"):
            enc.inverse_transform(np.ones((2, 5)), "m")
