"""CSV ingestion and JSON model persistence."""

import json

import numpy as np
import pytest

from latentsynth import (
    Dataset,
    GeometrySampler,
    LatentGaussianMixture,
    LinearEncoder,
    load_csv,
    load_model,
    save_model,
)
from latentsynth.io import model_document, write_matrix_csv


class TestLoadCsv:
    def test_basic_table(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n1,2\n3,4\n5,6\n")
        ds = load_csv(path)
        assert ds.values.shape == (3, 2)
        assert ds.feature_names == ("a", "b")
        assert ds.name == "t"
        np.testing.assert_array_equal(ds.values[:, 0], [1.0, 3.0, 5.0])

    def test_label_column_one_hot(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n1,x\n3,y\n5,x\n")
        ds = load_csv(path, label_column="b")
        assert ds.values.shape == (3, 3)  # 1 numeric + one-hot width 2
        assert ds.feature_names == ("a", "b=x", "b=y")
        assert ds.label_columns == (1, 2)
        assert ds.label_classes == ("x", "y")
        np.testing.assert_array_equal(ds.values[:, 1], [1.0, 0.0, 1.0])

    def test_unparseable_cell_names_coordinates(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n1,foo\n3,4\n")
        with pytest.raises(ValueError, match=r"row 2, column 'b'.*'foo'"):
            load_csv(path)

    def test_nan_cell_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n1,nan\n")
        with pytest.raises(ValueError, match=r"row 2, column 'b'"):
            load_csv(path)

    def test_duplicate_headers(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,a\n1,2\n")
        with pytest.raises(ValueError, match="duplicate"):
            load_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "absent.csv")

    def test_missing_label_column(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError, match="no column named 'c'"):
            load_csv(path, label_column="c")

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n1,2\n3\n")
        with pytest.raises(ValueError, match="row 3"):
            load_csv(path)

    def test_comment_lines_skipped(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("# provenance: gmm,1,abc\n# config: {}\na,b\n1,2\n")
        ds = load_csv(path)
        assert ds.values.shape == (1, 2)

    def test_no_data_rows(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n")
        with pytest.raises(ValueError, match="no data rows"):
            load_csv(path)


class TestWriteCsv:
    def test_round_trip_is_lossless(self, tmp_path):
        rng = np.random.default_rng(0)
        matrix = rng.standard_normal((7, 3))
        path = tmp_path / "out.csv"
        write_matrix_csv(path, ["a", "b", "c"], matrix, comments=["# provenance: x,1,h"])
        back = load_csv(path)
        np.testing.assert_array_equal(back.values, matrix)

    def test_label_column_written(self, tmp_path):
        path = tmp_path / "out.csv"
        write_matrix_csv(path, ["a"], np.ones((2, 1)), labels=["u", "v"])
        text = path.read_text().splitlines()
        assert text[0] == "a,label"
        assert text[1].endswith(",u") and text[2].endswith(",v")


def small_model(seed=0):
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((25, 5))
    return LinearEncoder(k_samples=2, k_features=2, max_sweeps=40, seed=seed).fit(
        Dataset(data, name="m")
    ), data


class TestModelPersistence:
    def test_round_trip_bit_exact(self, tmp_path):
        model, _ = small_model()
        path = tmp_path / "model.json"
        save_model(path, model)
        loaded, sampler = load_model(path)
        assert sampler is None
        assert np.array_equal(loaded.code_, model.code_)
        assert np.array_equal(loaded.sample_loadings_["m"], model.sample_loadings_["m"])
        assert np.array_equal(loaded.feature_loadings_["m"], model.feature_loadings_["m"])
        assert np.array_equal(loaded.intercept_["m"], model.intercept_["m"])
        assert np.array_equal(loaded.column_scale_["m"], model.column_scale_["m"])
        assert loaded.loss_trace_ == model.loss_trace_
        # zero-ulp reconstruction agreement
        assert np.array_equal(loaded.reconstruct("m"), model.reconstruct("m"))

    def test_gmm_sampler_round_trip(self, tmp_path):
        model, _ = small_model(1)
        sampler = LatentGaussianMixture(n_components=2, seed=3).fit(model.latent_rows("m"))
        path = tmp_path / "model.json"
        save_model(path, model, sampler)
        _, loaded = load_model(path)
        assert loaded.kind == "gmm"
        np.testing.assert_array_equal(loaded.weights_, sampler.weights_)
        np.testing.assert_array_equal(loaded.means_, sampler.means_)
        np.testing.assert_array_equal(loaded.covariances_, sampler.covariances_)
        np.testing.assert_array_equal(loaded.sample(9, seed=5), sampler.sample(9, seed=5))

    def test_geometry_sampler_round_trip(self, tmp_path):
        model, _ = small_model(2)
        sampler = GeometrySampler(num_centroids=8, n_neighbors=4, seed=3).fit(
            model.latent_rows("m")
        )
        path = tmp_path / "model.json"
        save_model(path, model, sampler)
        _, loaded = load_model(path)
        assert loaded.kind == "geometry"
        np.testing.assert_array_equal(loaded.local_means_, sampler.local_means_)
        np.testing.assert_array_equal(loaded.sample(9, seed=5), sampler.sample(9, seed=5))

    def test_truncated_file_fails_cleanly(self, tmp_path):
        model, _ = small_model(3)
        path = tmp_path / "model.json"
        save_model(path, model)
        text = path.read_text()
        path.write_text(text[: len(text) // 2])
        with pytest.raises(ValueError, match="not a valid model document"):
            load_model(path)

    def test_tampered_file_detected(self, tmp_path):
        model, _ = small_model(4)
        path = tmp_path / "model.json"
        save_model(path, model)
        doc = json.loads(path.read_text())
        doc["loss_trace"][0] += 1.0
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError, match="hash mismatch"):
            load_model(path)

    def test_version_mismatch_detected(self, tmp_path):
        model, _ = small_model(5)
        path = tmp_path / "model.json"
        save_model(path, model)
        doc = json.loads(path.read_text())
        doc["format_version"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError, match="format version"):
            load_model(path)

    def test_not_json_at_all(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("definitely not json")
        with pytest.raises(ValueError, match="not a valid model document"):
            load_model(path)


class TestSchema:
    def test_minimal_model_document_schema(self):
        """Golden-schema check on a hand-built minimal model (k=1, 2x2 data)."""
        model = LinearEncoder(k_samples=1, k_features=1, max_sweeps=5, seed=0).fit(
            Dataset(np.array([[1.0, 2.0], [3.0, 5.0]]), name="tiny")
        )
        doc = model_document(model)
        assert set(doc) == {
            "format_version", "config", "n_samples", "code",
            "loss_trace", "modalities", "sampler", "run",
        }
        assert doc["format_version"] == 1
        assert set(doc["config"]) == {
            "k_samples", "k_features", "max_sweeps", "rel_tol",
            "ridge", "standardize", "seed",
        }
        assert doc["n_samples"] == 2
        assert doc["code"]["dims"] == [1, 1]
        (entry,) = doc["modalities"]
        assert set(entry) == {
            "name", "alpha", "beta", "intercept", "column_scale",
            "feature_names", "label", "loss_trace",
        }
        assert entry["alpha"]["dims"] == [1, 2]
        assert entry["beta"]["dims"] == [2, 1]
        assert entry["intercept"]["dims"] == [2]
        assert entry["column_scale"]["dims"] == [2]
        assert entry["label"] is None
        assert doc["sampler"] is None
