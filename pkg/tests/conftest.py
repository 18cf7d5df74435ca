"""Shared data factories for the test suite."""

import numpy as np
import pytest

from latentsynth import Dataset, LinearEncoder, one_hot_dataset


def planted_bilinear(n=80, p=12, k=3, seed=7, intercept=True):
    """Data generated exactly by the model class: loadings^T core loadings^T + shift."""
    rng = np.random.default_rng(seed)
    alpha = rng.standard_normal((k, n))
    core = rng.standard_normal((k, k))
    beta = rng.standard_normal((p, k))
    shift = rng.standard_normal(p) if intercept else np.zeros(p)
    return alpha.T @ core @ beta.T + shift


def planted_imbalanced(seed=0, n=300, minority=0.1):
    """Two-class table where the minority class shifts features and the target."""
    rng = np.random.default_rng(seed)
    n_b = int(round(minority * n))
    labels = np.array(["A"] * (n - n_b) + ["B"] * n_b, dtype=object)
    rng.shuffle(labels)
    is_b = (labels == "B").astype(float)
    x = rng.standard_normal((n, 5))
    x[:, 0] += 2.0 * is_b
    x[:, 1] += 2.0 * is_b
    y = 1.5 * x[:, 0] - 1.0 * x[:, 1] + 0.5 * x[:, 2] + 3.0 * is_b
    y += 0.1 * rng.standard_normal(n)
    return x, y, labels


def planted_groups(seed, n=60, p=50, shifted=10, shift=2.0):
    """Two Gaussian 'tissue' groups, the second shifted on a block of features."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, p))
    b = rng.standard_normal((n, p))
    b[:, :shifted] += shift
    return a, b


@pytest.fixture
def small_fitted_encoder():
    rng = np.random.default_rng(3)
    values = rng.standard_normal((40, 7))
    encoder = LinearEncoder(
        k_samples=3, k_features=3, max_sweeps=100, seed=1
    ).fit(Dataset(values, name="m"))
    return encoder, values


@pytest.fixture
def labelled_dataset():
    x, y, labels = planted_imbalanced(seed=5, n=200)
    values = np.hstack([x, y[:, None]])
    names = ["f0", "f1", "f2", "f3", "f4", "y"]
    return one_hot_dataset(values, labels, feature_names=names, name="train", label_name="cls")
