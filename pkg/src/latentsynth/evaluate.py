"""Real-vs-synthetic regression comparison.

For each repeat the real data is split into train/test; one regressor is
trained on the real training rows, another on a synthetic training set
generated from them (fit encoder, sample latent rows, decode). Both
predict the same held-out real rows, and the paired per-repeat scores
are compared with an unequal-variance t-test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_fraction, check_positive_int, check_seed
from .encoding import Dataset, LinearEncoder
from .regression import DEFAULT_LAMBDA_GRID, CrossValidatedRidge
from .samplers import GeometrySampler, LatentGaussianMixture
from .seeding import derive_seed
from .stats import log10_p_two_sided, mad, pearson, welch_t_test

__all__ = ["SynthesisConfig", "EvalReport", "compare_real_vs_synthetic", "synthesize_matrix"]


@dataclass(frozen=True)
class SynthesisConfig:
    """How the synthetic training set is produced.

    ``sampler`` is one of ``gmm``, ``geometry`` or ``identity`` (the
    pass-through control: synthetic equals the real training rows).
    ``size_multiplier`` scales the synthetic row count relative to the
    real training rows.
    """

    sampler: str = "gmm"
    k_samples: int = 3
    k_features: int = 3
    max_sweeps: int = 200
    rel_tol: float = 1e-8
    ridge: float = 1e-8
    standardize: bool = True
    n_components: int = 5
    num_centroids: int = None
    n_neighbors: int = None
    size_multiplier: int = 10

    def __post_init__(self):
        if self.sampler not in ("gmm", "geometry", "identity"):
            raise ValueError(
                f"sampler must be gmm, geometry or identity, got {self.sampler!r}"
            )


@dataclass(frozen=True)
class EvalReport:
    """Paired per-repeat scores for one metric, with the test across repeats."""

    metric: str
    real_scores: np.ndarray
    synthetic_scores: np.ndarray
    t_statistic: float
    df: float
    p_value: float
    log10_p: float
    direction: str

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "real_scores": [float(v) for v in self.real_scores],
            "synthetic_scores": [float(v) for v in self.synthetic_scores],
            "t_statistic": self.t_statistic,
            "df": self.df,
            "p_value": self.p_value,
            "log10_p": self.log10_p,
            "direction": self.direction,
        }


def synthesize_matrix(train_values, config: SynthesisConfig, seed) -> np.ndarray:
    """Produce a synthetic stand-in for a training matrix.

    Fits the encoder on the rows, learns the configured sampler over the
    latent rows, draws ``size_multiplier`` times as many, and decodes.
    The ``identity`` sampler short-circuits to a copy of the input.
    """
    train_values = np.asarray(train_values, dtype=np.float64)
    if config.sampler == "identity":
        return train_values.copy()
    n = train_values.shape[0]
    encoder = LinearEncoder(
        k_samples=config.k_samples,
        k_features=config.k_features,
        max_sweeps=config.max_sweeps,
        rel_tol=config.rel_tol,
        ridge=config.ridge,
        standardize=config.standardize,
        seed=derive_seed(seed, "fit"),
    ).fit(Dataset(train_values, name="train"))
    latent = encoder.latent_rows("train")
    if config.sampler == "gmm":
        sampler = LatentGaussianMixture(
            n_components=min(config.n_components, n),
            seed=derive_seed(seed, "sampler"),
        ).fit(latent)
    else:
        sampler = GeometrySampler(
            num_centroids=config.num_centroids,
            n_neighbors=config.n_neighbors,
            seed=derive_seed(seed, "sampler"),
        ).fit(latent)
    draws = sampler.sample(
        config.size_multiplier * n, seed=derive_seed(seed, "draw")
    )
    return encoder.inverse_transform(draws, "train")


def split_indices(n, fraction, rng, labels=None):
    """Shuffled train/test index split, stratified by label when given."""
    if labels is None:
        perm = rng.permutation(n)
        cut = min(max(int(round(fraction * n)), 1), n - 1)
        return np.sort(perm[:cut]), np.sort(perm[cut:])
    train_parts, test_parts = [], []
    for cls in sorted(set(labels)):
        idx = np.flatnonzero(np.asarray(labels, dtype=object) == cls)
        perm = idx[rng.permutation(idx.size)]
        cut = min(max(int(round(fraction * idx.size)), 1), idx.size)
        train_parts.append(perm[:cut])
        test_parts.append(perm[cut:])
    train = np.sort(np.concatenate(train_parts))
    test = np.sort(np.concatenate(test_parts)) if any(
        p.size for p in test_parts
    ) else np.empty(0, dtype=int)
    if test.size == 0:
        raise ValueError("split produced an empty test set; lower split_fraction")
    return train, test


def _direction(real_mean, synth_mean, higher_is_better):
    if real_mean == synth_mean:
        return "tie"
    synth_wins = synth_mean > real_mean if higher_is_better else synth_mean < real_mean
    return "synthetic" if synth_wins else "real"


def compare_real_vs_synthetic(
    dataset: Dataset,
    target_column: str,
    config: SynthesisConfig = None,
    repeats: int = 20,
    split_fraction: float = 0.7,
    seed: int = 0,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    folds: int = 5,
    split_recorder=None,
) -> dict:
    """Run the paired regression protocol; returns reports keyed by metric.

    Per repeat: split, train the regressor on the real rows and on a
    synthetic set generated from them, score both against the same real
    test rows by mean absolute deviation and Pearson correlation, then
    compare the paired score vectors across repeats.
    ``split_recorder(repeat, train_idx, test_idx)`` is invoked per repeat
    when given (used to export splits for external regressors).
    """
    if config is None:
        config = SynthesisConfig()
    repeats = check_positive_int(repeats, "repeats", minimum=2)
    split_fraction = check_fraction(split_fraction, "split_fraction")
    seed = check_seed(seed)
    if target_column not in dataset.feature_names:
        raise ValueError(
            f"no column named {target_column!r} in dataset {dataset.name!r}"
        )
    target_idx = dataset.feature_names.index(target_column)
    feature_idx = [i for i in range(dataset.n_features) if i != target_idx]

    scores = {"mad": ([], []), "pearson": ([], [])}
    for r in range(repeats):
        repeat_seed = derive_seed(seed, f"repeat-{r}")
        rng = np.random.default_rng(derive_seed(repeat_seed, "split"))
        train_idx, test_idx = split_indices(
            dataset.n_samples, split_fraction, rng, dataset.label
        )
        if split_recorder is not None:
            split_recorder(r, train_idx, test_idx)
        train = dataset.values[train_idx]
        X_test = dataset.values[np.ix_(test_idx, feature_idx)]
        y_test = dataset.values[test_idx, target_idx]
        regressor_seed = derive_seed(repeat_seed, "regressor")

        real_model = CrossValidatedRidge(lambda_grid, folds, seed=regressor_seed).fit(
            train[:, feature_idx], train[:, target_idx]
        )
        real_pred = real_model.predict(X_test)

        synthetic = synthesize_matrix(train, config, derive_seed(repeat_seed, "synthesis"))
        synth_model = CrossValidatedRidge(lambda_grid, folds, seed=regressor_seed).fit(
            synthetic[:, feature_idx], synthetic[:, target_idx]
        )
        synth_pred = synth_model.predict(X_test)

        scores["mad"][0].append(mad(real_pred, y_test))
        scores["mad"][1].append(mad(synth_pred, y_test))
        scores["pearson"][0].append(pearson(real_pred, y_test))
        scores["pearson"][1].append(pearson(synth_pred, y_test))

    reports = {}
    for metric, higher_is_better in (("mad", False), ("pearson", True)):
        real = np.asarray(scores[metric][0])
        synth = np.asarray(scores[metric][1])
        result = welch_t_test(real, synth)
        reports[metric] = EvalReport(
            metric=metric,
            real_scores=real,
            synthetic_scores=synth,
            t_statistic=result.statistic,
            df=result.df,
            p_value=result.p_value,
            log10_p=log10_p_two_sided(result.statistic, result.df),
            direction=_direction(real.mean(), synth.mean(), higher_is_better),
        )
    return reports
