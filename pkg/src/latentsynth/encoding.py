"""Shared-code bilinear encoding of tabular datasets.

Each data matrix ``D`` (samples x features) is centered, optionally scaled
to unit column variance, and approximated as

    D  ~=  sample_loadings.T @ code @ feature_loadings.T

where ``sample_loadings`` (k_samples x n) holds per-sample latent
coordinates, ``feature_loadings`` (p x k_features) per-feature loadings,
and ``code`` is a small core matrix. When several row-aligned datasets
("modalities") are fitted together they share a single ``code``, which
couples their latent spaces.

Fitting is a coordinate descent: each sweep visits the modalities in
order and replaces each factor by the exact ridge least-squares solution
with the other two held fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._validation import (
    as_float_matrix,
    check_nonnegative_real,
    check_positive_int,
    check_seed,
)

__all__ = ["Dataset", "one_hot_dataset", "solve_ridge", "LinearEncoder"]


def solve_ridge(design: np.ndarray, target: np.ndarray, lam: float) -> np.ndarray:
    """Minimize ``||design @ X - target||_F^2 + lam * ||X||_F^2`` over X.

    Solved through a Cholesky factorization of the (ridge-augmented)
    normal matrix; no inverse is formed explicitly. A 1-D ``target`` is
    treated as a single column and returned 1-D.
    """
    design = as_float_matrix(design, "design")
    target_arr = np.asarray(target, dtype=np.float64)
    squeeze = target_arr.ndim == 1
    if squeeze:
        target_arr = target_arr[:, None]
    target_arr = as_float_matrix(target_arr, "target")
    if design.shape[0] != target_arr.shape[0]:
        raise ValueError(
            f"design has {design.shape[0]} rows but target has {target_arr.shape[0]}"
        )
    lam = check_nonnegative_real(lam, "lam")

    gram = design.T @ design
    if lam > 0:
        gram = gram.copy()
        gram.flat[:: gram.shape[0] + 1] += lam
    rhs = design.T @ target_arr
    singular = np.linalg.LinAlgError(
        "normal matrix is singular; pass a positive ridge (lam > 0)"
    )
    try:
        factor = scipy.linalg.cho_factor(gram, check_finite=False)
    except np.linalg.LinAlgError:
        raise singular from None
    if lam == 0.0:
        # rounding can let the factorization slip through on exactly
        # singular matrices; reject on a vanishing pivot
        pivots = np.abs(np.diag(factor[0])) ** 2
        tol = gram.shape[0] * np.finfo(float).eps * max(np.max(np.diag(gram)), 0.0)
        if np.min(pivots) <= tol:
            raise singular
    solution = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    return solution.ravel() if squeeze else solution


@dataclass(frozen=True, eq=False)
class Dataset:
    """A numeric sample-by-feature table with optional categorical labels.

    ``label_classes``/``label_columns`` describe a one-hot indicator block
    appended to ``values`` (see :func:`one_hot_dataset`); they let fitted
    models map decoded rows back to class labels.
    """

    values: np.ndarray
    feature_names: tuple = None
    name: str = "data"
    label: np.ndarray = None
    label_classes: tuple = None
    label_columns: tuple = None

    def __post_init__(self):
        values = as_float_matrix(self.values, "values")
        object.__setattr__(self, "values", values)
        n, p = values.shape
        if self.feature_names is None:
            names = tuple(f"f{i}" for i in range(p))
        else:
            names = tuple(str(f) for f in self.feature_names)
        if len(names) != p:
            raise ValueError(
                f"feature_names has {len(names)} entries for {p} columns"
            )
        if len(set(names)) != len(names):
            dupes = sorted({f for f in names if names.count(f) > 1})
            raise ValueError(f"duplicate feature names: {dupes}")
        object.__setattr__(self, "feature_names", names)
        if self.label is not None:
            label = np.asarray([str(v) for v in self.label], dtype=object)
            if label.shape[0] != n:
                raise ValueError(
                    f"label has {label.shape[0]} entries for {n} rows"
                )
            object.__setattr__(self, "label", label)
        if self.label_classes is not None:
            object.__setattr__(self, "label_classes", tuple(self.label_classes))
        if self.label_columns is not None:
            cols = tuple(int(c) for c in self.label_columns)
            if any(c < 0 or c >= p for c in cols):
                raise ValueError("label_columns out of range")
            object.__setattr__(self, "label_columns", cols)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


def one_hot_dataset(values, labels, feature_names=None, name="data", label_name="label"):
    """Build a :class:`Dataset` with class labels appended as one-hot columns.

    The indicator block participates in fitting like any other column, and
    its position is registered so synthetic rows can be labelled by argmax
    of the decoded indicators.
    """
    values = as_float_matrix(values, "values")
    n, p = values.shape
    labels = np.asarray([str(v) for v in labels], dtype=object)
    if labels.shape[0] != n:
        raise ValueError(f"labels has {labels.shape[0]} entries for {n} rows")
    classes = tuple(sorted(set(labels)))
    block = np.zeros((n, len(classes)))
    for j, cls in enumerate(classes):
        block[labels == cls, j] = 1.0
    if feature_names is None:
        feature_names = [f"f{i}" for i in range(p)]
    combined_names = list(feature_names) + [f"{label_name}={c}" for c in classes]
    return Dataset(
        np.hstack([values, block]),
        tuple(combined_names),
        name=name,
        label=labels,
        label_classes=classes,
        label_columns=tuple(range(p, p + len(classes))),
    )


def _as_dataset_list(X) -> list:
    if isinstance(X, Dataset):
        return [X]
    if isinstance(X, dict):
        return [
            v if isinstance(v, Dataset) else Dataset(v, name=str(k))
            for k, v in X.items()
        ]
    if isinstance(X, (list, tuple)) and X and all(
        isinstance(d, Dataset) for d in X
    ):
        return list(X)
    return [Dataset(X)]


class LinearEncoder(BaseEstimator, TransformerMixin):
    """Fit the shared-code bilinear factorization of one or more datasets.

    Parameters
    ----------
    k_samples : int
        Latent dimension of the sample space (rows of the loading matrix).
    k_features : int
        Latent dimension of the feature space.
    max_sweeps : int
        Maximum number of coordinate-descent sweeps.
    rel_tol : float
        Stop when the relative drop in total loss between sweeps falls
        below this threshold.
    ridge : float
        Relative ridge added to every least-squares solve, scaled by the
        mean diagonal of the solve's normal matrix.
    standardize : bool
        Divide centered columns by their standard deviation before
        fitting (constant columns keep scale 1).
    seed : int
        Seed for the factor initialization.

    Attributes (after ``fit``)
    --------------------------
    modalities_ : list of str
    sample_loadings_ : dict name -> (k_samples, n) array
    feature_loadings_ : dict name -> (p, k_features) array
    code_ : (k_samples, k_features) array shared by all modalities
    intercept_ : dict name -> (p,) column means
    column_scale_ : dict name -> (p,) standardization divisors
    loss_trace_ : list of per-sweep total squared Frobenius residuals
    loss_traces_ : dict name -> per-sweep per-modality residuals
    """

    def __init__(
        self,
        k_samples=2,
        k_features=2,
        max_sweeps=500,
        rel_tol=1e-8,
        ridge=1e-8,
        standardize=True,
        seed=0,
    ):
        self.k_samples = k_samples
        self.k_features = k_features
        self.max_sweeps = max_sweeps
        self.rel_tol = rel_tol
        self.ridge = ridge
        self.standardize = standardize
        self.seed = seed

    # ------------------------------------------------------------------
    # fitting
    # ------------------------------------------------------------------
    def fit(self, X, y=None):
        datasets = _as_dataset_list(X)
        if not datasets:
            raise ValueError("at least one dataset is required")
        names = [ds.name for ds in datasets]
        if len(set(names)) != len(names):
            raise ValueError(f"modality names must be unique, got {names}")
        n = datasets[0].n_samples
        if any(ds.n_samples != n for ds in datasets):
            raise ValueError(
                "all modalities must share the same number of rows (aligned samples)"
            )

        k_s = check_positive_int(self.k_samples, "k_samples")
        k_f = check_positive_int(self.k_features, "k_features")
        max_sweeps = check_positive_int(self.max_sweeps, "max_sweeps")
        rel_tol = float(self.rel_tol)
        if not rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        check_nonnegative_real(self.ridge, "ridge")
        seed = check_seed(self.seed)
        if k_s > n:
            raise ValueError(f"k_samples={k_s} exceeds the {n} available samples")
        for ds in datasets:
            if k_f > ds.n_features:
                raise ValueError(
                    f"k_features={k_f} exceeds the {ds.n_features} features "
                    f"of modality {ds.name!r}"
                )

        intercept, scale, centered = {}, {}, {}
        for ds in datasets:
            mu = ds.values.mean(axis=0)
            if self.standardize:
                sd = ds.values.std(axis=0)
                sd = np.where(sd == 0.0, 1.0, sd)
            else:
                sd = np.ones(ds.n_features)
            intercept[ds.name] = mu
            scale[ds.name] = sd
            centered[ds.name] = (ds.values - mu) / sd

        rng = np.random.default_rng(seed)
        alpha = {ds.name: rng.standard_normal((k_s, n)) for ds in datasets}
        beta = {
            ds.name: rng.standard_normal((ds.n_features, k_f)) for ds in datasets
        }
        code = None
        for name in names:
            code = self._code_update(alpha[name], beta[name], centered[name])

        loss_traces = {name: [] for name in names}
        loss_trace = []
        prev_total = None
        for _ in range(max_sweeps):
            for name in names:
                D = centered[name]
                M = code @ beta[name].T
                alpha[name] = solve_ridge(M.T, D.T, self._lam(M.T))
                N = alpha[name].T @ code
                beta[name] = solve_ridge(N, D, self._lam(N)).T
                code = self._code_update(alpha[name], beta[name], D)
            total = 0.0
            for name in names:
                res = centered[name] - alpha[name].T @ code @ beta[name].T
                value = float(np.sum(res * res))
                loss_traces[name].append(value)
                total += value
            loss_trace.append(total)
            if prev_total is not None:
                denom = max(prev_total, np.finfo(float).tiny)
                if abs(prev_total - total) / denom < rel_tol:
                    break
            prev_total = total

        # refresh sample loadings against the final code/feature loadings so
        # encoding the training data reproduces them solver-exactly
        for name in names:
            M = code @ beta[name].T
            alpha[name] = solve_ridge(M.T, centered[name].T, self._lam(M.T))

        self.modalities_ = names
        self.n_samples_ = n
        self.sample_loadings_ = alpha
        self.feature_loadings_ = beta
        self.code_ = code
        self.intercept_ = intercept
        self.column_scale_ = scale
        self.feature_names_ = {ds.name: list(ds.feature_names) for ds in datasets}
        self.label_info_ = {
            ds.name: (
                {"classes": list(ds.label_classes), "columns": list(ds.label_columns)}
                if ds.label_classes is not None and ds.label_columns is not None
                else None
            )
            for ds in datasets
        }
        self.loss_trace_ = loss_trace
        self.loss_traces_ = loss_traces
        return self

    def _lam(self, design: np.ndarray) -> float:
        """Ridge for one solve: ``ridge`` times the mean diagonal of the normal matrix."""
        ridge = float(self.ridge)
        if ridge == 0.0:
            return 0.0
        return ridge * float(np.sum(design * design)) / design.shape[1]

    def _code_update(self, alpha, beta, D):
        # exact least-squares core given both loadings:
        # (alpha alpha^T)^-1 alpha D beta (beta^T beta)^-1, ridge-stabilized
        left = solve_ridge(alpha.T, D, self._lam(alpha.T))
        return solve_ridge(beta, left.T, self._lam(beta)).T

    # ------------------------------------------------------------------
    # fitted-model operations
    # ------------------------------------------------------------------
    def _check_fitted(self):
        if not hasattr(self, "code_"):
            raise NotFittedError(
                "this LinearEncoder instance is not fitted yet; call fit first"
            )

    def _resolve_modality(self, modality) -> str:
        self._check_fitted()
        if modality is None:
            if len(self.modalities_) == 1:
                return self.modalities_[0]
            raise ValueError(
                f"several modalities are fitted ({self.modalities_}); pass one explicitly"
            )
        if modality not in self.modalities_:
            raise ValueError(
                f"unknown modality {modality!r}; fitted modalities are {self.modalities_}"
            )
        return modality

    def latent_rows(self, modality=None) -> np.ndarray:
        """Per-sample latent coordinates: rows of the transposed sample loadings."""
        name = self._resolve_modality(modality)
        return self.sample_loadings_[name].T.copy()

    def transform(self, X, modality=None) -> np.ndarray:
        """Encode new rows into the latent sample space of one modality.

        Solves the same ridge least-squares problem as the sample-loading
        update, with the code and feature loadings frozen; encoding the
        training data returns the fitted loadings.
        """
        name = self._resolve_modality(modality)
        arr = as_float_matrix(X, "X")
        p = len(self.feature_names_[name])
        if arr.shape[1] != p:
            raise ValueError(
                f"X has {arr.shape[1]} columns but modality {name!r} has {p} features"
            )
        D = (arr - self.intercept_[name]) / self.column_scale_[name]
        M = self.code_ @ self.feature_loadings_[name].T
        return solve_ridge(M.T, D.T, self._lam(M.T)).T

    def decode_latent(self, latent, modality=None, centered=False) -> np.ndarray:
        """Map latent rows through the code and feature loadings to data space.

        With ``centered=True`` the result stays in centered/scaled units
        (no intercept shift, no un-scaling).
        """
        name = self._resolve_modality(modality)
        latent = as_float_matrix(latent, "latent")
        k_s = self.code_.shape[0]
        if latent.shape[1] != k_s:
            raise ValueError(
                f"latent has {latent.shape[1]} columns, expected k_samples={k_s}"
            )
        out = latent @ self.code_ @ self.feature_loadings_[name].T
        if centered:
            return out
        return out * self.column_scale_[name] + self.intercept_[name]

    def inverse_transform(self, latent, modality=None) -> np.ndarray:
        """Decode latent rows back to original data units."""
        return self.decode_latent(latent, modality, centered=False)

    def reconstruct(self, modality=None) -> np.ndarray:
        """The model's fitted values for one modality, in original units."""
        name = self._resolve_modality(modality)
        return self.decode_latent(self.sample_loadings_[name].T, name)
