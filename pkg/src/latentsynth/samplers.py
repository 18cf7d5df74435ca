"""Generative samplers over the latent sample space.

Two ways to learn a distribution over latent rows and draw new ones:

* :class:`LatentGaussianMixture` -- classic EM-fitted Gaussian mixture.
* :class:`GeometrySampler` -- per-centroid local Gaussians whose moments
  come from the K nearest latent rows, so draws follow the local shape
  of the point cloud rather than a global mixture.

Both samplers are deterministic given a seed and draw multivariate
normals through an eigendecomposition of the (regularized) covariance,
clipping negative eigenvalues to the regularization floor.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.special import logsumexp
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import as_float_matrix, check_nonnegative_real, check_positive_int, check_seed

__all__ = ["LatentGaussianMixture", "GeometrySampler"]

_LOG_2PI = float(np.log(2.0 * np.pi))


def _regularize_covariance(cov: np.ndarray, reg_floor: float) -> np.ndarray:
    """Symmetrize and add ``reg_floor * mean(diag)`` to the diagonal."""
    sym = 0.5 * (cov + cov.T)
    if reg_floor > 0:
        floor = reg_floor * float(np.mean(np.diag(sym)))
        if floor > 0:
            sym = sym.copy()
            sym.flat[:: sym.shape[0] + 1] += floor
    return sym


def _psd_factor(cov: np.ndarray, reg_floor: float) -> np.ndarray:
    """Factor F with F @ F.T == cov, clipping negative eigenvalues to the floor."""
    sym = 0.5 * (cov + cov.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    floor = max(reg_floor * float(np.mean(np.diag(sym))), 0.0)
    eigvals = np.where(eigvals < 0.0, floor, eigvals)
    return eigvecs * np.sqrt(eigvals)


def _gaussian_draws(rng, mean, factor, count):
    z = rng.standard_normal((count, mean.shape[0]))
    return mean + z @ factor.T


def _log_gaussian_columns(X, means, covariances):
    """Log density of every row of X under every component, via Cholesky."""
    n, k = X.shape
    out = np.empty((n, len(means)))
    for g, (mu, cov) in enumerate(zip(means, covariances)):
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"component {g} covariance is not positive definite and the "
                "regularization floor could not repair it"
            ) from exc
        solved = scipy.linalg.solve_triangular(
            chol, (X - mu).T, lower=True, check_finite=False
        )
        out[:, g] = (
            -0.5 * k * _LOG_2PI
            - np.sum(np.log(np.diag(chol)))
            - 0.5 * np.sum(solved * solved, axis=0)
        )
    return out


class LatentGaussianMixture(BaseEstimator):
    """Gaussian mixture over latent rows, fitted with EM.

    The E-step works in log space (log-sum-exp) and the M-step floors
    every covariance with ``reg_floor * mean(diag)`` on the diagonal. A
    component whose total responsibility collapses to zero is re-seeded
    at the point with the lowest current likelihood (this repair may
    transiently lower the log-likelihood).

    Attributes after ``fit``: ``weights_`` (G,), ``means_`` (G, k),
    ``covariances_`` (G, k, k), ``log_likelihood_trace_``.
    """

    kind = "gmm"

    def __init__(self, n_components=5, max_iters=200, tol=1e-6, reg_floor=1e-6, seed=0):
        self.n_components = n_components
        self.max_iters = max_iters
        self.tol = tol
        self.reg_floor = reg_floor
        self.seed = seed

    def fit(self, X, y=None):
        X = as_float_matrix(X, "latent")
        n, k = X.shape
        G = check_positive_int(self.n_components, "n_components")
        max_iters = check_positive_int(self.max_iters, "max_iters")
        tol = float(self.tol)
        if not tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        reg_floor = check_nonnegative_real(self.reg_floor, "reg_floor")
        seed = check_seed(self.seed)
        if G > n:
            raise ValueError(f"n_components={G} exceeds the {n} latent rows")

        rng = np.random.default_rng(seed)
        global_cov = _regularize_covariance(np.cov(X.T, bias=True).reshape(k, k), reg_floor)
        means = X[self._kmeanspp_indices(X, G, rng)].copy()
        covariances = np.repeat(global_cov[None, :, :], G, axis=0)
        weights = np.full(G, 1.0 / G)

        trace = []
        prev_ll = None
        for _ in range(max_iters):
            log_joint = np.log(weights) + _log_gaussian_columns(X, means, covariances)
            log_norm = logsumexp(log_joint, axis=1)
            ll = float(np.sum(log_norm))
            trace.append(ll)
            if prev_ll is not None:
                denom = max(abs(prev_ll), np.finfo(float).tiny)
                if abs(ll - prev_ll) / denom < tol:
                    break
            prev_ll = ll

            resp = np.exp(log_joint - log_norm[:, None])
            counts = resp.sum(axis=0)
            empty = counts < 1e-10
            if np.any(empty):
                worst = np.argsort(log_norm)  # lowest-likelihood points first
                for slot, g in enumerate(np.flatnonzero(empty)):
                    means[g] = X[worst[slot % n]]
                    covariances[g] = global_cov
                    weights[g] = 1.0 / n
                occupied = ~empty
                weights[occupied] = counts[occupied] / n
                weights = weights / weights.sum()
                continue
            weights = counts / n
            means = (resp.T @ X) / counts[:, None]
            for g in range(G):
                diff = X - means[g]
                cov = (resp[:, g, None] * diff).T @ diff / counts[g]
                covariances[g] = _regularize_covariance(cov, reg_floor)

        self.n_features_ = k
        self.weights_ = weights
        self.means_ = means
        self.covariances_ = covariances
        self.log_likelihood_trace_ = trace
        return self

    @staticmethod
    def _kmeanspp_indices(X, G, rng):
        n = X.shape[0]
        chosen = [int(rng.integers(n))]
        d2 = np.sum((X - X[chosen[0]]) ** 2, axis=1)
        for _ in range(1, G):
            total = d2.sum()
            if total > 0:
                idx = int(rng.choice(n, p=d2 / total))
            else:
                idx = int(rng.integers(n))
            chosen.append(idx)
            d2 = np.minimum(d2, np.sum((X - X[idx]) ** 2, axis=1))
        return np.asarray(chosen)

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError("this LatentGaussianMixture is not fitted yet")

    def sample(self, n_samples, seed=None) -> np.ndarray:
        """Draw latent rows: a component index from the weights, then a normal."""
        self._check_fitted()
        n_samples = check_positive_int(n_samples, "n_samples")
        seed = check_seed(self.seed if seed is None else seed)
        rng = np.random.default_rng(seed)
        G, k = self.means_.shape
        assignments = rng.choice(G, size=n_samples, p=self.weights_)
        z = rng.standard_normal((n_samples, k))
        out = np.empty((n_samples, k))
        reg_floor = check_nonnegative_real(self.reg_floor, "reg_floor")
        for g in range(G):
            mask = assignments == g
            if not np.any(mask):
                continue
            factor = _psd_factor(self.covariances_[g], reg_floor)
            out[mask] = self.means_[g] + z[mask] @ factor.T
        return out


class GeometrySampler(BaseEstimator):
    """Per-centroid local Gaussian sampler over latent rows.

    Centroids are a uniform random subset of the latent rows. For each
    centroid, the mean and covariance of its ``n_neighbors`` nearest rows
    (the centroid included, distance ties broken by row index) define a
    local Gaussian; sampling spreads the requested draws as evenly as
    possible across centroids and concatenates in centroid order.

    Defaults follow the data size: ``num_centroids = min(n, max(50, n // 2))``
    and ``n_neighbors = min(10, n)``.
    """

    kind = "geometry"

    def __init__(self, num_centroids=None, n_neighbors=None, reg_floor=1e-6, seed=0):
        self.num_centroids = num_centroids
        self.n_neighbors = n_neighbors
        self.reg_floor = reg_floor
        self.seed = seed

    def fit(self, X, y=None):
        X = as_float_matrix(X, "latent")
        n, k = X.shape
        if self.num_centroids is None:
            m = min(n, max(50, n // 2))
        else:
            m = check_positive_int(self.num_centroids, "num_centroids")
        if m > n:
            raise ValueError(f"num_centroids={m} exceeds the {n} latent rows")
        K = min(10, n) if self.n_neighbors is None else int(self.n_neighbors)
        if K < 2:
            raise ValueError(
                f"n_neighbors must be at least 2 to define a covariance, got {K}"
            )
        if K > n:
            raise ValueError(f"n_neighbors={K} exceeds the {n} latent rows")
        reg_floor = check_nonnegative_real(self.reg_floor, "reg_floor")
        seed = check_seed(self.seed)

        rng = np.random.default_rng(seed)
        indices = rng.choice(n, size=m, replace=False)
        local_means = np.empty((m, k))
        local_covs = np.empty((m, k, k))
        for i, c in enumerate(indices):
            dist = np.sum((X - X[c]) ** 2, axis=1)
            order = np.argsort(dist, kind="stable")
            neighborhood = X[order[:K]]
            eta = neighborhood.mean(axis=0)
            centered = neighborhood - eta
            local_means[i] = eta
            local_covs[i] = _regularize_covariance(centered.T @ centered / K, reg_floor)

        self.n_features_ = k
        self.centroid_indices_ = indices
        self.centroids_ = X[indices].copy()
        self.local_means_ = local_means
        self.local_covariances_ = local_covs
        self.n_neighbors_ = K
        self.num_centroids_ = m
        return self

    def _check_fitted(self):
        if not hasattr(self, "local_means_"):
            raise NotFittedError("this GeometrySampler is not fitted yet")

    def sample(self, n_samples, seed=None) -> np.ndarray:
        """Draw latent rows from the per-centroid Gaussians, split evenly.

        A remainder of ``n_samples % num_centroids`` goes to the first
        centroids in index order.
        """
        self._check_fitted()
        n_samples = check_positive_int(n_samples, "n_samples")
        seed = check_seed(self.seed if seed is None else seed)
        rng = np.random.default_rng(seed)
        m = self.num_centroids_
        base, rem = divmod(n_samples, m)
        reg_floor = check_nonnegative_real(self.reg_floor, "reg_floor")
        parts = []
        for i in range(m):
            count = base + (1 if i < rem else 0)
            if count == 0:
                continue
            factor = _psd_factor(self.local_covariances_[i], reg_floor)
            parts.append(_gaussian_draws(rng, self.local_means_[i], factor, count))
        return np.vstack(parts)
