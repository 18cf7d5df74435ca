"""latentsynth: shared-code encoding, latent sampling, and fidelity evaluation.

Fit a bilinear factorization with a code shared across row-aligned
datasets, learn a generative distribution over the latent sample space
(Gaussian mixture or geometry-based local Gaussians), decode new latent
rows into statistically faithful synthetic tables, and evaluate them
against the real data with paired regression and differential-feature
protocols.
"""

from .encoding import Dataset, LinearEncoder, one_hot_dataset, solve_ridge
from .evaluate import EvalReport, SynthesisConfig, compare_real_vs_synthetic, synthesize_matrix
from .generate import Provenance, SyntheticBatch, assign_labels, balance_classes, synthesize
from .io import load_csv, load_model, model_content_hash, save_model
from .regression import CrossValidatedRidge
from .samplers import GeometrySampler, LatentGaussianMixture
from .seeding import derive_seed
from .stats import (
    DiffTestResult,
    TTestResult,
    diff_feature_test,
    difftest_similarity,
    log10_p_two_sided,
    mad,
    pearson,
    welch_t_test,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "LinearEncoder",
    "one_hot_dataset",
    "solve_ridge",
    "LatentGaussianMixture",
    "GeometrySampler",
    "Provenance",
    "SyntheticBatch",
    "synthesize",
    "assign_labels",
    "balance_classes",
    "mad",
    "pearson",
    "welch_t_test",
    "TTestResult",
    "log10_p_two_sided",
    "diff_feature_test",
    "DiffTestResult",
    "difftest_similarity",
    "CrossValidatedRidge",
    "SynthesisConfig",
    "EvalReport",
    "compare_real_vs_synthetic",
    "synthesize_matrix",
    "load_csv",
    "save_model",
    "load_model",
    "model_content_hash",
    "derive_seed",
    "__version__",
]
