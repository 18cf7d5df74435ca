"""Turn latent draws into labelled, balanced synthetic tables.

A :class:`SyntheticBatch` couples latent rows with their decoded
data-space matrices and provenance (sampler kind, seed, source model
hash). Decoding is the deterministic linear map of the fitted model, so
a batch is a pure function of the latent rows.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._validation import check_positive_int, check_seed
from .io import model_content_hash

__all__ = ["Provenance", "SyntheticBatch", "synthesize", "assign_labels", "balance_classes"]


@dataclass(frozen=True, eq=False)
class Provenance:
    sampler: str
    seed: int
    model_hash: str

    def as_comment(self) -> str:
        return f"# provenance: {self.sampler},{self.seed},{self.model_hash}"


@dataclass(frozen=True, eq=False)
class SyntheticBatch:
    latent: np.ndarray
    decoded: dict
    provenance: Provenance
    labels: np.ndarray = None

    def __post_init__(self):
        n = self.latent.shape[0]
        for name, matrix in self.decoded.items():
            if matrix.shape[0] != n:
                raise ValueError(
                    f"decoded modality {name!r} has {matrix.shape[0]} rows "
                    f"for {n} latent rows"
                )
        if self.labels is not None and len(self.labels) != n:
            raise ValueError(f"labels has {len(self.labels)} entries for {n} rows")

    @property
    def n_rows(self) -> int:
        return self.latent.shape[0]


def synthesize(model, sampler, count, seed=None) -> SyntheticBatch:
    """Draw ``count`` latent rows and decode them through every modality.

    Provenance cites the model's persisted document hash when it was
    saved or loaded, falling back to a hash of the bare model.
    """
    count = check_positive_int(count, "count")
    used_seed = sampler.seed if seed is None else seed
    latent = sampler.sample(count, seed=used_seed)
    decoded = {
        name: model.inverse_transform(latent, name) for name in model.modalities_
    }
    provenance = Provenance(
        sampler=getattr(sampler, "kind", type(sampler).__name__),
        seed=int(used_seed),
        model_hash=getattr(model, "document_hash_", None) or model_content_hash(model),
    )
    return SyntheticBatch(latent=latent, decoded=decoded, provenance=provenance)


def assign_labels(batch: SyntheticBatch, model, label_modality=None) -> SyntheticBatch:
    """Label each row by the argmax of its decoded one-hot indicator block.

    Ties resolve to the lowest class index. The model must have been
    fitted with the label one-hot encoded in ``label_modality`` (see
    :func:`latentsynth.encoding.one_hot_dataset`).
    """
    if label_modality is None:
        candidates = [
            name for name in model.modalities_ if model.label_info_.get(name)
        ]
        if not candidates:
            raise ValueError("no modality has registered one-hot label columns")
        if len(candidates) > 1:
            raise ValueError(
                f"several modalities carry labels ({candidates}); pass label_modality"
            )
        label_modality = candidates[0]
    info = model.label_info_.get(label_modality)
    if not info:
        raise ValueError(
            f"modality {label_modality!r} has no registered one-hot label columns"
        )
    block = batch.decoded[label_modality][:, info["columns"]]
    classes = np.asarray(info["classes"], dtype=object)
    labels = classes[np.argmax(block, axis=1)]
    return replace(batch, labels=labels)


def balance_classes(batch: SyntheticBatch, per_class, seed=0) -> SyntheticBatch:
    """Subset the batch to exactly ``per_class`` rows of every present class.

    Rows are drawn uniformly without replacement; a class with fewer than
    ``per_class`` rows raises, naming the class and its count (generate a
    larger batch and retry).
    """
    per_class = check_positive_int(per_class, "per_class")
    seed = check_seed(seed)
    if batch.labels is None:
        raise ValueError("batch has no labels; run assign_labels first")
    rng = np.random.default_rng(seed)
    selected = []
    for cls in sorted(set(batch.labels)):
        idx = np.flatnonzero(batch.labels == cls)
        if idx.size < per_class:
            raise ValueError(
                f"class {cls!r} has only {idx.size} rows, need {per_class}"
            )
        chosen = rng.choice(idx, size=per_class, replace=False)
        selected.append(np.sort(chosen))
    order = np.concatenate(selected)
    return replace(
        batch,
        latent=batch.latent[order],
        decoded={name: m[order] for name, m in batch.decoded.items()},
        labels=batch.labels[order],
    )
