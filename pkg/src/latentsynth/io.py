"""Data ingestion and model persistence.

CSV dialect: comma-delimited, UTF-8, header row required, ``.`` decimal,
lines starting with ``#`` are comments. Every ingestion failure names
the exact offending cell; nothing is coerced silently.

Models (and an optionally attached sampler) persist as a single JSON
document with row-major arrays and explicit dims. JSON floats use
Python's shortest round-trip representation, so matrices reload
bit-exactly. The document carries a format version and a content hash
over everything except the hash itself.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .encoding import Dataset, LinearEncoder, one_hot_dataset
from .samplers import GeometrySampler, LatentGaussianMixture

__all__ = [
    "load_csv",
    "read_csv_header",
    "write_matrix_csv",
    "write_json",
    "save_model",
    "load_model",
    "model_document",
    "model_content_hash",
]

FORMAT_VERSION = 1


# ----------------------------------------------------------------------
# CSV
# ----------------------------------------------------------------------
def _read_rows(path):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such file: {path}")
    rows = []
    with p.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (row[0].startswith("#")):
                continue
            rows.append((lineno, row))
    if not rows:
        raise ValueError(f"{path}: empty file (a header row is required)")
    return rows


def read_csv_header(path) -> list:
    """Column names of a CSV file (comments skipped)."""
    _, header = _read_rows(path)[0]
    return [h.strip() for h in header]


def load_csv(path, label_column=None, name=None) -> Dataset:
    """Parse a CSV file into a :class:`Dataset`.

    All columns except ``label_column`` must parse as finite numbers; the
    label column, when given, is extracted as categorical and appended as
    one-hot indicator columns.
    """
    rows = _read_rows(path)
    header_line, header = rows[0]
    header = [h.strip() for h in header]
    seen = set()
    dupes = sorted({h for h in header if h in seen or seen.add(h)})
    if dupes:
        raise ValueError(f"{path}: duplicate header names: {dupes}")

    label_idx = None
    if label_column is not None:
        if label_column not in header:
            raise ValueError(f"{path}: no column named {label_column!r}")
        label_idx = header.index(label_column)
    numeric_idx = [i for i in range(len(header)) if i != label_idx]

    data = []
    labels = []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ValueError(
                f"{path}: row {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        values = []
        for i in numeric_idx:
            cell = row[i].strip()
            try:
                value = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: row {lineno}, column {header[i]!r}: "
                    f"cannot parse {cell!r} as a number"
                ) from None
            if not math.isfinite(value):
                raise ValueError(
                    f"{path}: row {lineno}, column {header[i]!r}: "
                    f"non-finite value {cell!r}"
                )
            values.append(value)
        data.append(values)
        if label_idx is not None:
            labels.append(row[label_idx].strip())
    if not data:
        raise ValueError(f"{path}: no data rows")

    matrix = np.asarray(data, dtype=np.float64)
    names = [header[i] for i in numeric_idx]
    ds_name = name if name is not None else Path(path).stem
    if label_idx is not None:
        return one_hot_dataset(
            matrix, labels, feature_names=names, name=ds_name, label_name=label_column
        )
    return Dataset(matrix, tuple(names), name=ds_name)


def write_matrix_csv(path, feature_names, matrix, labels=None, label_name="label", comments=()):
    """Write a matrix as CSV with optional label column and ``#`` comment lines."""
    matrix = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in comments:
            fh.write(line.rstrip("\n") + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        header = list(feature_names) + ([label_name] if labels is not None else [])
        writer.writerow(header)
        for i in range(matrix.shape[0]):
            row = [repr(float(v)) for v in matrix[i]]
            if labels is not None:
                row.append(str(labels[i]))
            writer.writerow(row)


def write_json(path, payload):
    """Write a JSON artifact with deterministic key order."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


# ----------------------------------------------------------------------
# model persistence
# ----------------------------------------------------------------------
def _encode_array(arr) -> dict:
    arr = np.asarray(arr, dtype=np.float64)
    return {"dims": list(arr.shape), "data": [float(v) for v in arr.ravel()]}


def _decode_array(doc, field) -> np.ndarray:
    entry = doc[field]
    dims = tuple(int(d) for d in entry["dims"])
    data = np.asarray(entry["data"], dtype=np.float64)
    if data.size != int(np.prod(dims)):
        raise ValueError(f"model document field {field!r} has inconsistent dims")
    return data.reshape(dims)


def _sampler_document(sampler) -> dict:
    if isinstance(sampler, LatentGaussianMixture):
        return {
            "kind": "gmm",
            "params": sampler.get_params(),
            "weights": _encode_array(sampler.weights_),
            "means": _encode_array(sampler.means_),
            "covariances": _encode_array(sampler.covariances_),
            "log_likelihood_trace": [float(v) for v in sampler.log_likelihood_trace_],
        }
    if isinstance(sampler, GeometrySampler):
        return {
            "kind": "geometry",
            "params": sampler.get_params(),
            "centroid_indices": [int(i) for i in sampler.centroid_indices_],
            "centroids": _encode_array(sampler.centroids_),
            "local_means": _encode_array(sampler.local_means_),
            "local_covariances": _encode_array(sampler.local_covariances_),
            "n_neighbors": int(sampler.n_neighbors_),
        }
    raise ValueError(f"cannot serialize sampler of type {type(sampler).__name__}")


def _sampler_from_document(doc):
    if doc["kind"] == "gmm":
        sampler = LatentGaussianMixture(**doc["params"])
        sampler.weights_ = _decode_array(doc, "weights")
        sampler.means_ = _decode_array(doc, "means")
        sampler.covariances_ = _decode_array(doc, "covariances")
        sampler.log_likelihood_trace_ = list(doc["log_likelihood_trace"])
        sampler.n_features_ = sampler.means_.shape[1]
        return sampler
    if doc["kind"] == "geometry":
        sampler = GeometrySampler(**doc["params"])
        sampler.centroid_indices_ = np.asarray(doc["centroid_indices"], dtype=int)
        sampler.centroids_ = _decode_array(doc, "centroids")
        sampler.local_means_ = _decode_array(doc, "local_means")
        sampler.local_covariances_ = _decode_array(doc, "local_covariances")
        sampler.n_neighbors_ = int(doc["n_neighbors"])
        sampler.num_centroids_ = sampler.local_means_.shape[0]
        sampler.n_features_ = sampler.local_means_.shape[1]
        return sampler
    raise ValueError(f"unknown sampler kind {doc['kind']!r}")


def model_document(model: LinearEncoder, sampler=None, run=None) -> dict:
    """The persistable JSON document for a fitted model (without hash)."""
    modalities = []
    for name in model.modalities_:
        modalities.append(
            {
                "name": name,
                "alpha": _encode_array(model.sample_loadings_[name]),
                "beta": _encode_array(model.feature_loadings_[name]),
                "intercept": _encode_array(model.intercept_[name]),
                "column_scale": _encode_array(model.column_scale_[name]),
                "feature_names": list(model.feature_names_[name]),
                "label": model.label_info_[name],
                "loss_trace": [float(v) for v in model.loss_traces_[name]],
            }
        )
    return {
        "format_version": FORMAT_VERSION,
        "config": model.get_params(),
        "n_samples": int(model.n_samples_),
        "code": _encode_array(model.code_),
        "loss_trace": [float(v) for v in model.loss_trace_],
        "modalities": modalities,
        "sampler": None if sampler is None else _sampler_document(sampler),
        "run": run,
    }


def _hash_document(doc: dict) -> str:
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def model_content_hash(model: LinearEncoder, sampler=None) -> str:
    """Content hash of the model document, as used in provenance."""
    return _hash_document(model_document(model, sampler))


def save_model(path, model: LinearEncoder, sampler=None, run=None) -> str:
    """Persist model (+ optional sampler) to JSON; returns the content hash.

    The hash is also cached on the model (``document_hash_``) so synthetic
    batches can cite the persisted document in their provenance.
    """
    doc = model_document(model, sampler, run)
    doc["content_hash"] = _hash_document(doc)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    model.document_hash_ = doc["content_hash"]
    return doc["content_hash"]


def load_model(path):
    """Load a model document; returns ``(model, sampler_or_None)``.

    Verifies the format version and the content hash before any object is
    constructed, so a truncated or tampered file never yields a partial
    model.
    """
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such file: {path}")
    text = p.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not a valid model document: {exc}") from None
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise ValueError(f"{path}: not a model document (missing format_version)")
    if doc["format_version"] != FORMAT_VERSION:
        raise ValueError(
            f"{path}: unsupported format version {doc['format_version']!r} "
            f"(expected {FORMAT_VERSION})"
        )
    stored_hash = doc.pop("content_hash", None)
    if stored_hash is None:
        raise ValueError(f"{path}: model document has no content hash")
    actual = _hash_document(doc)
    if actual != stored_hash:
        raise ValueError(
            f"{path}: content hash mismatch (document tampered or corrupted)"
        )

    model = LinearEncoder(**doc["config"])
    model.n_samples_ = int(doc["n_samples"])
    model.code_ = _decode_array(doc, "code")
    model.loss_trace_ = list(doc["loss_trace"])
    model.modalities_ = []
    model.sample_loadings_ = {}
    model.feature_loadings_ = {}
    model.intercept_ = {}
    model.column_scale_ = {}
    model.feature_names_ = {}
    model.label_info_ = {}
    model.loss_traces_ = {}
    for entry in doc["modalities"]:
        name = entry["name"]
        model.modalities_.append(name)
        model.sample_loadings_[name] = _decode_array(entry, "alpha")
        model.feature_loadings_[name] = _decode_array(entry, "beta")
        model.intercept_[name] = _decode_array(entry, "intercept")
        model.column_scale_[name] = _decode_array(entry, "column_scale")
        model.feature_names_[name] = list(entry["feature_names"])
        label = entry["label"]
        model.label_info_[name] = (
            None
            if label is None
            else {
                "classes": list(label["classes"]),
                "columns": [int(c) for c in label["columns"]],
            }
        )
        model.loss_traces_[name] = list(entry["loss_trace"])

    model.document_hash_ = stored_hash
    sampler = None if doc["sampler"] is None else _sampler_from_document(doc["sampler"])
    return model, sampler
