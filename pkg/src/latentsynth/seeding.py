"""Deterministic seed derivation.

A pipeline run owns one root seed; every stage (fit, sampler, draw,
balance, each evaluation repeat) derives its own sub-seed from the root
plus a stage tag. Stages are therefore reproducible in isolation and
insensitive to how many random draws other stages consumed.
"""

from __future__ import annotations

import hashlib

from ._validation import check_seed

__all__ = ["derive_seed"]


def derive_seed(root_seed: int, tag: str) -> int:
    """Derive a 64-bit sub-seed from ``root_seed`` and an operation tag."""
    root_seed = check_seed(root_seed, "root_seed")
    digest = hashlib.sha256(f"{root_seed}:{tag}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
