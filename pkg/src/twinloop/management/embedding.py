"""Shared semantic geometry: hashed term vectors and cosine similarity.

Every descriptive keyword maps to a fixed pseudo-random direction seeded from
its hash, so policies (from their keyword sets) and intent kinds (from the
same vocabulary) land in one common space without any supervision. That
shared geometry is what lets policies never seen during encoder training
still win the similarity argmax.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache

import numpy as np

from ..errors import DomainError, PreconditionError


@lru_cache(maxsize=4096)
def term_vector(term: str, dim: int = 64) -> np.ndarray:
    digest = hashlib.sha256(term.lower().encode()).digest()
    seed = int.from_bytes(digest[:8], "little")
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(dim)
    vec.setflags(write=False)
    return vec


def keyword_embedding(keywords: list[str] | tuple[str, ...], dim: int = 64) -> np.ndarray:
    """Unit-norm sum of the term vectors of a keyword set."""
    if not keywords:
        raise PreconditionError("keyword set is empty")
    total = np.zeros(dim)
    for term in sorted(set(keywords)):
        total += term_vector(term, dim)
    norm = np.linalg.norm(total)
    if norm == 0:
        raise DomainError("keyword embedding collapsed to zero")
    return total / norm


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise PreconditionError(f"cosine of mismatched shapes {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DomainError("cosine similarity undefined for zero-norm vector")
    return float(a @ b / (na * nb))
