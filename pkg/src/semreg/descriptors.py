"""Descriptor conditioning: L2 norm, per-class PCA, L2 norm again."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

EPS = 1e-12


class InsufficientSamplesError(ValueError):
    pass


@dataclass
class NormStats:
    """Diagnostics tally for degenerate descriptors."""

    zero_vectors: int = 0


def l2_normalize(v: np.ndarray, stats: NormStats | None = None) -> np.ndarray:
    """Scale to unit norm; zero vectors pass through unchanged (and are tallied)."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if n <= EPS:
        if stats is not None:
            stats.zero_vectors += 1
        return v.copy()
    return v / n


def l2_normalize_rows(X: np.ndarray, stats: NormStats | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    norms = np.linalg.norm(X, axis=1)
    zero = norms <= EPS
    if stats is not None:
        stats.zero_vectors += int(zero.sum())
    out = X.copy()
    out[~zero] /= norms[~zero, None]
    return out


@dataclass
class PCAModel:
    """Plain (unwhitened) PCA projection fitted on one descriptor population."""

    mean: np.ndarray        # (C,)
    components: np.ndarray  # (m, C), orthonormal rows, decreasing variance
    singular_values: np.ndarray = field(repr=False, default=None)

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def fit_pca(samples: np.ndarray, target: int = 100) -> PCAModel:
    """Top-m principal directions of the centered sample matrix via SVD.

    m = min(target, n_features, rank); rank-deficient directions are dropped
    rather than padded.  Component signs are fixed so the largest-magnitude
    coefficient of each row is positive, making results deterministic.
    """
    X = np.asarray(samples, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InsufficientSamplesError(
            f"insufficient samples for PCA: need an (n>=2, C) matrix, got {X.shape}")
    mean = X.mean(axis=0)
    centered = X - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    tol = max(X.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    m = max(1, min(target, X.shape[1], rank))
    components = vt[:m]
    flip = np.sign(components[np.arange(m), np.argmax(np.abs(components), axis=1)])
    components = components * flip[:, None]
    return PCAModel(mean=mean, components=components, singular_values=s[:m].copy())


def project(model: PCAModel, v: np.ndarray) -> np.ndarray:
    """Project one vector or a row matrix onto the principal directions."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != model.mean.shape[0]:
        raise ValueError(
            f"dimension mismatch: vector has {v.shape[-1]}, model expects "
            f"{model.mean.shape[0]}")
    return (v - model.mean) @ model.components.T


def condition_class(query_desc: np.ndarray, ref_desc: np.ndarray,
                    target: int = 100,
                    stats: NormStats | None = None) -> Tuple[np.ndarray, np.ndarray]:
    """Normalise-PCA-normalise both descriptor sets of one class.

    A single PCA is fitted on the union of the normalized query and
    reference descriptors, so the projection is symmetric between the two
    images and needs no external training corpus.
    """
    q = l2_normalize_rows(np.asarray(query_desc, dtype=np.float64), stats)
    r = l2_normalize_rows(np.asarray(ref_desc, dtype=np.float64), stats)
    if len(q) < 1 or len(r) < 2:
        raise InsufficientSamplesError(
            f"need >=1 query and >=2 reference descriptors, got {len(q)}/{len(r)}")
    model = fit_pca(np.vstack([q, r]), target=target)
    return (l2_normalize_rows(project(model, q), stats),
            l2_normalize_rows(project(model, r), stats))
