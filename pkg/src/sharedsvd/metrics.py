"""Embedding-quality metrics for judging estimated shared subspaces on
labelled data: silhouette, Calinski-Harabasz, and neighborhood purity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError
from .linalg import as_matrix


@dataclass(frozen=True)
class EmbeddingEvalReport:
    silhouette: float            # mean silhouette coefficient, in [-1, 1]
    calinski_harabasz: float     # between/within dispersion ratio, >= 0
    neighborhood_purity: float   # kNN label agreement, in [0, 1]
    neighborhood: int

    def to_json_dict(self) -> dict:
        return {
            "silhouette": self.silhouette,
            "calinski_harabasz": self.calinski_harabasz,
            "neighborhood_purity": self.neighborhood_purity,
            "neighborhood": self.neighborhood,
        }


def _pairwise_distances(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(np.clip(d2, 0.0, None))


def eval_embedding(embedding, labels, neighborhood: int = 30) -> EmbeddingEvalReport:
    """Score a samples-by-r embedding against class labels.

    Silhouette uses Euclidean distances with per-class mean dissimilarities
    taken over the whole class (own class includes the zero self-distance, so
    the index is invariant to duplicating every point). Calinski-Harabasz is
    the usual variance ratio; neighborhood purity is the mean fraction of
    each sample's ``neighborhood`` nearest neighbours sharing its label.
    """
    x = as_matrix(embedding, "embedding")
    labels = np.asarray(labels)
    n = x.shape[0]
    if labels.shape != (n,):
        raise ContractError(f"labels length {labels.shape} must match sample count {n}")
    classes, class_idx = np.unique(labels, return_inverse=True)
    k = len(classes)
    if k < 2:
        raise ContractError("need at least two classes")
    if not 1 <= neighborhood < n:
        raise ContractError(f"neighborhood {neighborhood} must lie in [1, {n - 1}]")

    dist = _pairwise_distances(x)
    members = [np.flatnonzero(class_idx == c) for c in range(k)]
    class_mean_dist = np.column_stack([dist[:, idx].mean(axis=1) for idx in members])

    a = class_mean_dist[np.arange(n), class_idx]
    other = class_mean_dist.copy()
    other[np.arange(n), class_idx] = np.inf
    b = other.min(axis=1)
    denom = np.maximum(a, b)
    sil = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)

    grand = x.mean(axis=0)
    within = 0.0
    between = 0.0
    for idx in members:
        mu = x[idx].mean(axis=0)
        within += float(np.sum((x[idx] - mu) ** 2))
        between += len(idx) * float(np.sum((mu - grand) ** 2))
    if within > 0:
        ch = (between / (k - 1)) / (within / (n - k))
    else:
        ch = float("inf") if between > 0 else 0.0

    order = np.argsort(dist + np.diag(np.full(n, np.inf)), axis=1, kind="stable")
    neighbours = order[:, :neighborhood]
    purity = float(np.mean(class_idx[neighbours] == class_idx[:, None]))

    return EmbeddingEvalReport(
        silhouette=float(np.mean(sil)),
        calinski_harabasz=float(ch),
        neighborhood_purity=purity,
        neighborhood=neighborhood,
    )
