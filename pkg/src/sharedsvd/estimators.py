"""Subspace estimators: Stack-SVD, individual SVD, Average-SVD, and
index-selected variants of the stacked decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError
from .linalg import as_matrix, compute_svd
from .model import stack


@dataclass(frozen=True)
class SubspaceEstimate:
    """An estimated left singular subspace plus how it was obtained."""

    frame: np.ndarray
    method: str                       # "stack" | "individual" | "average" | "selected"
    indices: tuple[int, ...] | None = None  # 1-based stacked positions, selected only
    source: str = ""


def stack_svd(ys, r: int) -> SubspaceEstimate:
    """Top-r left singular vectors of the horizontal stack (Y_1 ... Y_k)."""
    y = stack(ys)
    if not 1 <= r <= min(y.shape):
        raise ContractError(f"rank {r} out of range for stacked shape {y.shape}")
    fact = compute_svd(y, k=r)
    return SubspaceEstimate(frame=fact.left, method="stack",
                            source=f"stack of {len(list(ys)) if hasattr(ys, '__len__') else '?'} matrices")


def individual_svd(y, r: int) -> SubspaceEstimate:
    """Top-r left singular vectors of a single matrix."""
    y = as_matrix(y, "y")
    if not 1 <= r <= min(y.shape):
        raise ContractError(f"rank {r} out of range for shape {y.shape}")
    fact = compute_svd(y, k=r)
    return SubspaceEstimate(frame=fact.left, method="individual", source="single matrix")


def average_svd(ys, r: int) -> SubspaceEstimate:
    """Principal-angle aggregation: concatenate the individual top-r frames
    and take the top-r left singular vectors of the n x (k*r) concatenation."""
    ys = [as_matrix(y, f"matrix {i + 1}") for i, y in enumerate(ys)]
    frames = [individual_svd(y, r).frame for y in ys]
    concat = np.hstack(frames)
    fact = compute_svd(concat, k=r)
    return SubspaceEstimate(frame=fact.left, method="average",
                            source=f"average of {len(ys)} individual frames")


def select_svd(ys, indices) -> SubspaceEstimate:
    """Left singular vectors of the stack at the requested 1-based positions.

    ``indices = {1..r}`` reproduces ``stack_svd``; the oracle estimator uses
    the true shared index set, the shifted estimator uses ``{d+1..d+r}``.
    """
    idx = tuple(int(i) for i in indices)
    if not idx:
        raise ContractError("indices must be non-empty")
    if sorted(idx) != list(idx) or len(set(idx)) != len(idx):
        raise ContractError(f"indices must be distinct and ascending, got {idx}")
    y = stack(ys)
    if idx[0] < 1 or idx[-1] > min(y.shape):
        raise ContractError(f"indices {idx} out of range for stacked shape {y.shape}")
    fact = compute_svd(y, k=idx[-1])
    frame = fact.left[:, [i - 1 for i in idx]]
    return SubspaceEstimate(frame=frame, method="selected", indices=idx,
                            source="index-selected stacked SVD")
