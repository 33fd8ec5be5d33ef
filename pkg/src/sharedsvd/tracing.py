"""Tracing shared vs unshared singular vectors across noisy matrices.

Implements the pairwise tracing algorithm (match individual singular vectors
against the stacked matrix), the largest-gap estimator of the unshared
counts, the k-matrix max-min generalization, and the end-to-end Shared-SVD
pipeline. Positions in the stacked matrix are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimators import SubspaceEstimate, select_svd
from .exceptions import ContractError
from .linalg import as_matrix, compute_svd
from .model import stack


@dataclass
class TraceOutput:
    """Distances, estimated unshared counts, and the shared index estimate.

    ``distances[s]`` holds the per-vector distances of matrix s+1 against the
    other matrices; ``k_hat[s]`` its estimated unshared count. ``d1``/``d2``
    and ``k1_hat``/``k2_hat`` expose the two-matrix view.
    """

    distances: tuple[np.ndarray, ...]
    k_hat: tuple[int, ...]
    shared_index_estimate: tuple[int, ...]
    diagnostics: dict = field(default_factory=dict)

    @property
    def d1(self) -> np.ndarray:
        return self.distances[0]

    @property
    def d2(self) -> np.ndarray:
        return self.distances[1]

    @property
    def k1_hat(self) -> int:
        return self.k_hat[0]

    @property
    def k2_hat(self) -> int:
        return self.k_hat[1]

    @property
    def flags(self) -> tuple[str, ...]:
        return tuple(self.diagnostics.get("flags", ()))

    def to_json_dict(self) -> dict:
        return {
            "distances": [d.tolist() for d in self.distances],
            "k_hat": list(self.k_hat),
            "shared_index_estimate": list(self.shared_index_estimate),
            "diagnostics": {
                "flags": list(self.diagnostics.get("flags", [])),
                "matches": {str(s): [[int(i), int(k), float(d)] for i, k, d in rows]
                            for s, rows in self.diagnostics.get("matches", {}).items()},
            },
        }


def _top_frame(y, r, name):
    y = as_matrix(y, name)
    if not 1 <= r <= min(y.shape):
        raise ContractError(f"rank {r} out of range for {name} of shape {y.shape}")
    return compute_svd(y, k=r).left


def _vector_dist_sq(frame_a: np.ndarray, frame_b: np.ndarray) -> np.ndarray:
    """Pairwise squared spectral sin-Theta between unit columns: 1 - <a,b>^2."""
    cos = frame_a.T @ frame_b
    return np.clip(1.0 - cos**2, 0.0, 1.0)


def pair_distances(y1, y2, r1: int, r2: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-vector nearest-neighbour distances between the top singular vectors
    of two matrices: d_{1i} = min_j ||sin Theta(u_{1i}, u_{2j})||^2 and
    symmetrically d_{2j}."""
    u1 = _top_frame(y1, r1, "y1")
    u2 = _top_frame(y2, r2, "y2")
    d = _vector_dist_sq(u1, u2)
    return d.min(axis=1), d.min(axis=0)


def _count_from_gaps(d: np.ndarray) -> int:
    """Largest-gap rule on one distance sequence, including the boundary gaps
    1 - d_(1) and d_(m) - 0; ties resolve toward the smaller count."""
    d = np.asarray(d, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ContractError("distance sequence must be non-empty and 1-d")
    if np.any(d < 0) or np.any(d > 1):
        raise ContractError("distances must lie in [0, 1]")
    s = np.sort(d)[::-1]
    gaps = np.empty(d.size + 1)
    gaps[0] = 1.0 - s[0]
    gaps[1:-1] = s[:-1] - s[1:]
    gaps[-1] = s[-1]
    return int(np.argmax(gaps))


def estimate_counts(d1, d2) -> tuple[int, int]:
    """Estimate the unshared counts (k1, k2) from the distance sequences."""
    return _count_from_gaps(np.asarray(d1, dtype=float)), _count_from_gaps(np.asarray(d2, dtype=float))


def _match_into_stack(frame: np.ndarray, picks, stacked: np.ndarray):
    """Nearest stacked singular vector for each picked individual vector.

    Returns a list of (individual_pos, stacked_pos, distance) with 1-based
    positions; argmin ties resolve to the lowest stacked index.
    """
    d = _vector_dist_sq(frame, stacked)
    rows = []
    for i in picks:
        k = int(np.argmin(d[i]))
        rows.append((i + 1, k + 1, float(d[i, k])))
    return rows


def _resolve_index_set(match_rows, r: int, flags: list):
    """Union of matched stacked positions; trim an overshoot to the r
    best-matched positions (flagged), flag an undershoot."""
    best = {}
    for _, k, dist in match_rows:
        best[k] = min(best.get(k, np.inf), dist)
    j_hat = sorted(best)
    if len(j_hat) > r:
        flags.append("overshoot")
        j_hat = sorted(sorted(best, key=lambda k: best[k])[:r])
    elif len(j_hat) < r:
        flags.append("undershoot")
    return tuple(j_hat)


def trace_shared(y1, y2, k1: int, k2: int, r: int) -> TraceOutput:
    """Identify the stacked positions of the r shared singular vectors.

    Matches the r best-paired singular vectors of each matrix (the ones with
    the smallest cross-matrix distances) to their nearest vector among the
    top r+k1+k2 of the stacked matrix, and returns the union of the matched
    positions. A union of the wrong size is trimmed/flagged rather than
    fatal.
    """
    y1 = as_matrix(y1, "y1")
    y2 = as_matrix(y2, "y2")
    if min(k1, k2, r) < 0 or r + k1 + k2 < 1:
        raise ContractError("k1, k2, r must be non-negative with a positive total")
    total = r + k1 + k2
    if total > min(y1.shape[0], y1.shape[1] + y2.shape[1]):
        raise ContractError(f"r+k1+k2={total} exceeds the stacked dimensions")
    r1, r2 = r + k1, r + k2
    d1, d2 = pair_distances(y1, y2, r1, r2)
    u1 = _top_frame(y1, r1, "y1")
    u2 = _top_frame(y2, r2, "y2")
    stacked = _top_frame(stack([y1, y2]), total, "stack")
    picks_1 = np.argsort(d1, kind="stable")[:r]
    picks_2 = np.argsort(d2, kind="stable")[:r]
    m1 = _match_into_stack(u1, picks_1, stacked)
    m2 = _match_into_stack(u2, picks_2, stacked)
    flags: list[str] = []
    j_hat = _resolve_index_set(m1 + m2, r, flags)
    return TraceOutput(
        distances=(d1, d2),
        k_hat=(k1, k2),
        shared_index_estimate=j_hat,
        diagnostics={"matches": {1: m1, 2: m2}, "flags": flags},
    )


def trace_shared_multi(ys, ranks) -> TraceOutput:
    """k-matrix tracing with the max-min distance.

    For matrix s, d_{si} is the max over the other matrices of the min
    distance to their top singular vectors, so a vector counts as shared only
    if every other matrix holds a close counterpart. Unshared counts come
    from the largest-gap rule per matrix; the remaining steps mirror the
    pairwise algorithm.
    """
    ys = [as_matrix(y, f"matrix {i + 1}") for i, y in enumerate(ys)]
    ranks = [int(t) for t in ranks]
    if len(ys) < 2:
        raise ContractError("need at least two matrices")
    if len(ranks) != len(ys):
        raise ContractError("one rank per matrix required")
    frames = [_top_frame(y, t, f"matrix {s + 1}") for s, (y, t) in enumerate(zip(ys, ranks))]
    dists = []
    for s, us in enumerate(frames):
        per_other = [
            _vector_dist_sq(us, ut).min(axis=1) for t, ut in enumerate(frames) if t != s
        ]
        dists.append(np.max(np.vstack(per_other), axis=0))
    k_hat = tuple(_count_from_gaps(d) for d in dists)
    shared_counts = [t - k for t, k in zip(ranks, k_hat)]
    flags: list[str] = []
    if len(set(shared_counts)) != 1:
        flags.append("rank_disagreement")
    r = min(shared_counts)
    if r < 0:
        raise ContractError("estimated unshared count exceeds a matrix rank")
    total = r + sum(k_hat)
    stacked_y = stack(ys)
    if total < 1 or total > min(stacked_y.shape):
        raise ContractError(f"top-{total} stacked subspace is not available")
    stacked = compute_svd(stacked_y, k=total).left
    matches = {}
    rows_all = []
    for s, (us, d) in enumerate(zip(frames, dists)):
        picks = np.argsort(d, kind="stable")[:r]
        rows = _match_into_stack(us, picks, stacked)
        matches[s + 1] = rows
        rows_all.extend(rows)
    j_hat = _resolve_index_set(rows_all, r, flags)
    return TraceOutput(
        distances=tuple(dists),
        k_hat=k_hat,
        shared_index_estimate=j_hat,
        diagnostics={"matches": matches, "flags": flags},
    )


def elbow_rank(y, max_rank: int | None = None) -> int:
    """Heuristic rank pick: position of the largest consecutive singular
    value ratio. Provided for exploratory use; the algorithms treat ranks as
    known inputs."""
    y = as_matrix(y, "y")
    s = np.linalg.svd(y, compute_uv=False)
    if max_rank is not None:
        s = s[: max_rank + 1]
    floor = max(s[0], 1.0) * 1e-12
    ratios = s[:-1] / np.maximum(s[1:], floor)
    return int(np.argmax(ratios)) + 1


def shared_svd(ys, ranks=None) -> SubspaceEstimate:
    """End-to-end pipeline: distances -> unshared counts -> traced shared
    index set -> index-selected stacked SVD.

    ``ranks`` gives the per-matrix signal ranks; when omitted they come from
    ``elbow_rank``. The shared rank is inferred as rank_i - k_i-hat; on
    disagreement the smallest value wins (conservative) and the trace output
    is flagged.
    """
    ys = [as_matrix(y, f"matrix {i + 1}") for i, y in enumerate(ys)]
    if len(ys) < 2:
        raise ContractError("need at least two matrices")
    if ranks is None:
        ranks = [elbow_rank(y) for y in ys]
    ranks = [int(t) for t in ranks]
    if len(ys) == 2:
        d1, d2 = pair_distances(ys[0], ys[1], ranks[0], ranks[1])
        k1, k2 = estimate_counts(d1, d2)
        r = min(ranks[0] - k1, ranks[1] - k2)
        if r < 1:
            raise ContractError("tracing found no shared singular vectors")
        trace = trace_shared(ys[0], ys[1], k1, k2, r)
        if ranks[0] - k1 != ranks[1] - k2:
            trace.diagnostics.setdefault("flags", []).append("rank_disagreement")
    else:
        trace = trace_shared_multi(ys, ranks)
        if not trace.shared_index_estimate:
            raise ContractError("tracing found no shared singular vectors")
    est = select_svd(ys, trace.shared_index_estimate)
    return SubspaceEstimate(frame=est.frame, method="selected",
                            indices=est.indices, source="shared-svd tracing pipeline")
