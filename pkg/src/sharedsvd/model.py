"""Ground-truth signal ensembles: shared/unshared vector specs, noise,
switch profiles, and the closed-form SVD of the horizontally stacked signal.

Conventions
-----------
Matrix indices are 1-based. Positions inside a descending-value ordering
(switch sets, shared index sets) are 1-based as well. The order of
``SignalSpec.vectors`` is the vector *identity* order and is never re-sorted;
sorting happens only when a factorization of the stacked signal is formed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import AmbiguityError, ContractError
from .linalg import (
    SvdFactorization,
    _fix_signs,
    as_matrix,
    compute_svd,
    derive_seed,
    random_orthonormal,
)

_UNSHARED_ORTHO_TOL = 1e-10
_UNIT_COLUMN_TOL = 1e-8
#: Gram eigenvalues below this route the stacked SVD to the rank-deficient branch
RANK_DEFICIENT_TOL = 1e-12


@dataclass(frozen=True)
class SingularVectorId:
    """Identity of one left singular vector: shared across all matrices or
    owned by exactly one."""

    kind: str                 # "shared" | "unshared"
    label: str
    owner: int | None = None  # 1-based matrix index, unshared vectors only

    def __post_init__(self):
        if self.kind not in ("shared", "unshared"):
            raise ContractError(f"kind must be 'shared' or 'unshared', got {self.kind!r}")
        if self.kind == "shared" and self.owner is not None:
            raise ContractError(f"shared vector {self.label!r} must not carry an owner")
        if self.kind == "unshared" and (self.owner is None or self.owner < 1):
            raise ContractError(f"unshared vector {self.label!r} needs an owner index >= 1")


@dataclass
class SignalSpec:
    """Generative description of a multi-matrix low-rank signal.

    ``values`` maps ``(matrix_index, label)`` to a singular value; every
    shared label must have a value in all matrices, every unshared label only
    in its owner. In ``explicit`` geometry the unshared directions are the
    columns of ``explicit_unshared`` (ordered as the unshared vectors appear
    in ``vectors``); in ``orthogonal`` geometry all directions are drawn from
    one common orthonormal pool.
    """

    n: int
    dims: tuple[int, ...]
    vectors: tuple[SingularVectorId, ...]
    values: dict[tuple[int, str], float]
    unshared_geometry: str = "orthogonal"
    explicit_unshared: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        self.dims = tuple(int(p) for p in self.dims)
        self.vectors = tuple(self.vectors)
        self.validate()

    @property
    def k(self) -> int:
        return len(self.dims)

    @property
    def shared_labels(self) -> tuple[str, ...]:
        return tuple(v.label for v in self.vectors if v.kind == "shared")

    @property
    def r(self) -> int:
        return len(self.shared_labels)

    def unshared_labels(self, i: int) -> tuple[str, ...]:
        return tuple(v.label for v in self.vectors if v.kind == "unshared" and v.owner == i)

    @property
    def all_unshared(self) -> tuple[SingularVectorId, ...]:
        return tuple(v for v in self.vectors if v.kind == "unshared")

    def matrix_vectors(self, i: int) -> tuple[SingularVectorId, ...]:
        """Vectors present in matrix ``i``, in spec (identity) order."""
        return tuple(v for v in self.vectors if v.kind == "shared" or v.owner == i)

    def matrix_values(self, i: int) -> np.ndarray:
        return np.array([self.values[(i, v.label)] for v in self.matrix_vectors(i)])

    def rank(self, i: int) -> int:
        return len(self.matrix_vectors(i))

    def stacked_value(self, v: SingularVectorId) -> float:
        """Analytic stacked singular value in orthogonal geometry."""
        if v.kind == "shared":
            return float(np.sqrt(sum(self.values[(i, v.label)] ** 2 for i in range(1, self.k + 1))))
        return float(self.values[(v.owner, v.label)])

    def validate(self):
        if self.n < 1 or self.k < 1:
            raise ContractError("need n >= 1 and at least one matrix")
        if self.unshared_geometry not in ("orthogonal", "explicit"):
            raise ContractError(f"unknown unshared_geometry {self.unshared_geometry!r}")
        labels = [v.label for v in self.vectors]
        if len(set(labels)) != len(labels):
            raise ContractError("vector labels must be unique")
        for v in self.vectors:
            if v.kind == "unshared" and v.owner > self.k:
                raise ContractError(f"vector {v.label!r} owned by matrix {v.owner} > k={self.k}")
        expected = set()
        for v in self.vectors:
            owners = range(1, self.k + 1) if v.kind == "shared" else (v.owner,)
            expected.update((i, v.label) for i in owners)
        if set(self.values) != expected:
            missing = expected - set(self.values)
            extra = set(self.values) - expected
            raise ContractError(f"values map mismatch: missing {sorted(missing)}, extra {sorted(extra)}")
        if any(s <= 0 for s in self.values.values()):
            raise ContractError("all singular values must be strictly positive")
        if len(self.vectors) > self.n:
            raise ContractError(f"{len(self.vectors)} left singular vectors exceed ambient dimension {self.n}")
        for i in range(1, self.k + 1):
            if self.rank(i) > self.dims[i - 1]:
                raise ContractError(f"matrix {i}: rank {self.rank(i)} exceeds p_{i}={self.dims[i - 1]}")
        if self.unshared_geometry == "explicit":
            total_unshared = len(self.all_unshared)
            if total_unshared == 0:
                raise ContractError("explicit geometry requires at least one unshared vector")
            m = as_matrix(self.explicit_unshared, "explicit_unshared")
            if m.shape != (self.n, total_unshared):
                raise ContractError(
                    f"explicit_unshared must be {self.n}x{total_unshared}, got {m.shape}")
            norms = np.linalg.norm(m, axis=0)
            if np.max(np.abs(norms - 1.0)) > _UNIT_COLUMN_TOL:
                raise ContractError("explicit_unshared columns must have unit norm")
            # within each owner the block must be orthonormal (it is part of that
            # matrix's SVD); cross-owner angles are free
            cols = {v.label: j for j, v in enumerate(self.all_unshared)}
            for i in range(1, self.k + 1):
                idx = [cols[lab] for lab in self.unshared_labels(i)]
                if len(idx) > 1:
                    block = m[:, idx]
                    dev = np.max(np.abs(block.T @ block - np.eye(len(idx))))
                    if dev > _UNIT_COLUMN_TOL:
                        raise ContractError(
                            f"explicit unshared block of matrix {i} is not orthonormal "
                            f"(max deviation {dev:.3e})")
            self.explicit_unshared = m


@dataclass
class SignalPair:
    """Realized signal matrices plus the frames that generated them."""

    matrices: list[np.ndarray]
    shared_frame: np.ndarray                 # n x r
    unshared_frames: list[np.ndarray | None]  # per matrix, n x r_{i*} or None
    right_frames: list[np.ndarray]           # per matrix, p_i x rank_i
    spec: SignalSpec = field(repr=False)

    @property
    def k(self) -> int:
        return len(self.matrices)


def _spawn_frame(rng: np.random.Generator, n: int, r: int, complement_of: np.ndarray | None = None) -> np.ndarray:
    g = rng.standard_normal((n, r))
    if complement_of is not None:
        q = complement_of
        g -= q @ (q.T @ g)
    out, _ = np.linalg.qr(g)
    out = out.copy()
    _fix_signs(out)
    return out


def build_signal(spec: SignalSpec) -> SignalPair:
    """Realize X_i = (U_r U_{i*}) diag(values_i) V_i^T for every matrix.

    Orthogonal geometry draws all left vectors from one common orthonormal
    pool, so unshared blocks of different matrices are exactly orthogonal.
    Explicit geometry takes the unshared directions as supplied and draws the
    shared frame in their orthogonal complement. Values are laid down in spec
    order, never re-sorted.
    """
    n, k = spec.n, spec.k
    label_col: dict[str, np.ndarray] = {}
    if spec.unshared_geometry == "orthogonal":
        pool = random_orthonormal(n, len(spec.vectors), spec.seed)
        for j, v in enumerate(spec.vectors):
            label_col[v.label] = pool[:, j]
    else:
        m = spec.explicit_unshared
        for j, v in enumerate(spec.all_unshared):
            label_col[v.label] = m[:, j]
        r = spec.r
        if r > 0:
            if len(spec.vectors) > n:
                raise ContractError("not enough ambient dimensions for the shared frame")
            basis = np.linalg.qr(m)[0]
            rng = np.random.default_rng(derive_seed(spec.seed, 1))
            shared = _spawn_frame(rng, n, r, complement_of=basis)
            for j, lab in enumerate(spec.shared_labels):
                label_col[lab] = shared[:, j]

    shared_frame = (np.column_stack([label_col[lab] for lab in spec.shared_labels])
                    if spec.r else np.zeros((n, 0)))
    matrices, unshared_frames, right_frames = [], [], []
    for i in range(1, k + 1):
        vecs = spec.matrix_vectors(i)
        left = np.column_stack([label_col[v.label] for v in vecs])
        vals = spec.matrix_values(i)
        v_right = random_orthonormal(spec.dims[i - 1], len(vecs), derive_seed(spec.seed, 10 + i))
        matrices.append((left * vals) @ v_right.T)
        unsh = spec.unshared_labels(i)
        unshared_frames.append(np.column_stack([label_col[lab] for lab in unsh]) if unsh else None)
        right_frames.append(v_right)
    return SignalPair(matrices=matrices, shared_frame=shared_frame,
                      unshared_frames=unshared_frames, right_frames=right_frames, spec=spec)


def add_noise(x, tau: float, dist: str = "gaussian", seed: int = 0) -> np.ndarray:
    """Y = X + Z with i.i.d. zero-mean entries of variance tau^2.

    ``gaussian`` is N(0, tau^2); ``rademacher`` is +-tau equiprobable;
    ``uniform`` is Uniform(-tau*sqrt(3), tau*sqrt(3)).
    """
    x = as_matrix(x, "x")
    if tau < 0:
        raise ContractError(f"tau must be non-negative, got {tau}")
    if tau == 0:
        return x.copy()
    rng = np.random.default_rng(seed)
    if dist == "gaussian":
        z = tau * rng.standard_normal(x.shape)
    elif dist == "rademacher":
        z = tau * (2.0 * rng.integers(0, 2, size=x.shape) - 1.0)
    elif dist == "uniform":
        half = tau * np.sqrt(3.0)
        z = rng.uniform(-half, half, size=x.shape)
    else:
        raise ContractError(f"unknown noise distribution {dist!r}")
    return x + z


def stack(ms) -> np.ndarray:
    """Horizontal concatenation (Y_1 Y_2 ... Y_k)."""
    ms = [as_matrix(m, f"matrix {i + 1}") for i, m in enumerate(ms)]
    if not ms:
        raise ContractError("need at least one matrix to stack")
    rows = {m.shape[0] for m in ms}
    if len(rows) != 1:
        raise ContractError(f"row counts differ across matrices: {sorted(rows)}")
    return np.hstack(ms)


def ajive_parts(pair: SignalPair, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Split X_i into its joint part (shared directions) and individual part.

    Returns (J_i, A_i) with J_i + A_i = X_i exactly.
    """
    if not 1 <= i <= pair.k:
        raise ContractError(f"matrix index {i} out of range 1..{pair.k}")
    spec = pair.spec
    vecs = spec.matrix_vectors(i)
    vals = spec.matrix_values(i)
    v_right = pair.right_frames[i - 1]
    x = pair.matrices[i - 1]
    shared_cols = [j for j, v in enumerate(vecs) if v.kind == "shared"]
    joint = np.zeros_like(x)
    if shared_cols:
        joint = (pair.shared_frame * vals[shared_cols]) @ v_right[:, shared_cols].T
    return joint, x - joint


# ---------------------------------------------------------------------------
# Switch profile of the stacked signal
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SwitchProfile:
    """Vector types of the stacked signal's descending singular values.

    ``switch_set`` holds the 1-based positions s where the type changes
    between s and s+1; ``gaps`` the squared-singular-value gaps at those
    switches. ``terminal_gap_sq`` is sigma_min^2 when the last vector is
    shared (counted in ``min_gap_sq`` but not in the switch set).
    ``g1``/``g2`` are the scenario gap statistics, present only when the
    corresponding within-matrix value ordering holds.
    """

    stacked_values: np.ndarray
    types: tuple[str, ...]
    labels: tuple[str, ...]
    switch_set: tuple[int, ...]
    gaps: tuple[float, ...]
    terminal_gap_sq: float | None
    shared_index_set: tuple[int, ...]
    min_gap_sq: float | None
    g1: float | None
    g2: float | None


def _profile_from_sorted(values: np.ndarray, types: tuple[str, ...], labels: tuple[str, ...],
                         g1: float | None, g2: float | None) -> SwitchProfile:
    m = len(values)
    for s in range(m - 1):
        if types[s] != types[s + 1] and np.isclose(values[s], values[s + 1], rtol=1e-12, atol=1e-12):
            raise AmbiguityError(
                f"stacked singular values tied across a type boundary at positions "
                f"{s + 1} and {s + 2} (value {values[s]:.6g})")
    switch_set = tuple(s + 1 for s in range(m - 1) if types[s] != types[s + 1])
    gaps = tuple(float(values[s - 1] ** 2 - values[s] ** 2) for s in switch_set)
    terminal = float(values[-1] ** 2) if types and types[-1] == "shared" else None
    all_gaps = list(gaps) + ([terminal] if terminal is not None else [])
    return SwitchProfile(
        stacked_values=values,
        types=types,
        labels=labels,
        switch_set=switch_set,
        gaps=gaps,
        terminal_gap_sq=terminal,
        shared_index_set=tuple(i + 1 for i, t in enumerate(types) if t == "shared"),
        min_gap_sq=min(all_gaps) if all_gaps else None,
        g1=g1,
        g2=g2,
    )


def _scenario_gaps(spec: SignalSpec) -> tuple[float | None, float | None]:
    """G1/G2 gap statistics for two matrices, by vector identity.

    G1 applies when every matrix orders shared above unshared values; G2 when
    both matrices have unshared values all above the shared ones.
    """
    if spec.k != 2:
        return None, None
    shared_sq = {lab: sum(spec.values[(i, lab)] ** 2 for i in (1, 2)) for lab in spec.shared_labels}
    unshared_sq = [spec.values[(v.owner, v.label)] ** 2 for v in spec.all_unshared]
    g1 = g2 = None
    if shared_sq:
        scenario1 = all(
            min(spec.values[(i, lab)] for lab in spec.shared_labels)
            > max((spec.values[(i, lab)] for lab in spec.unshared_labels(i)), default=0.0)
            for i in (1, 2))
        if scenario1:
            g1 = min(shared_sq.values()) - (max(unshared_sq) if unshared_sq else 0.0)
        both_have_unshared = all(spec.unshared_labels(i) for i in (1, 2))
        if both_have_unshared:
            scenario2 = all(
                min(spec.values[(i, lab)] for lab in spec.unshared_labels(i))
                > max(spec.values[(i, lab)] for lab in spec.shared_labels)
                for i in (1, 2))
            if scenario2:
                d_min = min(min(spec.values[(i, lab)] for lab in spec.unshared_labels(i)) ** 2
                            for i in (1, 2))
                g2 = d_min - max(shared_sq.values())
    return g1, g2


def switch_profile(spec: SignalSpec) -> SwitchProfile:
    """Switch set, eigen-gaps, and shared index set of the stacked signal.

    In orthogonal geometry the stacked values are composed analytically
    (shared vectors get the root of the sum of their squared per-matrix
    values, unshared vectors keep their own); in explicit geometry they come
    from the closed-form stacked SVD. Ties across a type boundary raise
    ``AmbiguityError``.
    """
    if spec.unshared_geometry == "explicit":
        fact = nonorthogonal_stacked_svd(spec)
        shared = set(spec.shared_labels)
        types = tuple("shared" if lab in shared else "unshared" for lab in fact.column_labels)
        g1, g2 = _scenario_gaps(spec)
        return _profile_from_sorted(fact.singular_values, types, fact.column_labels, g1, g2)
    entries = [(spec.stacked_value(v), v.kind, v.label) for v in spec.vectors]
    order = np.argsort(-np.array([e[0] for e in entries]), kind="stable")
    values = np.array([entries[j][0] for j in order])
    types = tuple(entries[j][1] for j in order)
    labels = tuple(entries[j][2] for j in order)
    g1, g2 = _scenario_gaps(spec)
    return _profile_from_sorted(values, types, labels, g1, g2)


# ---------------------------------------------------------------------------
# Closed-form SVD of the stacked signal (non-orthogonal unshared geometry)
# ---------------------------------------------------------------------------

def nonorthogonal_stacked_svd(spec: SignalSpec) -> SvdFactorization:
    """Exact SVD of (X_1 X_2) assembled from the spec's frames.

    The shared block keeps the shared frame with values
    sqrt(sigma_1^2 + sigma_2^2); the unshared block is whitened through the
    inverse square root of its Gram matrix (full-column-rank branch) or
    through a rank-revealing transformation (rank-deficient branch, entered
    when a Gram eigenvalue falls below ``RANK_DEFICIENT_TOL``). Columns are
    re-sorted to non-increasing singular values; ``column_labels`` records
    the vector identity behind each column (unshared mixtures are labelled by
    their dominant component).
    """
    if spec.k != 2:
        raise ContractError(f"closed-form stacked SVD is defined for k=2, got k={spec.k}")
    pair = build_signal(spec)
    n = spec.n
    p1, p2 = spec.dims
    r = spec.r

    blocks_left, blocks_vals, blocks_right, blocks_labels = [], [], [], []

    # shared block: left vectors unchanged, values combined across matrices
    if r:
        a1 = np.array([spec.values[(1, lab)] for lab in spec.shared_labels])
        a2 = np.array([spec.values[(2, lab)] for lab in spec.shared_labels])
        combined = np.sqrt(a1**2 + a2**2)
        v1s = _right_block(pair, 1, shared=True)
        v2s = _right_block(pair, 2, shared=True)
        right = np.vstack([v1s * (a1 / combined), v2s * (a2 / combined)])
        blocks_left.append(pair.shared_frame)
        blocks_vals.append(combined)
        blocks_right.append(right)
        blocks_labels.extend(spec.shared_labels)

    unshared = spec.all_unshared
    if unshared:
        a = np.column_stack([_unshared_column(pair, v) for v in unshared])
        sigma_star = np.array([spec.values[(v.owner, v.label)] for v in unshared])
        v_unsh = _blkdiag_right(pair, p1, p2)
        gram = a.T @ a
        evals, evecs = np.linalg.eigh(gram)
        if np.min(evals) < RANK_DEFICIENT_TOL:
            left_u, vals_u, right_u, weights = _deficient_branch(a, sigma_star, v_unsh)
        else:
            s_mat = (evecs * (evals ** -0.5)) @ evecs.T          # Gram^{-1/2}
            s_inv = (evecs * (evals ** 0.5)) @ evecs.T           # Gram^{+1/2}
            inner = compute_svd(s_inv * sigma_star)              # S^{-1} diag(Sigma_*)
            left_u = a @ s_mat @ inner.left
            vals_u = inner.singular_values
            right_u = v_unsh @ inner.right
            weights = s_inv @ inner.left   # <a_j, column> overlaps
        labels_u = _dominant_labels(weights, [v.label for v in unshared])
        blocks_left.append(left_u)
        blocks_vals.append(vals_u)
        blocks_right.append(right_u)
        blocks_labels.extend(labels_u)

    left = np.hstack(blocks_left) if blocks_left else np.zeros((n, 0))
    vals = np.concatenate(blocks_vals) if blocks_vals else np.zeros(0)
    right = np.hstack(blocks_right) if blocks_right else np.zeros((p1 + p2, 0))
    order = np.argsort(-vals, kind="stable")
    left, vals, right = left[:, order].copy(), vals[order], right[:, order].copy()
    labels = tuple(blocks_labels[j] for j in order)
    _fix_signs(left, right)
    return SvdFactorization(left=left, singular_values=vals, right=right, column_labels=labels)


def _right_block(pair: SignalPair, i: int, shared: bool) -> np.ndarray:
    spec = pair.spec
    vecs = spec.matrix_vectors(i)
    want = "shared" if shared else "unshared"
    idx = [j for j, v in enumerate(vecs) if v.kind == want]
    return pair.right_frames[i - 1][:, idx]


def _unshared_column(pair: SignalPair, v: SingularVectorId) -> np.ndarray:
    frame = pair.unshared_frames[v.owner - 1]
    labels = pair.spec.unshared_labels(v.owner)
    return frame[:, labels.index(v.label)]


def _blkdiag_right(pair: SignalPair, p1: int, p2: int) -> np.ndarray:
    """(p1+p2) x (r1*+r2*) block-diagonal right frame of the unshared part,
    columns ordered as the unshared vectors appear in the spec."""
    spec = pair.spec
    cols = []
    for v in spec.all_unshared:
        block = _right_block(pair, v.owner, shared=False)
        j = spec.unshared_labels(v.owner).index(v.label)
        col = np.zeros(p1 + p2)
        if v.owner == 1:
            col[:p1] = block[:, j]
        else:
            col[p1:] = block[:, j]
        cols.append(col)
    return np.column_stack(cols)


def _deficient_branch(a: np.ndarray, sigma_star: np.ndarray, v_unsh: np.ndarray):
    """Rank-deficient unshared concatenation: map (U_1* U_2*) L = (Utilde 0)
    with L built from the SVD of the concatenation, then factor the inner
    rank-r* core."""
    p_mat, d, qt = np.linalg.svd(a, full_matrices=True)
    r_star = int(np.sum(d > np.sqrt(RANK_DEFICIENT_TOL)))
    if r_star == 0:
        raise ContractError("unshared concatenation is numerically zero")
    # L = [Q_{:r*} diag(1/d), Q_{r*:}] gives A L = (P_{:r*} 0); the normalized
    # factor is orthonormal so its Gram whitening S is the identity.
    inner_core = (d[:r_star, None] * qt[:r_star]) * sigma_star   # (I 0) L^{-1} diag(Sigma_*)
    inner = compute_svd(inner_core)
    left_u = p_mat[:, :r_star] @ inner.left
    vals_u = inner.singular_values
    right_u = v_unsh @ inner.right
    # <a_j, column> overlaps of each output column with the original columns
    weights = (qt[:r_star].T * d[:r_star]) @ inner.left
    return left_u, vals_u, right_u, weights


def _dominant_labels(weights: np.ndarray, source_labels: list[str]) -> list[str]:
    """Label each mixed column by its dominant source vector."""
    out = []
    for j in range(weights.shape[1]):
        out.append(source_labels[int(np.argmax(np.abs(weights[:, j])))])
    return out


# ---------------------------------------------------------------------------
# JSON serialization of SignalSpec
# ---------------------------------------------------------------------------

def spec_to_json(spec: SignalSpec) -> str:
    doc = {
        "n": spec.n,
        "k": spec.k,
        "dims": list(spec.dims),
        "vectors": [
            {"kind": v.kind, "owner": v.owner, "label": v.label} for v in spec.vectors
        ],
        "values": {f"{i}:{lab}": val for (i, lab), val in sorted(spec.values.items())},
        "unshared_geometry": spec.unshared_geometry,
        "seed": spec.seed,
    }
    if spec.explicit_unshared is not None:
        doc["explicit_unshared"] = spec.explicit_unshared.tolist()
    return json.dumps(doc, indent=2)


def spec_from_json(text: str) -> SignalSpec:
    doc = json.loads(text)
    if "k" in doc and doc["k"] != len(doc["dims"]):
        raise ContractError(f"k={doc['k']} disagrees with len(dims)={len(doc['dims'])}")
    values = {}
    for key, val in doc["values"].items():
        idx, label = key.split(":", 1)
        values[(int(idx), label)] = float(val)
    explicit = doc.get("explicit_unshared")
    return SignalSpec(
        n=int(doc["n"]),
        dims=tuple(doc["dims"]),
        vectors=tuple(SingularVectorId(kind=v["kind"], label=v["label"], owner=v.get("owner"))
                      for v in doc["vectors"]),
        values=values,
        unshared_geometry=doc.get("unshared_geometry", "orthogonal"),
        explicit_unshared=np.asarray(explicit, dtype=float) if explicit is not None else None,
        seed=int(doc.get("seed", 0)),
    )
