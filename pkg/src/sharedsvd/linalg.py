"""Dense SVD, sin-Theta subspace distances, and seeded orthonormal frames.

Matrices are plain 2-d float64 ``numpy`` arrays throughout the package; an
"orthonormal frame" is an n x r array whose columns are orthonormal within
``ORTHO_TOL`` in max absolute entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError, NumericalError

#: max-entry tolerance on U^T U - I for a valid orthonormal frame
ORTHO_TOL = 1e-8


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a non-empty 2-d float64 array with finite entries."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ContractError(f"{name} must be a non-empty 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ContractError(f"{name} contains non-finite entries")
    return m


def require_frame(u, name: str = "frame") -> np.ndarray:
    """Validate an orthonormal frame and return it as a float64 array."""
    u = as_matrix(u, name)
    n, r = u.shape
    if r > n:
        raise ContractError(f"{name}: rank {r} exceeds ambient dimension {n}")
    dev = float(np.max(np.abs(u.T @ u - np.eye(r))))
    if dev > ORTHO_TOL:
        raise ContractError(f"{name}: columns not orthonormal (max deviation {dev:.3e})")
    return u


def _fix_signs(u: np.ndarray, *others: np.ndarray) -> None:
    """Flip columns in place so each column's largest-magnitude entry is positive.

    Companion arrays (e.g. matching right singular vectors) are flipped with
    the same signs to preserve any factorization.
    """
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
            for o in others:
                o[:, j] = -o[:, j]


@dataclass(frozen=True)
class SvdFactorization:
    """A (possibly truncated) SVD: ``left @ diag(singular_values) @ right.T``.

    ``column_labels``, when present, names the signal vector behind each
    column (used by the closed-form stacked SVD to record how sorting
    permuted the vector identities).
    """

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray
    column_labels: tuple[str, ...] | None = None

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right.T


def compute_svd(m, k: int | None = None) -> SvdFactorization:
    """Full or rank-k truncated SVD with deterministic column signs.

    Singular values come back in non-increasing order; each left singular
    vector has its largest-magnitude entry positive (the matching right
    vector is flipped along with it).
    """
    m = as_matrix(m)
    if k is not None:
        if not 1 <= k <= min(m.shape):
            raise ContractError(f"k={k} must lie in [1, {min(m.shape)}] for shape {m.shape}")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed to converge on a {m.shape[0]}x{m.shape[1]} matrix") from exc
    if k is not None:
        u, s, vt = u[:, :k], s[:k], vt[:k]
    v = vt.T.copy()
    u = u.copy()
    _fix_signs(u, v)
    return SvdFactorization(left=u, singular_values=s, right=v)


def sin_theta(a, b, norm: str = "spectral") -> float:
    """sin-Theta distance between two equal-rank subspaces.

    Parameters
    ----------
    a, b : (n, r) arrays
        Orthonormal frames spanning the subspaces.
    norm : {"spectral", "frobenius_squared"}
        "spectral" is ``sqrt(1 - sigma_min^2(a^T b))``, in [0, 1];
        "frobenius_squared" is ``r - ||a^T b||_F^2``, in [0, r].

    Both are evaluated through the projection residual ``b - a(a^T b)``,
    whose singular values equal the sines of the principal angles; unlike the
    defining formulas this keeps full precision near zero distance.
    """
    a = require_frame(a, "a")
    b = require_frame(b, "b")
    if a.shape != b.shape:
        raise ContractError(f"frame shapes differ: {a.shape} vs {b.shape}")
    residual = b - a @ (a.T @ b)
    if norm == "spectral":
        top = float(np.linalg.svd(residual, compute_uv=False)[0])
        return float(min(top, 1.0))
    if norm == "frobenius_squared":
        r = a.shape[1]
        return float(min(float(np.sum(residual**2)), r))
    raise ContractError(f"unknown norm {norm!r}")


def random_orthonormal(n: int, r: int, seed: int) -> np.ndarray:
    """Orthonormal factor of an n x r standard-Gaussian matrix.

    Deterministic given ``seed``; each column's largest-magnitude entry is
    made positive.
    """
    if r > n:
        raise ContractError(f"rank {r} exceeds ambient dimension {n}")
    if r < 1 or n < 1:
        raise ContractError(f"dimensions must be positive, got n={n}, r={r}")
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    q = q.copy()
    _fix_signs(q)
    return q


def derive_seed(seed: int, *salt: int) -> int:
    """Derive an independent 64-bit child seed from a base seed and salts."""
    ss = np.random.SeedSequence([int(seed) & (2**63 - 1), *[int(s) for s in salt]])
    return int(ss.generate_state(1, np.uint64)[0])
