import numpy as np
import pytest

from sharedsvd import SignalSpec, SingularVectorId


def worked_example_spec(alpha=3.0, beta=4.0, n=12, p1=10, p2=10, seed=0):
    """Two shared vectors (2a, a) / (2b, b) plus one strong unshared vector in
    each matrix at (3/2) and (1/2) of the combined strength, so the stacked
    order interleaves shared and unshared types."""
    s = np.hypot(alpha, beta)
    vectors = (
        SingularVectorId("shared", "u1"),
        SingularVectorId("shared", "u2"),
        SingularVectorId("unshared", "u1*", owner=1),
        SingularVectorId("unshared", "u2*", owner=2),
    )
    values = {
        (1, "u1"): 2 * alpha, (2, "u1"): 2 * beta,
        (1, "u2"): alpha, (2, "u2"): beta,
        (1, "u1*"): 1.5 * s, (2, "u2*"): 0.5 * s,
    }
    return SignalSpec(n=n, dims=(p1, p2), vectors=vectors, values=values, seed=seed)


def strong_unshared_spec(sigma=60.0, alpha=10.0, beta=10.0, n=12, p1=15, p2=15, seed=0,
                         sigma2=None):
    """One strong unshared vector per matrix dominating the shared one.

    With the default ``sigma2=beta`` matrix 2 has a tied pair (the shared
    direction is individually non-identifiable there); pass a distinct
    ``sigma2`` for a tie-free strong-unshared scenario. Stacked order is
    (u1*, u, u2*) provided sigma > hypot(alpha, beta) > sigma2."""
    sigma2 = beta if sigma2 is None else sigma2
    vectors = (
        SingularVectorId("unshared", "u1*", owner=1),
        SingularVectorId("shared", "u"),
        SingularVectorId("unshared", "u2*", owner=2),
    )
    values = {(1, "u1*"): sigma, (1, "u"): alpha, (2, "u"): beta, (2, "u2*"): sigma2}
    return SignalSpec(n=n, dims=(p1, p2), vectors=vectors, values=values, seed=seed)


def scenario2_spec(n=20, p1=30, p2=30, seed=0):
    """Tie-free strong-unshared scenario: both matrices put a large unshared
    value above the shared one, stacked order (u1*, u2*, u)."""
    vectors = (
        SingularVectorId("unshared", "u1*", owner=1),
        SingularVectorId("unshared", "u2*", owner=2),
        SingularVectorId("shared", "u"),
    )
    values = {(1, "u1*"): 300.0, (2, "u2*"): 260.0, (1, "u"): 30.0, (2, "u"): 34.0}
    return SignalSpec(n=n, dims=(p1, p2), vectors=vectors, values=values, seed=seed)


def random_orthogonal_spec(rng, n=16, p1=18, p2=18, r=2, k1=2, k2=2, lo=2.0, hi=40.0):
    """Random orthogonal-geometry spec with well-separated singular values in
    the stacked matrix and in each individual matrix."""
    total = r + k1 + k2
    for _ in range(100):
        stacked = np.geomspace(hi, lo, total) * rng.uniform(0.97, 1.03, size=total)
        stacked = np.sort(stacked)[::-1]
        order = rng.permutation(total)   # which stacked slot each vector takes
        vectors = []
        values = {}
        slot = iter(order)
        for j in range(r):
            lab = f"s{j}"
            vectors.append(SingularVectorId("shared", lab))
            v = stacked[next(slot)]
            f = rng.uniform(0.3, 0.7)
            values[(1, lab)] = float(np.sqrt(f) * v)
            values[(2, lab)] = float(np.sqrt(1 - f) * v)
        for j in range(k1):
            lab = f"a{j}"
            vectors.append(SingularVectorId("unshared", lab, owner=1))
            values[(1, lab)] = float(stacked[next(slot)])
        for j in range(k2):
            lab = f"b{j}"
            vectors.append(SingularVectorId("unshared", lab, owner=2))
            values[(2, lab)] = float(stacked[next(slot)])
        spec = SignalSpec(n=n, dims=(p1, p2), vectors=tuple(vectors), values=values,
                          seed=int(rng.integers(0, 2**31)))
        ok = True
        for i in (1, 2):
            vals = np.sort(spec.matrix_values(i))[::-1]
            if np.any(vals[:-1] / vals[1:] < 1.01):
                ok = False
        if np.any(stacked[:-1] / stacked[1:] < 1.01):
            ok = False
        if ok:
            return spec
    raise RuntimeError("could not draw a well-separated spec")


def explicit_blocks(rng, n, r1s, r2s, deficient=False):
    """Unshared direction matrix: orthonormal within each owner block,
    correlated across blocks; optionally rank-deficient overall."""
    q1 = np.linalg.qr(rng.standard_normal((n, r1s)))[0]
    raw = 0.6 * q1 @ rng.standard_normal((r1s, r2s)) + rng.standard_normal((n, r2s))
    q2 = np.linalg.qr(raw)[0]
    if deficient:
        q2 = np.linalg.qr(np.column_stack([q1[:, 0], q2[:, 1:]]))[0]
    return np.column_stack([q1, q2])


def explicit_geometry_spec(rng, n=14, p1=16, p2=15, r=2, r1s=2, r2s=2, deficient=False):
    m = explicit_blocks(rng, n, r1s, r2s, deficient=deficient)
    vectors = []
    values = {}
    vals = np.sort(rng.uniform(1.5, 12.0, size=2 * r + r1s + r2s))[::-1]
    vals = vals * (1 + 0.02 * np.arange(len(vals)))
    it = iter(vals)
    for j in range(r):
        lab = f"s{j}"
        vectors.append(SingularVectorId("shared", lab))
        values[(1, lab)] = float(next(it))
        values[(2, lab)] = float(next(it))
    for j in range(r1s):
        lab = f"a{j}"
        vectors.append(SingularVectorId("unshared", lab, owner=1))
        values[(1, lab)] = float(next(it))
    for j in range(r2s):
        lab = f"b{j}"
        vectors.append(SingularVectorId("unshared", lab, owner=2))
        values[(2, lab)] = float(next(it))
    return SignalSpec(n=n, dims=(p1, p2), vectors=tuple(vectors), values=values,
                      unshared_geometry="explicit", explicit_unshared=m,
                      seed=int(rng.integers(0, 2**31)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
