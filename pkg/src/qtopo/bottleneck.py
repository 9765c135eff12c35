"""Bottleneck distance between persistence diagrams."""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .ph import PersistenceDiagram


def matched_cost(p, q) -> float:
    """l-infinity distance between two bars; inf - inf counts as 0."""
    (a, b), (c, d) = p, q
    if math.isinf(b) and math.isinf(d):
        death_gap = 0.0
    elif math.isinf(b) or math.isinf(d):
        return math.inf
    else:
        death_gap = abs(b - d)
    return max(abs(a - c), death_gap)


def diagonal_cost(p) -> float:
    """Cost of leaving a bar unmatched: half its length."""
    b, d = p
    return abs(d - b) / 2.0


def _pairs(P) -> np.ndarray:
    if isinstance(P, PersistenceDiagram):
        return P.pairs
    return np.asarray(P, dtype=float).reshape(-1, 2)


def _essential_distance(a: np.ndarray, b: np.ndarray) -> float:
    # on a line, matching sorted births minimises the largest gap
    if a.size != b.size:
        return math.inf
    if a.size == 0:
        return 0.0
    return float(np.abs(np.sort(a) - np.sort(b)).max())


def _perfect_matching_exists(C: np.ndarray, dP: np.ndarray, dQ: np.ndarray, t: float) -> bool:
    """Augmented bipartite graph at threshold t has a perfect matching.

    Left nodes: P points, then one diagonal copy per Q point.
    Right nodes: Q points, then one diagonal copy per P point.
    """
    p, q = C.shape
    rows, cols = np.nonzero(C <= t)
    r = [rows, np.arange(p)[dP <= t], p + np.arange(q)[dQ <= t]]
    c = [cols, q + np.arange(p)[dP <= t], np.arange(q)[dQ <= t]]
    # diagonal copies may always be matched with each other at zero cost
    rr, cc = np.meshgrid(p + np.arange(q), q + np.arange(p), indexing="ij")
    r.append(rr.ravel())
    c.append(cc.ravel())
    r, c = np.concatenate(r), np.concatenate(c)
    n = p + q
    G = csr_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(n, n))
    match = maximum_bipartite_matching(G, perm_type="column")
    return bool(np.all(match >= 0))


def _finite_bottleneck(P: np.ndarray, Q: np.ndarray) -> float:
    p, q = P.shape[0], Q.shape[0]
    if p == 0 and q == 0:
        return 0.0
    dP = (P[:, 1] - P[:, 0]) / 2.0
    dQ = (Q[:, 1] - Q[:, 0]) / 2.0
    C = np.maximum(np.abs(P[:, None, 0] - Q[None, :, 0]), np.abs(P[:, None, 1] - Q[None, :, 1]))
    cand = np.unique(np.concatenate([C.ravel(), dP, dQ]))
    lo, hi = 0, cand.size - 1
    # the largest candidate is always feasible (everything may go to the diagonal)
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_exists(C, dP, dQ, cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])


def bottleneck_distance(P, Q) -> float:
    A, B = _pairs(P), _pairs(Q)
    ia, ib = np.isinf(A[:, 1]), np.isinf(B[:, 1])
    ess = _essential_distance(A[ia, 0], B[ib, 0])
    if math.isinf(ess):
        return math.inf
    return max(ess, _finite_bottleneck(A[~ia], B[~ib]))


def diagram_set_distance(Ps, Qs) -> tuple[list[float], float]:
    """Per-degree bottleneck distances (missing degrees count as empty) and their max."""
    def by_degree(ds):
        return {d.degree: d.pairs for d in ds} if ds and isinstance(ds[0], PersistenceDiagram) \
            else dict(enumerate(_pairs(d) for d in ds))
    a, b = by_degree(list(Ps)), by_degree(list(Qs))
    top = max(list(a) + list(b), default=-1)
    empty = np.zeros((0, 2))
    per = [bottleneck_distance(a.get(k, empty), b.get(k, empty)) for k in range(top + 1)]
    return per, max(per, default=0.0)
