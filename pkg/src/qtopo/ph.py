"""Vietoris-Rips filtrations and persistent homology with Z/2 coefficients.

A simplex enters the filtration at its diameter (closed convention), so bars
are reported as half-open intervals [birth, death).

Degree 0 is computed with union-find.  Higher degrees use the persistent
cohomology of the coboundary matrix with clearing; simplices are addressed by
their combinatorial-number-system index so that cofacet positions can be found
with integer arithmetic.  A plain boundary-matrix reduction is kept as an
independent reference for small complexes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DEFAULT_SIMPLEX_CAP = 5_000_000
_CHUNK = 4096


class SimplexLimitError(RuntimeError):
    """The Vietoris-Rips complex would exceed the configured simplex cap."""


@dataclass(frozen=True)
class Simplex:
    vertices: tuple[int, ...]
    filtration: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


@dataclass
class PersistenceDiagram:
    degree: int
    pairs: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def __post_init__(self):
        p = np.asarray(self.pairs, dtype=float).reshape(-1, 2)
        if np.isnan(p).any() or np.any(p[:, 0] < 0) or np.any(p[:, 0] >= p[:, 1]):
            raise ValueError("pairs need 0 <= birth < death")
        if p.size:
            order = np.lexsort((p[:, 1], p[:, 0]))
            p = p[order]
        self.pairs = p

    def __len__(self) -> int:
        return self.pairs.shape[0]

    @property
    def finite(self) -> np.ndarray:
        return self.pairs[np.isfinite(self.pairs[:, 1])]

    @property
    def essential(self) -> np.ndarray:
        return self.pairs[~np.isfinite(self.pairs[:, 1]), 0]

    def scaled(self, lam: float) -> "PersistenceDiagram":
        return PersistenceDiagram(self.degree, lam * self.pairs)

    def lengths(self) -> np.ndarray:
        return self.pairs[:, 1] - self.pairs[:, 0]

    def __eq__(self, other) -> bool:
        return (isinstance(other, PersistenceDiagram) and self.degree == other.degree
                and self.pairs.shape == other.pairs.shape
                and bool(np.all(self.pairs == other.pairs)))

    def to_dict(self) -> dict:
        return {"degree": self.degree,
                "pairs": [[float(b), float(d) if math.isfinite(d) else "inf"] for b, d in self.pairs]}

    @classmethod
    def from_dict(cls, obj: dict) -> "PersistenceDiagram":
        pairs = [[float(b), math.inf if d == "inf" else float(d)] for b, d in obj["pairs"]]
        return cls(int(obj["degree"]), np.array(pairs, dtype=float).reshape(-1, 2))


def diagrams_to_json(dgms: list[PersistenceDiagram]) -> str:
    return json.dumps([d.to_dict() for d in dgms])


def diagrams_from_json(text: str) -> list[PersistenceDiagram]:
    return [PersistenceDiagram.from_dict(o) for o in json.loads(text)]


def barcode_to_csv(dgms: list[PersistenceDiagram]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["degree", "birth", "death"])
    for d in dgms:
        for b, e in d.pairs:
            w.writerow([d.degree, format(b, ".17g"), format(e, ".17g") if math.isfinite(e) else "inf"])
    return out.getvalue()


def barcode_from_csv(text: str, max_degree: int | None = None) -> list[PersistenceDiagram]:
    """Diagrams for degrees 0..max_degree (default: the largest degree present)."""
    rows = list(csv.DictReader(io.StringIO(text)))
    degrees = sorted({int(r["degree"]) for r in rows})
    top = max_degree if max_degree is not None else (degrees[-1] if degrees else -1)
    dgms = []
    for k in range(top + 1):
        pairs = [[float(r["birth"]), math.inf if r["death"] == "inf" else float(r["death"])]
                 for r in rows if int(r["degree"]) == k]
        dgms.append(PersistenceDiagram(k, np.array(pairs, dtype=float).reshape(-1, 2)))
    return dgms


def _binomials(n: int, k: int) -> np.ndarray:
    """Table B[a, b] = C(a, b) for 0 <= a <= n, 0 <= b <= k (int64)."""
    B = np.zeros((n + 2, k + 2), dtype=np.int64)
    B[:, 0] = 1
    for a in range(1, n + 2):
        B[a, 1:] = B[a - 1, 1:] + B[a - 1, :-1]
    return B


class FilteredComplex:
    """All simplices of dimension <= max_dim of the Vietoris-Rips filtration.

    Per dimension the simplices are held as a vertex array sorted by
    (filtration, lexicographic vertices); ``simplices`` exposes the global
    order (filtration, dimension, lexicographic).
    """

    def __init__(self, D: np.ndarray, max_dim: int, verts: list[np.ndarray], filt: list[np.ndarray]):
        self.D = D
        self.max_dim = max_dim
        self.verts = verts
        self.filt = filt
        self.n = D.shape[0]
        self._binom = _binomials(self.n, max_dim + 2)

    def __len__(self) -> int:
        return sum(v.shape[0] for v in self.verts)

    def count(self, dim: int) -> int:
        return self.verts[dim].shape[0] if dim <= self.max_dim else 0

    def count_at(self, dim: int, eps: float) -> int:
        """Number of dim-simplices with filtration <= eps."""
        return int(np.searchsorted(self.filt[dim], eps, side="right"))

    @cached_property
    def simplices(self) -> list[Simplex]:
        items = []
        for k in range(self.max_dim + 1):
            for v, f in zip(self.verts[k], self.filt[k]):
                items.append((float(f), k, tuple(int(i) for i in v)))
        items.sort()
        return [Simplex(v, f) for f, _, v in items]

    def index(self, verts: np.ndarray) -> np.ndarray:
        """Combinatorial-number-system index of each row of sorted vertices."""
        verts = np.atleast_2d(verts)
        k = verts.shape[1]
        return self._binom[verts, np.arange(1, k + 1)[None, :]].sum(axis=1)

    @cached_property
    def positions(self) -> list[np.ndarray]:
        """positions[k][index] = rank of that k-simplex in the dimension-k order."""
        out = []
        for k in range(self.max_dim + 1):
            pos = np.empty(int(self._binom[self.n, k + 1]), dtype=np.int64)
            pos[self.index(self.verts[k])] = np.arange(self.verts[k].shape[0])
            out.append(pos)
        return out

    def cofacet_positions(self, k: int, rows: np.ndarray) -> np.ndarray:
        """Sorted positions (in the (k+1) order) of the cofacets of given k-simplices."""
        V = self.verts[k][rows]
        m, kk = V.shape
        n = self.n
        mask = np.ones((m, n), dtype=bool)
        mask[np.arange(m)[:, None], V] = False
        W = np.nonzero(mask)[1].reshape(m, n - kk)
        # rank of each vertex inside the enlarged simplex
        shift = (V[:, None, :] > W[:, :, None]).astype(np.int64)
        slot = np.arange(1, kk + 1)[None, None, :] + shift
        idx = self._binom[V[:, None, :], slot].sum(axis=2)
        below = kk - shift.sum(axis=2)
        idx += self._binom[W, below + 1]
        P = self.positions[k + 1][idx]
        P.sort(axis=1)
        return P

    def facet_positions(self, k: int) -> np.ndarray:
        """(N_k, k+1) positions in the (k-1) order of the facets of each k-simplex."""
        V = self.verts[k]
        cols = [np.delete(V, i, axis=1) for i in range(k + 1)]
        return np.stack([self.positions[k - 1][self.index(c)] for c in cols], axis=1)

    def is_monotone(self) -> bool:
        """Every simplex has filtration >= each of its facets."""
        for k in range(1, self.max_dim + 1):
            F = self.facet_positions(k)
            if np.any(self.filt[k][:, None] < self.filt[k - 1][F]):
                return False
        return True


def rips_size(n: int, max_dim: int) -> int:
    return sum(math.comb(n, k + 1) for k in range(max_dim + 1))


def vietoris_rips(D, max_hom_degree: int, cap: int = DEFAULT_SIMPLEX_CAP) -> FilteredComplex:
    """Vietoris-Rips filtration with simplices up to dimension max_hom_degree + 1."""
    D = np.asarray(D, dtype=float)
    if max_hom_degree < 0:
        raise ValueError("max_hom_degree must be >= 0")
    n = D.shape[0]
    max_dim = min(max_hom_degree + 1, max(n - 1, 0))
    total = rips_size(n, max_dim)
    if total > cap:
        raise SimplexLimitError(f"Vietoris-Rips complex needs {total} simplices (cap {cap})")
    lex = np.arange(n, dtype=np.int64)[:, None]
    lex_f = np.zeros(n)
    verts, filt = [], []
    for k in range(max_dim + 1):
        if k > 0:
            last = lex[:, -1]
            reps = n - 1 - last
            parent = np.repeat(np.arange(lex.shape[0]), reps)
            first = np.cumsum(reps) - reps
            new = last[parent] + 1 + np.arange(parent.size) - first[parent]
            old = lex[parent]
            f = np.maximum(lex_f[parent], D[old, new[:, None]].max(axis=1))
            lex = np.hstack([old, new[:, None]])
            lex_f = f
        order = np.argsort(lex_f, kind="stable")
        verts.append(lex[order])
        filt.append(lex_f[order])
    verts += [np.zeros((0, k + 1), dtype=np.int64) for k in range(max_dim + 1, max_hom_degree + 2)]
    filt += [np.zeros(0) for _ in range(max_dim + 1, max_hom_degree + 2)]
    return FilteredComplex(D, max_hom_degree + 1, verts, filt)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a


def _degree0(K: FilteredComplex) -> tuple[list[tuple[float, float]], np.ndarray]:
    """H0 bars (elder rule) and the boolean mask of edges that merge components."""
    uf = _UnionFind(K.n)
    E = K.verts[1] if K.max_dim >= 1 else np.zeros((0, 2), dtype=np.int64)
    fE = K.filt[1] if K.max_dim >= 1 else np.zeros(0)
    negative = np.zeros(E.shape[0], dtype=bool)
    bars = []
    for i, (a, b) in enumerate(E.tolist()):
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        # all vertices are born at 0; keep the smaller root as the elder
        young, old = max(ra, rb), min(ra, rb)
        uf.parent[young] = old
        negative[i] = True
        if fE[i] > 0:
            bars.append((0.0, float(fE[i])))
    roots = {uf.find(v) for v in range(K.n)}
    bars += [(0.0, math.inf)] * len(roots)
    return bars, negative


def _cohomology_degree(K: FilteredComplex, k: int, cleared: np.ndarray):
    """Bars of degree k and the mask of (k+1)-simplices used as pivots."""
    N = K.count(k)
    fk, fk1 = K.filt[k], K.filt[k + 1]
    pivot_owner: dict[int, np.ndarray] = {}
    negative_next = np.zeros(K.count(k + 1), dtype=bool)
    bars = []
    rows = np.nonzero(~cleared)[0][::-1]
    for start in range(0, rows.size, _CHUNK):
        chunk = rows[start:start + _CHUNK]
        P = K.cofacet_positions(k, chunk) if K.n - (k + 1) > 0 else np.zeros((chunk.size, 0), np.int64)
        for r, col in zip(chunk.tolist(), P):
            while col.size:
                owner = pivot_owner.get(int(col[0]))
                if owner is None:
                    break
                col = np.setxor1d(col, owner, assume_unique=True)
            if col.size:
                p = int(col[0])
                pivot_owner[p] = col
                negative_next[p] = True
                if fk1[p] > fk[r]:
                    bars.append((float(fk[r]), float(fk1[p])))
            else:
                bars.append((float(fk[r]), math.inf))
    return bars, negative_next


def persistence(K: FilteredComplex, max_hom_degree: int | None = None) -> list[PersistenceDiagram]:
    """Persistence diagrams of degrees 0..max_hom_degree (default: K.max_dim - 1)."""
    top = K.max_dim - 1 if max_hom_degree is None else max_hom_degree
    if top > K.max_dim - 1:
        raise ValueError("complex is not built high enough for the requested degree")
    bars0, cleared = _degree0(K)
    dgms = [PersistenceDiagram(0, bars0)]
    for k in range(1, top + 1):
        bars, cleared = _cohomology_degree(K, k, cleared)
        dgms.append(PersistenceDiagram(k, bars))
    return dgms


def diagrams(D, max_hom_degree: int, cap: int = DEFAULT_SIMPLEX_CAP) -> list[PersistenceDiagram]:
    return persistence(vietoris_rips(D, max_hom_degree, cap), max_hom_degree)


def betti(D, eps: float, degree: int, max_hom_degree: int) -> int:
    """Number of bars of the given degree alive at scale eps (birth <= eps < death)."""
    if degree > max_hom_degree or degree < 0:
        raise ValueError("degree must lie in [0, max_hom_degree]")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    P = diagrams(D, max_hom_degree)[degree].pairs
    return int(np.sum((P[:, 0] <= eps) & (eps < P[:, 1])))


def boundary_matrix_persistence(K: FilteredComplex) -> list[PersistenceDiagram]:
    """Reference computation: column reduction of the full Z/2 boundary matrix.

    Meant for small complexes; the pairing is read off the reduced matrix in
    the global (filtration, dimension, lexicographic) order.
    """
    S = K.simplices
    where = {s.vertices: i for i, s in enumerate(S)}
    cols = []
    for s in S:
        v = s.vertices
        faces = [where[v[:i] + v[i + 1:]] for i in range(len(v))] if len(v) > 1 else []
        cols.append(set(faces))
    low_owner: dict[int, int] = {}
    paired = set()
    bars = {k: [] for k in range(K.max_dim)}
    for j, col in enumerate(cols):
        while col:
            low = max(col)
            if low not in low_owner:
                break
            col ^= cols[low_owner[low]]
        if col:
            low = max(col)
            low_owner[low] = j
            paired.update((low, j))
            k = S[low].dim
            if k < K.max_dim and S[j].filtration > S[low].filtration:
                bars[k].append((S[low].filtration, S[j].filtration))
    for i, s in enumerate(S):
        if i not in paired and s.dim < K.max_dim:
            bars[s.dim].append((s.filtration, math.inf))
    return [PersistenceDiagram(k, bars[k]) for k in range(K.max_dim)]
