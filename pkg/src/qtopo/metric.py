"""Finite metric spaces and scalar comparisons between two distance matrices.

Point clouds are ``(n, m)`` float arrays and distance matrices are ``(n, n)``
float arrays; both are validated on entry and never mutated.
"""

from __future__ import annotations

import json
import math
from typing import Callable, Iterable

import numpy as np

GOLDEN_TOL = 1e-9
GOLDEN_MAX_ITER = 200
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def as_point_cloud(points) -> np.ndarray:
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"point cloud must be (n, m) with n, m >= 1, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("point cloud coordinates must be finite")
    return X


def as_distance_matrix(D, atol: float = 1e-9) -> np.ndarray:
    """Validate symmetry, zero diagonal and nonnegativity; return a float copy."""
    D = np.array(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"distance matrix must be square, got {D.shape}")
    if not np.all(np.isfinite(D)):
        raise ValueError("distance matrix entries must be finite")
    if np.any(np.abs(np.diag(D)) > atol):
        raise ValueError("distance matrix diagonal must be zero")
    if np.any(np.abs(D - D.T) > atol * max(1.0, float(np.abs(D).max(initial=0.0)))):
        raise ValueError("distance matrix must be symmetric")
    if np.any(D < -atol):
        raise ValueError("distance matrix entries must be nonnegative")
    return D


def satisfies_triangle_inequality(D, tol: float = 1e-9) -> bool:
    """Opt-in O(n^3) check that D[i, j] <= D[i, k] + D[k, j] for all triples."""
    D = np.asarray(D, dtype=float)
    for k in range(D.shape[0]):
        if np.any(D > D[:, k][:, None] + D[k, :][None, :] + tol):
            return False
    return True


def _pairwise(X: np.ndarray, p: float) -> np.ndarray:
    diff = np.abs(X[:, None, :] - X[None, :, :])
    if math.isinf(p):
        return diff.max(axis=2)
    if p == 1:
        return diff.sum(axis=2)
    if p == 2:
        return np.sqrt((diff**2).sum(axis=2))
    return (diff**p).sum(axis=2) ** (1.0 / p)


def euclidean_distance_matrix(cloud) -> np.ndarray:
    return _pairwise(as_point_cloud(cloud), 2)


def lp_distance_matrix(cloud, p: float) -> np.ndarray:
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return _pairwise(as_point_cloud(cloud), p)


def diameter(D) -> float:
    D = np.asarray(D, dtype=float)
    return float(D.max()) if D.size else 0.0


def rescale(D, lam: float) -> np.ndarray:
    if not lam > 0:
        raise ValueError(f"scale factor must be positive, got {lam}")
    return lam * np.asarray(D, dtype=float)


def _same_shape(D_X, D_Y) -> tuple[np.ndarray, np.ndarray]:
    A = np.asarray(D_X, dtype=float)
    B = np.asarray(D_Y, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"size mismatch: {A.shape} vs {B.shape}")
    return A, B


def distortion(D_X, D_Y) -> float:
    """Largest absolute entrywise difference (the l-infinity distance)."""
    A, B = _same_shape(D_X, D_Y)
    return float(np.abs(A - B).max()) if A.size else 0.0


def stress(D_X, D_Y) -> float:
    A, B = _same_shape(D_X, D_Y)
    return float(np.linalg.norm(A - B))


def centering_matrix(n: int) -> np.ndarray:
    return np.eye(n) - np.full((n, n), 1.0 / n)


def gram_from_distances(D) -> np.ndarray:
    """Double-centred Gram matrix -1/2 C D^2 C."""
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    C = centering_matrix(n)
    G = -0.5 * C @ (D * D) @ C
    return 0.5 * (G + G.T)


def strain(D_X, D_Y) -> float:
    A, B = _same_shape(D_X, D_Y)
    return float(np.linalg.norm(gram_from_distances(A) - gram_from_distances(B)))


def _index_map(f, n_dom: int, n_cod: int, name: str) -> np.ndarray:
    f = np.asarray(f, dtype=int)
    if f.shape != (n_dom,):
        raise ValueError(f"{name} must map all {n_dom} points")
    if f.size and (f.min() < 0 or f.max() >= n_cod):
        raise ValueError(f"{name} has out-of-range targets")
    return f


def codistortion(D_X, D_Y, f, g) -> float:
    """max over i in X, j in Y of |D_X[i, g(j)] - D_Y[f(i), j]|."""
    A = np.asarray(D_X, dtype=float)
    B = np.asarray(D_Y, dtype=float)
    f = _index_map(f, A.shape[0], B.shape[0], "f")
    g = _index_map(g, B.shape[0], A.shape[0], "g")
    return float(np.abs(A[:, g] - B[f, :]).max())


def gh_upper_bound(D_X, D_Y, R: Iterable[tuple[int, int]] | None = None) -> float:
    """Half the distortion of a correspondence; identity if R is None."""
    A = np.asarray(D_X, dtype=float)
    B = np.asarray(D_Y, dtype=float)
    if R is None:
        return 0.5 * distortion(A, B)
    pairs = np.array(sorted(set((int(i), int(j)) for i, j in R)), dtype=int).reshape(-1, 2)
    nx, ny = A.shape[0], B.shape[0]
    if pairs.size == 0 or pairs.min() < 0 or pairs[:, 0].max() >= nx or pairs[:, 1].max() >= ny:
        raise ValueError("correspondence indices out of range")
    if len(set(pairs[:, 0])) != nx or len(set(pairs[:, 1])) != ny:
        raise ValueError("correspondence must cover every point of both spaces")
    I, J = pairs[:, 0], pairs[:, 1]
    return 0.5 * float(np.abs(A[np.ix_(I, I)] - B[np.ix_(J, J)]).max())


def golden_section(fun: Callable[[float], float], lo: float, hi: float,
                   tol: float = GOLDEN_TOL, max_iter: int = GOLDEN_MAX_ITER) -> float:
    """Minimiser of a unimodal function on [lo, hi] (relative tolerance)."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a), abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
    # the bracket ends are candidates too (piecewise-linear minima sit on kinks)
    cands = [a, b, c, d, 0.5 * (a + b)]
    return min(cands, key=fun)


def _polish_kink(A: np.ndarray, B: np.ndarray, mu: float, obj: Callable[[float], float]) -> float:
    """Move mu onto the crossing of the active over- and under-estimate lines.

    max|A - mu B| is piecewise linear, so its minimum is such a crossing; a
    few exchange steps from the golden-section estimate land on it exactly.
    """
    a, b = A.ravel(), B.ravel()
    best = obj(mu)
    for _ in range(50):
        r = a - mu * b
        i, j = int(np.argmax(r)), int(np.argmin(r))
        if b[i] + b[j] <= 0:
            break
        cand = (a[i] + a[j]) / (b[i] + b[j])
        fc = obj(cand)
        if not fc < best:
            break
        mu, best = cand, fc
    return mu


def scale_free_distortion(D_X, D_Y) -> tuple[float, float]:
    """Minimise max|D_X - mu D_Y| over mu >= 0.

    Returns ``(value, lam)`` with ``lam = 1/mu``; ``lam = inf`` flags the
    degenerate optimum mu = 0, where the value is the diameter of D_X.
    """
    A, B = _same_shape(D_X, D_Y)
    pos = B[B > 0]
    if pos.size == 0:
        return diameter(A), math.inf
    hi = 2.0 * diameter(A) / float(pos.min())
    if hi == 0.0:
        return 0.0, math.inf

    def obj(mu: float) -> float:
        return float(np.abs(A - mu * B).max())

    mu = _polish_kink(A, B, golden_section(obj, 0.0, hi), obj)
    val = obj(mu)
    if val >= obj(0.0):
        mu, val = 0.0, obj(0.0)
    return val, (math.inf if mu == 0.0 else 1.0 / mu)


def optimal_weight(D_X, D_Y, objective: str = "max") -> tuple[float, float]:
    """Best nonnegative scalar w for D_X ~ w D_Y; returns ``(w, residual)``."""
    A, B = _same_shape(D_X, D_Y)
    if not np.any(B != 0):
        raise ValueError("D_Y is identically zero")
    if objective == "max":
        def obj(w: float) -> float:
            return float(np.abs(A - w * B).max())
        pos = B[B > 0]
        hi = 2.0 * max(diameter(A), 1e-300) / float(pos.min())
        w = _polish_kink(A, B, golden_section(obj, 0.0, hi), obj)
        return w, obj(w)
    if objective == "frobenius":
        # least squares has a closed form; clip to w >= 0
        w = max(0.0, float((A * B).sum() / (B * B).sum()))
        return w, float(np.linalg.norm(A - w * B))
    raise ValueError(f"unknown objective {objective!r}")


# serialisation


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def distance_matrix_to_csv(D) -> str:
    D = np.asarray(D, dtype=float)
    return "".join(",".join(_fmt(v) for v in row) + "\n" for row in D)


def distance_matrix_from_csv(text: str) -> np.ndarray:
    rows = [line for line in text.splitlines() if line.strip()]
    D = np.array([[float(v) for v in line.split(",")] for line in rows], dtype=float)
    return as_distance_matrix(D.reshape(len(rows), -1))


def distance_matrix_to_json(D) -> str:
    D = np.asarray(D, dtype=float)
    return json.dumps({"n": int(D.shape[0]), "entries": D.tolist()})


def distance_matrix_from_json(text: str) -> np.ndarray:
    obj = json.loads(text)
    D = np.array(obj["entries"], dtype=float).reshape(obj["n"], obj["n"])
    return as_distance_matrix(D)

