"""Classical, stress-minimising and quantum multidimensional scaling."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .metric import diameter, distortion, gram_from_distances, stress
from .quantum import Metric, distance_from_fidelity, pure_fidelity_matrix

EIG_TOL = 1e-10
DEFAULT_RATES = (1e-3, 1e-4)
STALL_WINDOW = 100
STALL_REL = 1e-9
QMDS_MAX_ITER = 200_000
TRACE_EVERY = 100


@dataclass
class EmbeddingResult:
    """Output of an MDS run.

    ``coordinates`` is an (n, k) real array for Euclidean embeddings and an
    (n, d) complex array of unit state vectors for quantum embeddings.
    """

    coordinates: np.ndarray
    objective_trace: list[tuple[int, float]]
    final_stress: float
    final_distortion: float
    weight: float = 1.0
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self, every: int = TRACE_EVERY) -> str:
        C = np.asarray(self.coordinates)
        if np.iscomplexobj(C):
            coords = [{"dim": int(C.shape[1]), "re": r.real.tolist(), "im": r.imag.tolist()} for r in C]
        else:
            coords = C.tolist()
        trace = [[int(i), float(v)] for i, v in self.objective_trace if i % every == 0]
        if self.objective_trace and (not trace or trace[-1][0] != self.objective_trace[-1][0]):
            trace.append([int(self.objective_trace[-1][0]), float(self.objective_trace[-1][1])])
        return json.dumps({
            "coordinates": coords,
            "weight": self.weight,
            "final_stress": self.final_stress,
            "final_distortion": self.final_distortion,
            "seed": self.seed,
            "objective_trace": trace,
            "extra": {k: v for k, v in self.extra.items() if isinstance(v, (int, float, str, bool, list))},
        })

    @staticmethod
    def from_json(text: str) -> "EmbeddingResult":
        obj = json.loads(text)
        coords = obj["coordinates"]
        if coords and isinstance(coords[0], dict):
            C = np.array([np.array(c["re"]) + 1j * np.array(c["im"]) for c in coords])
        else:
            C = np.array(coords, dtype=float)
        return EmbeddingResult(C, [tuple(t) for t in obj["objective_trace"]], obj["final_stress"],
                               obj["final_distortion"], obj["weight"], obj["seed"], obj.get("extra", {}))


def euclidean_distances(Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    diff = Y[:, None, :] - Y[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def classical_mds(D, target_dim: int | None = None) -> EmbeddingResult:
    """Torgerson scaling: coordinates sqrt(Lambda) Q^T from the positive spectrum of G."""
    D = np.asarray(D, dtype=float)
    if D.shape[0] < 2:
        raise ValueError("classical MDS needs at least two points")
    G = gram_from_distances(D)
    lam, Q = np.linalg.eigh(G)
    order = np.argsort(lam)[::-1]
    lam, Q = lam[order], Q[:, order]
    keep = lam > EIG_TOL
    if not np.any(keep):
        raise ValueError("Gram matrix has no positive eigenvalues")
    lam_pos, Q_pos = lam[keep], Q[:, keep]
    if target_dim is not None:
        lam_pos, Q_pos = lam_pos[:target_dim], Q_pos[:, :target_dim]
    Y = Q_pos * np.sqrt(lam_pos)
    Y = Y - Y.mean(axis=0)
    DY = euclidean_distances(Y)
    return EmbeddingResult(Y, [], stress(D, DY), distortion(D, DY),
                           extra={"eigenvalues": lam.tolist()})


def _descend(params: np.ndarray, objective: Callable, gradient: Callable, project: Callable,
             rates, max_iter: int, trace_every: int):
    """Gradient descent that only accepts non-increasing steps.

    A rejected step halves the current rate.  A stage ends when the relative
    decrease over the last STALL_WINDOW iterations drops below STALL_REL; the
    run stops after the last stage stalls or at max_iter.
    """
    f = objective(params)
    trace = [(0, f)]
    history = [f]
    stage, lr = 0, rates[0]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if f == 0.0:
            converged = True
            break
        cand = project(params - lr * gradient(params))
        fc = objective(cand)
        if fc <= f:
            params, f = cand, fc
        else:
            lr *= 0.5
        history.append(f)
        if it % trace_every == 0:
            trace.append((it, f))
        if len(history) > STALL_WINDOW:
            old = history[-STALL_WINDOW - 1]
            if old - f <= STALL_REL * max(old, 1e-300):
                stage += 1
                if stage >= len(rates):
                    converged = True
                    break
                lr = rates[stage]
                history = [f]
    if trace[-1][0] != it:
        trace.append((it, f))
    return params, f, trace, converged, it


def stress_objective(Y, D) -> float:
    d = euclidean_distances(Y)
    iu = np.triu_indices(D.shape[0], 1)
    return float(((D[iu] - d[iu]) ** 2).sum())


def stress_gradient(Y, D) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    d = euclidean_distances(Y)
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(d > 0, -2.0 * (D - d) / d, 0.0)
    np.fill_diagonal(coef, 0.0)
    return coef.sum(axis=1)[:, None] * Y - coef @ Y


def stress_mds(D, dim: int = 2, init=None, seed: int | None = None, rates=DEFAULT_RATES,
               max_iter: int = 100_000, trace_every: int = TRACE_EVERY) -> EmbeddingResult:
    """Minimise sum_{j<k} (D_jk - |y_j - y_k|)^2 by gradient descent.

    ``init`` defaults to the classical MDS coordinates (padded or truncated to
    ``dim``); an integer ``seed`` without ``init`` starts from Gaussian noise.
    """
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if init is not None:
        Y0 = np.array(init, dtype=float).reshape(n, dim)
    elif seed is not None:
        Y0 = np.random.default_rng(seed).normal(size=(n, dim))
    else:
        C = classical_mds(D).coordinates[:, :dim]
        Y0 = np.zeros((n, dim))
        Y0[:, : C.shape[1]] = C
    Y, f, trace, converged, it = _descend(
        Y0, lambda Y: stress_objective(Y, D), lambda Y: stress_gradient(Y, D), lambda Y: Y,
        rates, max_iter, trace_every)
    Y = Y - Y.mean(axis=0)
    DY = euclidean_distances(Y)
    return EmbeddingResult(Y, trace, stress(D, DY), distortion(D, DY), seed=seed,
                           extra={"converged": converged, "iterations": it})


# quantum MDS


def normalize_rows(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    return A / np.linalg.norm(A, axis=1, keepdims=True)


def haar_states(n: int, dim: int, seed: int | None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return normalize_rows(rng.normal(size=(n, dim)) + 1j * rng.normal(size=(n, dim)))


def qmds_objective(A, D, w: float) -> float:
    """sum_{j<k} (D_jk - w (1 - |<x_j|x_k>|^2))^2 with x_j = a_j/|a_j|."""
    F = pure_fidelity_matrix(normalize_rows(A))
    iu = np.triu_indices(D.shape[0], 1)
    return float(((D[iu] - w * (1.0 - F[iu])) ** 2).sum())


def qmds_gradient(A, D, w: float) -> np.ndarray:
    """Gradient w.r.t. the unnormalised amplitudes, as d/dRe + i d/dIm."""
    A = np.asarray(A, dtype=complex)
    nrm = np.linalg.norm(A, axis=1, keepdims=True)
    X = A / nrm
    S = X @ X.conj().T  # S[j, k] = <x_k|x_j>
    R = D - w * (1.0 - np.abs(S) ** 2)
    np.fill_diagonal(R, 0.0)
    gX = (4.0 * w * R * S) @ X
    radial = np.real(np.sum(X.conj() * gX, axis=1, keepdims=True))
    return (gX - X * radial) / nrm


def exact_fs_stress(states, D, weight: float) -> float:
    S = np.asarray(states, dtype=complex)
    D = np.asarray(D, dtype=float)
    if S.shape[0] != D.shape[0]:
        raise ValueError("state count does not match the distance matrix")
    DFS = distance_from_fidelity(pure_fidelity_matrix(S), Metric.FUBINI_STUDY)
    np.fill_diagonal(DFS, 0.0)
    return float(np.linalg.norm(D - weight * DFS))


def qmds(D, hilbert_dim: int = 2, weight: float | None = None, rates=DEFAULT_RATES,
         seed: int | None = 0, max_iter: int = QMDS_MAX_ITER, init=None,
         trace_every: int = TRACE_EVERY) -> EmbeddingResult:
    """Embed a finite metric space into pure states of C^hilbert_dim.

    Fubini-Study distance is replaced by the quadratic surrogate 1 - |<x|y>|^2
    during optimisation.  ``final_stress`` is the exact Fubini-Study stress
    |D - w D_FS|_F and ``final_distortion`` is max |D/w - D_FS|; ``extra``
    also carries the surrogate objective and the mean per-pair surrogate
    residual ((D - w(1-F))/w)^2.  The trace records the objective for D/w.
    """
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if hilbert_dim < 2:
        raise ValueError("hilbert_dim must be >= 2")
    w = diameter(D) if weight is None else float(weight)
    if not w > 0:
        raise ValueError("weight must be positive")
    A0 = haar_states(n, hilbert_dim, seed) if init is None else normalize_rows(init)
    # descend on D/w with unit weight so the learning rates do not depend on the data scale
    Dn = D / w
    A, f, trace, converged, it = _descend(
        A0, lambda A: qmds_objective(A, Dn, 1.0), lambda A: qmds_gradient(A, Dn, 1.0),
        normalize_rows, rates, max_iter, trace_every)
    X = normalize_rows(A)
    F = pure_fidelity_matrix(X)
    DFS = distance_from_fidelity(F, Metric.FUBINI_STUDY)
    np.fill_diagonal(DFS, 0.0)
    iu = np.triu_indices(n, 1)
    mean_residual = float(np.mean(((D[iu] - w * (1.0 - F[iu])) / w) ** 2)) if n > 1 else 0.0
    return EmbeddingResult(
        X, trace, exact_fs_stress(X, D, w), distortion(D / w, DFS), weight=w, seed=seed,
        extra={"surrogate_stress": w * w * f, "normalized_surrogate_stress": f, "mean_residual": mean_residual,
               "converged": converged, "iterations": it})
