"""Pure and mixed qubit-register states, fidelities and state-space distances.

All distance conventions put the maximum of the fidelity-based metrics at 1;
the trace distance is the full Schatten-1 norm (no factor 1/2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

NORM_TOL = 1e-10
EIG_CLAMP = 1e-10


class Metric(str, Enum):
    TRACE = "trace"
    HILBERT_SCHMIDT = "hilbert-schmidt"
    SCHATTEN = "schatten"
    BURES_FIDELITY = "bures-fidelity"
    BURES_ANGLE = "bures-angle"
    HELLINGER = "hellinger"
    WIGNER_YANASE = "wigner-yanase"
    FUBINI_STUDY = "fubini-study"


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    shots: int = 0


def pure_state(amplitudes) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex).ravel()
    if psi.size < 1:
        raise ValueError("state must have dimension >= 1")
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise ValueError("pure state must have unit norm")
    return psi


def density_matrix(entries) -> np.ndarray:
    rho = np.asarray(entries, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.linalg.norm(rho - rho.conj().T) > NORM_TOL:
        raise ValueError("density matrix must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > NORM_TOL:
        raise ValueError("density matrix must have unit trace")
    if np.linalg.eigvalsh(rho).min() < -EIG_CLAMP:
        raise ValueError("density matrix must be positive semidefinite")
    return rho


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def is_pure_vector(a) -> bool:
    return np.asarray(a).ndim == 1


def _as_rho(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return projector(a) if a.ndim == 1 else a


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


def _check_dims(a, b) -> None:
    if np.shape(a)[0] != np.shape(b)[0]:
        raise ValueError(f"dimension mismatch: {np.shape(a)[0]} vs {np.shape(b)[0]}")


def _psd_eig(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    if w.min(initial=0.0) < -EIG_CLAMP:
        raise ValueError("matrix is not positive semidefinite")
    # eigenvalues below the solver's resolution are zeros blurred by rounding
    floor = w.size * np.finfo(float).eps * max(abs(w).max(initial=0.0), 1.0)
    return np.where(w > floor, w, 0.0), V


def psd_sqrt(H) -> np.ndarray:
    w, V = _psd_eig(np.asarray(H, dtype=complex))
    return (V * np.sqrt(w)) @ V.conj().T


def overlap(psi, phi) -> complex:
    """Inner product <psi|phi>."""
    _check_dims(psi, phi)
    return complex(np.vdot(psi, phi))


def fidelity_pure(psi, phi) -> float:
    return _clamp01(abs(overlap(psi, phi)) ** 2)


def _simplex(p, tol: float = 1e-9) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > tol:
        raise ValueError("not a probability vector")
    return np.clip(p, 0.0, None)


def fidelity_diagonal(p, q) -> float:
    p, q = _simplex(p), _simplex(q)
    _check_dims(p, q)
    return _clamp01(np.sqrt(p * q).sum() ** 2)


def fidelity_mixed(rho, sigma) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    rho, sigma = _as_rho(rho), _as_rho(sigma)
    _check_dims(rho, sigma)
    s = psd_sqrt(rho)
    w, _ = _psd_eig(s @ sigma @ s)
    return _clamp01(np.sqrt(w).sum() ** 2)


def affinity(a, b) -> float:
    """Bhattacharyya coefficient Tr[sqrt(rho) sqrt(sigma)]; equals F for pure states."""
    _check_dims(a, b)
    if is_pure_vector(a) and is_pure_vector(b):
        return fidelity_pure(a, b)
    A, B = psd_sqrt(_as_rho(a)), psd_sqrt(_as_rho(b))
    return _clamp01(np.trace(A @ B).real)


def fidelity(a, b) -> float:
    if is_pure_vector(a) and is_pure_vector(b):
        return fidelity_pure(a, b)
    if is_pure_vector(a) or is_pure_vector(b):
        psi, rho = (a, b) if is_pure_vector(a) else (b, a)
        _check_dims(psi, rho)
        psi = np.asarray(psi, dtype=complex)
        return _clamp01(np.vdot(psi, np.asarray(rho) @ psi).real)
    return fidelity_mixed(a, b)


def _schatten(a, b, p: float) -> float:
    ev = np.abs(np.linalg.eigvalsh(_as_rho(a) - _as_rho(b)))
    if math.isinf(p):
        return float(ev.max())
    return float((ev**p).sum() ** (1.0 / p))


def _acos01(x: float) -> float:
    return (2.0 / math.pi) * math.acos(max(-1.0, min(1.0, x)))


def state_distance(a, b, metric: Metric | str, p: float = 2.0) -> float:
    """Distance between two states given as state vectors or density matrices.

    ``p`` is used only by the Schatten metric.
    """
    metric = Metric(metric)
    _check_dims(a, b)
    if metric is Metric.TRACE:
        return _schatten(a, b, 1)
    if metric is Metric.HILBERT_SCHMIDT:
        return _schatten(a, b, 2)
    if metric is Metric.SCHATTEN:
        if not p >= 1:
            raise ValueError("Schatten p must be >= 1")
        return _schatten(a, b, p)
    if metric is Metric.FUBINI_STUDY:
        if not (is_pure_vector(a) and is_pure_vector(b)):
            raise ValueError("Fubini-Study distance needs pure state vectors")
        return _acos01(abs(overlap(a, b)))
    if metric is Metric.BURES_FIDELITY:
        return math.sqrt(max(0.0, 1.0 - math.sqrt(fidelity(a, b))))
    if metric is Metric.BURES_ANGLE:
        return _acos01(math.sqrt(fidelity(a, b)))
    B = affinity(a, b)
    if metric is Metric.HELLINGER:
        return math.sqrt(max(0.0, 1.0 - B))
    return _acos01(B)


def distance_from_fidelity(F: np.ndarray, metric: Metric | str) -> np.ndarray:
    """Vectorised fidelity-based distances for pure states (where B = F)."""
    metric = Metric(metric)
    F = np.clip(np.asarray(F, dtype=float), 0.0, 1.0)
    if metric is Metric.TRACE:
        return 2.0 * np.sqrt(1.0 - F)
    if metric is Metric.HILBERT_SCHMIDT:
        return np.sqrt(2.0 * (1.0 - F))
    if metric is Metric.BURES_FIDELITY:
        return np.sqrt(np.clip(1.0 - np.sqrt(F), 0.0, None))
    if metric in (Metric.BURES_ANGLE, Metric.FUBINI_STUDY):
        return (2.0 / math.pi) * np.arccos(np.sqrt(F))
    if metric is Metric.HELLINGER:
        return np.sqrt(1.0 - F)
    if metric is Metric.WIGNER_YANASE:
        return (2.0 / math.pi) * np.arccos(F)
    raise ValueError(f"{metric.value} has no pure-state fidelity formula")


def pure_fidelity_matrix(states) -> np.ndarray:
    S = np.asarray(states, dtype=complex)
    F = np.abs(S.conj() @ S.T) ** 2
    np.fill_diagonal(F, 1.0)
    return np.clip(F, 0.0, 1.0)


def distance_matrix(states, metric: Metric | str, p: float = 2.0) -> np.ndarray:
    """Pairwise distances of a list of states (all vectors or all matrices)."""
    metric = Metric(metric)
    states = list(states)
    if states and all(is_pure_vector(s) for s in states) and metric is not Metric.SCHATTEN:
        D = distance_from_fidelity(pure_fidelity_matrix(states), metric)
        np.fill_diagonal(D, 0.0)
        return 0.5 * (D + D.T)
    n = len(states)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = state_distance(states[i], states[j], metric, p)
    return D


def swap_test_estimate(psi, phi, shots: int, seed: int | None = None) -> FidelityEstimate:
    """Fidelity estimated from simulated SWAP-test outcomes.

    Each shot accepts with probability (1 + F)/2, so F_hat = 2 k/shots - 1.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    F = fidelity_pure(psi, phi)
    k = np.random.default_rng(seed).binomial(shots, 0.5 * (1.0 + F))
    return FidelityEstimate(_clamp01(2.0 * k / shots - 1.0), shots)


def swap_test_fidelity_matrix(states, shots: int, seed: int | None = None) -> np.ndarray:
    """Pairwise SWAP-test fidelity estimates, one binomial draw per pair."""
    F = pure_fidelity_matrix(states)
    rng = np.random.default_rng(seed)
    n = F.shape[0]
    iu = np.triu_indices(n, 1)
    k = rng.binomial(shots, 0.5 * (1.0 + F[iu]))
    est = np.ones_like(F)
    est[iu] = np.clip(2.0 * k / shots - 1.0, 0.0, 1.0)
    est[(iu[1], iu[0])] = est[iu]
    return est


# serialisation


def state_to_dict(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def state_from_dict(obj: dict) -> np.ndarray:
    a = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    if a.shape[0] != obj["dim"]:
        raise ValueError("state dimension does not match its entries")
    return pure_state(a) if a.ndim == 1 else density_matrix(a)


def states_to_json(states) -> str:
    return json.dumps([state_to_dict(s) for s in states])


def states_from_json(text: str) -> list[np.ndarray]:
    return [state_from_dict(o) for o in json.loads(text)]
