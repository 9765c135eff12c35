"""Quantum feature maps and the uniform transformation onto the probability simplex.

Tensor factors are ordered left to right, so qubit 0 is the most significant
bit of a computational-basis index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .metric import as_point_cloud

SIMPLEX_CLAMP = 1e-12

ENCODINGS = ("angle", "dense-angle", "amplitude", "sqrt", "diagonal", "iqp", "utd", "uts")


def _vector(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size < 1:
        raise ValueError("input must be a nonempty real vector")
    return x


def _kron_all(factors) -> np.ndarray:
    return reduce(np.kron, factors)


def angle_encode(x) -> np.ndarray:
    """Product of cos(x_j/2)|0> + sin(x_j/2)|1> over the coordinates of x."""
    x = _vector(x)
    return _kron_all([np.array([math.cos(t / 2), math.sin(t / 2)], dtype=complex) for t in x])


def dense_angle_encode(x) -> np.ndarray:
    """Two coordinates per qubit: the first sets the polar angle, the second a phase."""
    x = _vector(x)
    if x.size % 2:
        x = np.append(x, 0.0)
    qubits = []
    for a, b in x.reshape(-1, 2):
        h = (a + math.pi) / 4
        qubits.append(np.array([math.cos(h), np.exp(1j * b) * math.sin(h)], dtype=complex))
    return _kron_all(qubits)


def amplitude_encode(x) -> np.ndarray:
    x = _vector(x)
    nrm = np.linalg.norm(x)
    if nrm <= 1e-12:
        raise ValueError("cannot amplitude-encode the zero vector")
    return (x / nrm).astype(complex)


def simplex_point(p) -> np.ndarray:
    p = _vector(p)
    if np.any(p < -SIMPLEX_CLAMP) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("not a point of the probability simplex")
    return np.clip(p, 0.0, None)


def sqrt_encode(p) -> np.ndarray:
    return np.sqrt(simplex_point(p)).astype(complex)


def diagonal_encode(p) -> np.ndarray:
    return np.diag(simplex_point(p)).astype(complex)


def z_signs(d: int) -> np.ndarray:
    """(2^d, d) array of Z eigenvalues; row b, column j is +1 iff bit j of b is 0."""
    b = np.arange(2**d)[:, None]
    bits = (b >> (d - 1 - np.arange(d))[None, :]) & 1
    return 1 - 2 * bits


def walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Normalised fast Walsh-Hadamard transform, i.e. H applied to every qubit."""
    v = np.array(v, dtype=complex)
    n = v.size
    h = 1
    while h < n:
        v = v.reshape(-1, 2, h)
        v = np.stack([v[:, 0] + v[:, 1], v[:, 0] - v[:, 1]], axis=1).reshape(n)
        h *= 2
    return v / math.sqrt(n)


def iqp_phase(x) -> np.ndarray:
    """Diagonal phase angles sum_j x_j z_j + sum_{k<l} (pi-x_k)(pi-x_l) z_k z_l."""
    x = _vector(x)
    z = z_signs(x.size).astype(float)
    theta = z @ x
    w = math.pi - x
    for k in range(x.size):
        for l in range(k + 1, x.size):
            theta = theta + w[k] * w[l] * z[:, k] * z[:, l]
    return theta


def iqp_encode(x) -> np.ndarray:
    x = _vector(x)
    n = 2**x.size
    plus = np.full(n, 1.0 / math.sqrt(n), dtype=complex)
    return walsh_hadamard(plus * np.exp(1j * iqp_phase(x)))


# uniform transformation


def simplex_rotation(m: int) -> np.ndarray:
    """Orthogonal R_m sending e_{m+1} to the simplex normal (1,...,1)/sqrt(m+1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    k = m + 1
    s = np.full(k, 1.0 / math.sqrt(k))
    u = np.full(k, -1.0)
    u[-1] = m
    u /= math.sqrt(m * k)
    a = (1.0 - math.sqrt(k)) / math.sqrt(k)
    b = math.sqrt(m / k)
    return np.eye(k) + a * (np.outer(s, s) + np.outer(u, u)) + b * (np.outer(s, u) - np.outer(u, s))


@dataclass(frozen=True)
class UniformTransform:
    centroid: np.ndarray
    radius: float
    rotation: np.ndarray

    @property
    def m(self) -> int:
        return int(self.centroid.size)

    @property
    def scale(self) -> float:
        """Factor by which pairwise distances shrink: r sqrt(m(m+1))."""
        return self.radius * math.sqrt(self.m * (self.m + 1))

    def with_shrink(self, shrink: float) -> "UniformTransform":
        if not 0 < shrink <= 1:
            raise ValueError("shrink must lie in (0, 1]")
        return UniformTransform(self.centroid, self.radius / shrink, self.rotation)

    def apply_raw(self, X) -> np.ndarray:
        """Image coordinates without clamping, for one point or a cloud."""
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.m:
            raise ValueError(f"expected dimension {self.m}, got {X.shape[1]}")
        Y = (X - self.centroid) @ self.rotation[:, : self.m].T / self.scale + 1.0 / (self.m + 1)
        return Y[0] if single else Y


def fit_uniform_transform(cloud) -> UniformTransform:
    X = as_point_cloud(cloud)
    c = X.mean(axis=0)
    r = float(np.sqrt(((X - c) ** 2).sum(axis=1)).max())
    if X.shape[0] < 2 or r <= 0:
        raise ValueError("uniform transform needs at least two distinct points")
    return UniformTransform(c, r, simplex_rotation(X.shape[1]))


def _clamp_simplex(Y: np.ndarray) -> np.ndarray:
    if np.any(Y < -SIMPLEX_CLAMP):
        raise ValueError("point falls outside the probability simplex")
    return np.clip(Y, 0.0, None)


def apply_uniform_transform(t: UniformTransform, x) -> np.ndarray:
    return _clamp_simplex(t.apply_raw(x))


def utd_encode(cloud) -> list[np.ndarray]:
    X = as_point_cloud(cloud)
    t = fit_uniform_transform(X)
    return [diagonal_encode(p) for p in apply_uniform_transform(t, X)]


def uts_encode(cloud, shrink: float = 1.0) -> list[np.ndarray]:
    X = as_point_cloud(cloud)
    t = fit_uniform_transform(X).with_shrink(shrink)
    return [sqrt_encode(p) for p in apply_uniform_transform(t, X)]


def bloch_vector(psi) -> np.ndarray:
    """(<sigma_1>, <sigma_2>, <sigma_3>) of a single-qubit state vector."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2,):
        raise ValueError("Bloch coordinates need a single-qubit state")
    a, b = psi
    ab = np.conj(a) * b
    return np.array([2 * ab.real, 2 * ab.imag, abs(a) ** 2 - abs(b) ** 2])


def encode_cloud(cloud, name: str, prescale: float = 1.0, shrink: float = 1.0) -> list[np.ndarray]:
    """Encode every point of a cloud with a named feature map.

    ``prescale`` multiplies the inputs of the angle, dense-angle and IQP maps.
    The simplex maps (sqrt, diagonal) expect points already on the simplex.
    """
    X = as_point_cloud(cloud)
    if name == "angle":
        return [angle_encode(prescale * x) for x in X]
    if name == "dense-angle":
        return [dense_angle_encode(prescale * x) for x in X]
    if name == "iqp":
        return [iqp_encode(prescale * x) for x in X]
    if name == "amplitude":
        return [amplitude_encode(x) for x in X]
    if name == "sqrt":
        return [sqrt_encode(x) for x in X]
    if name == "diagonal":
        return [diagonal_encode(x) for x in X]
    if name == "utd":
        return utd_encode(X)
    if name == "uts":
        return uts_encode(X, shrink)
    raise ValueError(f"unknown encoding {name!r}; choose from {', '.join(ENCODINGS)}")
