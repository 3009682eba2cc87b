"""Small numerical helpers shared across modules."""

from __future__ import annotations

import numpy as np

ZERO_SV = 1e-14

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}
YY = np.kron(Y, Y)

H2 = np.array([[1, 1], [1, -1]], dtype=float) / np.sqrt(2)
H4 = np.array(
    [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]], dtype=float
) / 2


def xlogx(p: np.ndarray) -> np.ndarray:
    """Elementwise p*log2(p) with 0*log(0) = 0."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    mask = p > 0
    out[mask] = p[mask] * np.log2(p[mask])
    return out


def shannon(probs) -> float:
    """Base-2 Shannon entropy of a (possibly unnormalized-by-rounding) distribution."""
    return float(-np.sum(xlogx(np.clip(probs, 0.0, None)))) + 0.0  # normalizes -0.0


def binary_entropy(x: float) -> float:
    return shannon([x, 1.0 - x])


def schmidt_entropy(psi: np.ndarray) -> float:
    """Entanglement entropy (bits) of a two-qubit vector, normalized internally."""
    s = np.linalg.svd(np.reshape(psi, (2, 2)), compute_uv=False)
    w = s**2
    total = w.sum()
    if total <= 0:
        return 0.0
    w = w / total
    w[w < ZERO_SV**2] = 0.0
    return shannon(w)


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol, rtol=0))


def fix_phase(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate a vector/matrix by a global phase so its first non-negligible entry is real positive."""
    flat = np.ravel(v)
    idx = np.flatnonzero(np.abs(flat) > tol)
    if idx.size == 0:
        return v
    a = flat[idx[0]]
    return v * (abs(a) / a)


def fix_column_phases(u: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Apply :func:`fix_phase` to every column."""
    u = np.array(u, dtype=complex)
    big = np.abs(u) > tol
    first = np.argmax(big, axis=0)
    lead = u[first, np.arange(u.shape[1])]
    has = big.any(axis=0)
    phase = np.ones(u.shape[1], dtype=complex)
    phase[has] = np.abs(lead[has]) / lead[has]
    return u * phase


def embed_operator(op: np.ndarray, sites: tuple[int, ...], n: int) -> np.ndarray:
    """Full 2^n matrix of an operator on contiguous or arbitrary sites (qubit 0 most significant)."""
    k = len(sites)
    op = np.reshape(op, (2,) * (2 * k))
    eye = np.eye(2**n, dtype=complex).reshape((2,) * (2 * n))
    out_axes = list(sites)
    res = np.tensordot(op, eye, axes=(list(range(k, 2 * k)), out_axes))
    res = np.moveaxis(res, list(range(k)), out_axes)
    return res.reshape(2**n, 2**n)
