"""Two-qubit entanglement of formation and its optimal decomposition.

A decomposition matrix has the (subnormalized) ensemble vectors as columns,
so ``rho = w @ w.conj().T``.  Any two decompositions of the same state are
related by ``w' = w @ U`` for a unitary (or isometry) ``U``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._linalg import H2, H4, YY, binary_entropy, fix_column_phases, schmidt_entropy

RANK_TOL = 1e-13
PSD_TOL = 1e-10


@dataclass(frozen=True)
class OptimalDecomposition:
    """Ensemble ``{p_i, |phi_i>}`` realizing the entanglement of formation.

    ``unitary`` maps the eigen decomposition matrix ``v`` (columns
    ``sqrt(lambda_i)|lambda_i>``, zero padded) to the optimal one:
    ``v @ unitary`` has columns ``sqrt(p_i)|phi_i>``.
    """

    probs: np.ndarray
    states: np.ndarray
    unitary: np.ndarray
    eigen: np.ndarray
    concurrence: float
    e_of: float

    @property
    def matrix(self) -> np.ndarray:
        return self.states * np.sqrt(self.probs)

    def density(self) -> np.ndarray:
        z = self.matrix
        return z @ z.conj().T

    def average_entropy(self) -> float:
        return ensemble_entropy(self.probs, self.states)


def ensemble_entropy(probs, states) -> float:
    return float(
        sum(p * schmidt_entropy(states[:, i]) for i, p in enumerate(probs) if p > 1e-15)
    )


def spin_flip(rho: np.ndarray) -> np.ndarray:
    return YY @ np.conj(rho) @ YY


def spin_flip_vectors(w: np.ndarray) -> np.ndarray:
    return YY @ np.conj(w)


def _check_density(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("expected a 4x4 density matrix")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > 1e-10:
        raise ValueError("density matrix does not have unit trace")
    return (rho + rho.conj().T) / 2


def eigen_matrix(rho: np.ndarray) -> np.ndarray:
    """Columns ``sqrt(lambda_i)|lambda_i>`` in decreasing order; rank-deficient part dropped."""
    rho = _check_density(rho)
    lam, vec = np.linalg.eigh(rho)
    if lam.min() < -PSD_TOL:
        raise ValueError("density matrix is not positive semidefinite")
    lam = np.clip(lam, 0.0, None)[::-1]
    vec = vec[:, ::-1]
    r = max(1, int(np.count_nonzero(lam > RANK_TOL)))
    return vec[:, :r] * np.sqrt(lam[:r])


def _preconcurrence_matrix(v: np.ndarray) -> np.ndarray:
    tau = v.conj().T @ spin_flip_vectors(v)
    return (tau + tau.T) / 2


def concurrence(rho: np.ndarray) -> float:
    """Concurrence from the singular values of ``tau = v^dag v~`` (no matrix roots)."""
    lam = np.sort(np.linalg.svd(_preconcurrence_matrix(eigen_matrix(rho)), compute_uv=False))[::-1]
    lam = np.concatenate([lam, np.zeros(4 - lam.size)])
    return float(max(0.0, lam[0] - lam[1:].sum()))


def eof_from_concurrence(c: float) -> float:
    c = min(max(c, 0.0), 1.0)
    return binary_entropy((1 + np.sqrt(1 - c * c)) / 2)


def entanglement_of_formation(rho: np.ndarray) -> float:
    return eof_from_concurrence(concurrence(rho))


def takagi_autonne(m: np.ndarray, tol: float = 1e-10):
    """Factor a complex symmetric ``m = U diag(s) U^T`` with ``s`` nonincreasing."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("takagi_autonne needs a square matrix")
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    if np.max(np.abs(m - m.T), initial=0.0) > tol * scale:
        raise ValueError("matrix is not symmetric")
    m = (m + m.T) / 2
    d = m.shape[0]
    off = m - np.diag(np.diag(m))
    if np.max(np.abs(off), initial=0.0) <= 1e-14 * scale:
        diag = np.diag(m)
        order = np.argsort(-np.abs(diag), kind="stable")
        phases = np.exp(0.5j * np.angle(diag[order]))
        u = np.zeros((d, d), dtype=complex)
        u[order, np.arange(d)] = phases
        return u, np.abs(diag[order])
    um, s, vmh = np.linalg.svd(m)
    z = um.T @ vmh.conj().T
    # z is block diagonal over groups of equal singular values; take the
    # principal square root blockwise and leave null blocks untouched.
    root = np.eye(d, dtype=complex)
    start = 0
    while start < d:
        stop = start + 1
        while stop < d and abs(s[stop] - s[start]) <= 1e-10 * max(s[0], 1e-300):
            stop += 1
        if s[start] > 1e-14 * max(s[0], 1e-300):
            if stop - start == 1:
                root[start, start] = np.conj(np.sqrt(z[start, start]))
            else:
                blk = z[start:stop, start:stop]
                root[start:stop, start:stop] = scipy.linalg.sqrtm(blk).conj()
        start = stop
    u = um @ root
    return u, s


def _trapezoid_phases(lam: np.ndarray) -> np.ndarray:
    """Angles theta with sum_j exp(2i theta_j) lam_j = 0 for a separable spectrum."""
    l1, l2, l3, l4 = lam
    base = l1 - l4
    if l1 - l4 <= 1e-14 * max(l1, 1e-300):
        return np.array([0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4])
    if l2 <= 1e-300:
        return np.array([0.0, 0.0, 0.0, np.pi / 2])
    s = (base + l2 + l3) / 2
    area2 = max(s * (s - base) * (s - l2) * (s - l3), 0.0)
    h = 2.0 / base * np.sqrt(area2)
    two_t2 = np.pi - np.arcsin(min(h / l2, 1.0))
    if l3 <= 1e-300:
        two_t3 = 0.0
    elif np.cos(two_t2) * l2 + l1 - l4 > 0:
        two_t3 = np.pi + np.arcsin(min(h / l3, 1.0))
    else:
        two_t3 = -np.arcsin(min(h / l3, 1.0))
    return np.array([0.0, two_t2 / 2, two_t3 / 2, np.pi / 2])


def _optimal_unitary_from_eigen(v: np.ndarray):
    """Unitary ``W`` with ``v @ W`` an optimal decomposition, plus the concurrence.

    ``v`` has orthogonal nonzero columns.  Rank-3 inputs are padded to four
    columns, so ``W`` may be larger than ``v.shape[1]``.
    """
    r = v.shape[1]
    if r == 1:
        return np.eye(1, dtype=complex), None
    dim = 4 if r == 3 else r
    vp = np.zeros((4, dim), dtype=complex)
    vp[:, :r] = v
    tau = _preconcurrence_matrix(vp)
    u1, lam = takagi_autonne(tau)
    x = vp @ u1
    lam4 = np.concatenate([lam, np.zeros(4 - dim)])
    c = lam4[0] - lam4[1:].sum()
    if c > 1e-14:
        d2 = np.diag([1.0] + [1j] * (dim - 1))
        y = x @ d2
        m = y.conj().T @ spin_flip_vectors(y) - c * (y.conj().T @ y)
        mr = m.real
        mr = (mr + mr.T) / 2
        if np.max(np.abs(mr - np.diag(np.diag(mr)))) <= 1e-13:
            q = np.eye(dim)
        else:
            _, q = np.linalg.eigh(mr)
        h = H4 if dim == 4 else H2
        w = u1 @ d2 @ q @ h.T
    else:
        c = 0.0
        if dim == 2:
            # separable rank 2 forces lam1 == lam2; opposite phases cancel them
            w = u1 @ np.diag([1.0, 1j]) @ H2
        else:
            w = u1 @ np.diag(np.exp(1j * _trapezoid_phases(lam4))) @ H4
    return fix_column_phases(w), max(c, 0.0)


def optimal_decomposition(rho: np.ndarray) -> OptimalDecomposition:
    v = eigen_matrix(rho)
    w, c = _optimal_unitary_from_eigen(v)
    return _assemble(v, w, c)


def _assemble(v: np.ndarray, w: np.ndarray, c: float | None) -> OptimalDecomposition:
    dim = w.shape[0]
    vp = np.zeros((4, dim), dtype=complex)
    vp[:, : v.shape[1]] = v
    z = vp @ w
    probs = np.sum(np.abs(z) ** 2, axis=0)
    states = np.zeros_like(z)
    nz = probs > 1e-300
    states[:, nz] = z[:, nz] / np.sqrt(probs[nz])
    if c is None:
        c = 2 * abs(np.linalg.det(states[:, 0].reshape(2, 2)))
    return OptimalDecomposition(probs, states, w, vp, float(c), eof_from_concurrence(c))


def decomposition_to_eigen_unitary(phi: np.ndarray):
    """Return ``(U0, v)`` with ``v = phi @ U0^dag`` having orthogonal columns.

    Columns of ``v`` are sorted by decreasing norm; columns carrying negligible
    weight are set exactly to zero.  If ``phi`` already has orthogonal columns
    ``U0`` is a permutation.
    """
    phi = np.asarray(phi, dtype=complex)
    g = phi.conj().T @ phi
    g = (g + g.conj().T) / 2
    scale = max(float(np.trace(g).real), 1e-300)
    off = g - np.diag(np.diag(g))
    m = g.shape[0]
    if np.max(np.abs(off), initial=0.0) <= 1e-14 * scale:
        order = np.argsort(-np.diag(g).real, kind="stable")
        wmat = np.zeros((m, m), dtype=complex)
        wmat[order, np.arange(m)] = 1.0
        evals = np.diag(g).real[order]
    else:
        evals, wmat = np.linalg.eigh(g)
        evals, wmat = evals[::-1], wmat[:, ::-1]
    v = phi @ wmat
    v[:, evals <= RANK_TOL * scale] = 0.0
    return wmat.conj().T, v
