"""Exact dense references for small systems."""

from __future__ import annotations

import numpy as np
import scipy.optimize

from .channels import KrausChannel
from .trajectory import CircuitDescription, _ops
from .wootters import eigen_matrix

MAX_ORACLE_QUBITS = 10


def apply_operator(rho: np.ndarray, op: np.ndarray, sites: tuple[int, ...], n: int) -> np.ndarray:
    """``(op on sites) rho (op on sites)^dag`` for a dense n-qubit density matrix."""
    k = len(sites)
    t = rho.reshape((2,) * (2 * n))
    g = np.asarray(op).reshape((2,) * (2 * k))
    rows = list(sites)
    cols = [n + s for s in sites]
    t = np.tensordot(g, t, axes=(list(range(k, 2 * k)), rows))
    t = np.moveaxis(t, list(range(k)), rows)
    t = np.tensordot(g.conj(), t, axes=(list(range(k, 2 * k)), cols))
    t = np.moveaxis(t, list(range(k)), cols)
    return t.reshape(rho.shape)


def apply_channel(rho: np.ndarray, channel: KrausChannel, site: int, n: int) -> np.ndarray:
    return sum(apply_operator(rho, k, (site,), n) for k in channel.ops)


def product_density(bits: str) -> np.ndarray:
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return np.outer(psi, psi)


def dense_evolve(circuit: CircuitDescription, rho: np.ndarray | None = None) -> np.ndarray:
    """Exact noisy evolution; truncation layers are ignored."""
    n = circuit.n_qubits
    if n > MAX_ORACLE_QUBITS:
        raise ValueError(f"dense oracle limited to {MAX_ORACLE_QUBITS} qubits")
    if rho is None:
        rho = product_density(circuit.initial_bits or "0" * n)
    rho = np.array(rho, dtype=complex)
    for kind, a, b, _ in _ops(circuit):
        if kind == "gate":
            rho = apply_operator(rho, b, (a, a + 1), n)
        elif kind == "noise":
            rho = apply_channel(rho, b, a, n)
    return rho


def reduced_density(psi: np.ndarray, keep: list[int], n: int) -> np.ndarray:
    t = np.reshape(psi, (2,) * n)
    rest = [q for q in range(n) if q not in keep]
    m = np.transpose(t, keep + rest).reshape(2 ** len(keep), -1)
    return m @ m.conj().T


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Full trace norm ``||rho - sigma||_1`` (orthogonal pure states give 2)."""
    rho, sigma = np.asarray(rho), np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise ValueError("shape mismatch")
    return float(np.sum(np.linalg.svd(rho - sigma, compute_uv=False)))


def pure_trace_distance(psi: np.ndarray, phi: np.ndarray) -> float:
    """Trace norm of ``|psi><psi| - |phi><phi|`` for unnormalized vectors."""
    a, b = np.vdot(psi, psi).real, np.vdot(phi, phi).real
    ov = abs(np.vdot(psi, phi)) ** 2
    return float(np.sqrt(max((a + b) ** 2 - 4 * ov, 0.0)))


def tv_distance(p, q) -> float:
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("shape mismatch")
    return float(0.5 * np.abs(p - q).sum())


def born_probabilities(rho: np.ndarray) -> np.ndarray:
    return np.clip(np.diag(rho).real, 0.0, None)


# -- brute-force entanglement of formation -------------------------------------

_IU = np.triu_indices(4, 1)


def _unitaries(theta: np.ndarray) -> np.ndarray:
    """Batch of U = exp(iH) with H Hermitian built from 16 real parameters."""
    b = theta.shape[0]
    h = np.zeros((b, 4, 4), dtype=complex)
    h[:, range(4), range(4)] = theta[:, :4]
    h[:, _IU[0], _IU[1]] = theta[:, 4:10] + 1j * theta[:, 10:16]
    h = h + np.conj(np.swapaxes(np.triu(h, 1), 1, 2))
    w, v = np.linalg.eigh(h)
    return np.einsum("bij,bj,bkj->bik", v, np.exp(1j * w), v.conj())


def _h2(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    m = (x > 0) & (x < 1)
    xm = x[m]
    out[m] = -xm * np.log2(xm) - (1 - xm) * np.log2(1 - xm)
    return out


def _average_entropy_batch(v: np.ndarray, theta: np.ndarray) -> np.ndarray:
    z = np.einsum("ij,bjk->bik", v, _unitaries(theta))
    p = np.sum(np.abs(z) ** 2, axis=1)
    det = z[:, 0, :] * z[:, 3, :] - z[:, 1, :] * z[:, 2, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        c2 = np.where(p > 1e-300, 4 * np.abs(det) ** 2 / np.maximum(p, 1e-300) ** 2, 0.0)
    c2 = np.clip(c2, 0.0, 1.0)
    small = c2 / (2 * (1 + np.sqrt(1 - c2)))
    return np.sum(p * _h2(small), axis=1)


def brute_force_eof(
    rho: np.ndarray,
    restarts: int = 32,
    iters: int = 500,
    rng: np.random.Generator | int | None = 0,
    step: float = 1e-6,
) -> float:
    """Smallest ensemble entropy found over decompositions ``v @ U``, U in U(4).

    Each restart runs L-BFGS from a random unitary using central finite
    differences evaluated as one batch.  The result is an upper bound on the
    entanglement of formation; how close it gets is heuristic.
    """
    rng = np.random.default_rng(rng)
    v = np.zeros((4, 4), dtype=complex)
    ev = eigen_matrix(rho)
    v[:, : ev.shape[1]] = ev
    eye = np.eye(16) * step
    probe = np.concatenate([eye, -eye])

    def fun(x):
        return float(_average_entropy_batch(v, x[None])[0])

    def jac(x):
        f = _average_entropy_batch(v, x[None] + probe)
        return (f[:16] - f[16:]) / (2 * step)

    best = fun(np.zeros(16))
    for _ in range(restarts):
        x0 = rng.uniform(-np.pi, np.pi, size=16)
        res = scipy.optimize.minimize(fun, x0, jac=jac, method="L-BFGS-B", options={"maxiter": iters})
        best = min(best, float(res.fun))
    return best
