"""Choosing and sampling Kraus unravelings of single-qubit noise on an MPS."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import fix_phase, is_unitary, schmidt_entropy
from .channels import (
    NAMED_MODELS,
    KrausChannel,
    minimal_kraus,
    named_kraus,
    orthogonal_kraus,
    rotate_kraus,
)
from .mps import MpsState, svd
from .wootters import (
    OptimalDecomposition,
    _assemble,
    _optimal_unitary_from_eigen,
    decomposition_to_eigen_unitary,
)

STRATEGIES = ("orthogonal", "projective", "haar_optimal", "locally_optimal", "least_unitary")
PRODUCT_TOL = 1e-12
PROB_TOL = 1e-9


@dataclass(frozen=True)
class Strategy:
    """An unraveling rule; ``custom`` carries a fixed rotation for the ``custom`` tag."""

    tag: str
    custom: np.ndarray | None = None

    def __post_init__(self):
        if self.tag not in STRATEGIES + ("custom",):
            raise ValueError(f"unknown unraveling strategy {self.tag!r}")
        if self.tag == "custom" and (self.custom is None or not is_unitary(self.custom)):
            raise ValueError("custom strategy needs a unitary rotation")

    @classmethod
    def parse(cls, spec) -> "Strategy":
        if isinstance(spec, Strategy):
            return spec
        if isinstance(spec, str):
            return cls(spec)
        if isinstance(spec, dict) and "custom" in spec:
            u = np.asarray(spec["custom"], dtype=float)
            if u.ndim == 3:
                u = u[..., 0] + 1j * u[..., 1]
            return cls("custom", u)
        raise ValueError(f"cannot parse strategy {spec!r}")

    @property
    def adaptive(self) -> bool:
        return self.tag == "locally_optimal"


@dataclass(frozen=True)
class EffectiveTwoQubitState:
    """Target qubit together with its Schmidt partner in the rest of the chain.

    ``psi`` is ordered target (x) partner with coefficient matrix
    ``basis @ diag(schmidt)``.  ``env`` holds the right Schmidt vectors as
    rows of the flattened ``(d_left * d_right)`` environment index.
    """

    schmidt: np.ndarray
    basis: np.ndarray
    psi: np.ndarray
    env: np.ndarray | None = None
    site: int | None = None

    @property
    def s(self) -> float:
        return float(self.schmidt[0])

    @classmethod
    def from_schmidt(cls, s: float, basis: np.ndarray | None = None) -> "EffectiveTwoQubitState":
        basis = np.eye(2, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
        sv = np.array([s, np.sqrt(max(0.0, 1 - s * s))])
        return cls(sv, basis, (basis * sv).reshape(-1))

    def reduced_target(self) -> np.ndarray:
        c = self.psi.reshape(2, 2)
        return c @ c.conj().T


def effective_two_qubit(state: MpsState, site: int) -> EffectiveTwoQubitState:
    state.move_center_(site)
    a = state.tensors[site]
    mat = a.reshape(2, -1)
    u, s, vh = svd(mat)
    s = s / np.linalg.norm(s)
    if s.size == 1:
        u = np.column_stack([u[:, 0], [-np.conj(u[1, 0]), np.conj(u[0, 0])]])
        s = np.array([s[0], 0.0])
    return EffectiveTwoQubitState(s, u, (u * s).reshape(-1), vh, site)


def _induced_matrix(ops, psi: np.ndarray) -> np.ndarray:
    """Columns ``(K_i (x) I)|psi>``."""
    c = psi.reshape(2, 2)
    return np.column_stack([(k @ c).reshape(-1) for k in ops])


def induced_ensemble(channel: KrausChannel, psi: np.ndarray):
    """Branch probabilities and normalized two-qubit states for a Kraus set."""
    phi = _induced_matrix(channel.ops, psi)
    probs = np.sum(np.abs(phi) ** 2, axis=0)
    states = np.zeros_like(phi)
    nz = probs > 1e-300
    states[:, nz] = phi[:, nz] / np.sqrt(probs[nz])
    return probs, states


def average_entropy(channel: KrausChannel, psi: np.ndarray) -> float:
    probs, states = induced_ensemble(channel, psi)
    return float(sum(p * schmidt_entropy(states[:, i]) for i, p in enumerate(probs) if p > 1e-15))


def _compress(channel: KrausChannel) -> KrausChannel:
    return minimal_kraus(channel) if len(channel) > 4 else channel


def _optimal_rotation(ops: np.ndarray, psi: np.ndarray):
    """Mixing matrix ``T`` (K'_j = sum_i T[i, j] K_i) and the Wootters pieces.

    ``ops`` is a stack of at most four Kraus operators.
    """
    phi = (ops @ psi.reshape(2, 2)).reshape(len(ops), 4).T
    u0, v = decomposition_to_eigen_unitary(phi)
    r = int(np.count_nonzero(np.any(v != 0, axis=0)))
    w, c = _optimal_unitary_from_eigen(v[:, :r])
    m = len(ops)
    dim = max(m, w.shape[0])
    t = np.zeros((dim, dim), dtype=complex)
    t[:m, :m] = u0.conj().T
    if dim > m:
        t[m:, m:] = np.eye(dim - m)
    t[:, : w.shape[0]] = t[:, : w.shape[0]] @ w
    return t, v[:, :r], w, c


def _optimal_ops(ops: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Fast path used inside trajectories: rotated operators as a stack."""
    t, _, _, _ = _optimal_rotation(ops, psi)
    new = np.tensordot(t[: len(ops)].T, ops, axes=(1, 0))
    norms = np.sqrt(np.sum(np.abs(new) ** 2, axis=(1, 2)))
    return new[norms >= 1e-12]


def locally_optimal_kraus(
    channel: KrausChannel, eff: EffectiveTwoQubitState
) -> tuple[KrausChannel, OptimalDecomposition | None]:
    """Kraus set whose induced ensemble on ``eff`` attains the entanglement of formation."""
    channel.validate_tp()
    if eff.schmidt[1] < PRODUCT_TOL:
        return orthogonal_kraus(channel), None
    base = _compress(channel)
    t, v, w, c = _optimal_rotation(np.array(base.ops), eff.psi)
    rotated = rotate_kraus(base, t)
    ops = tuple(fix_phase(k) for k in rotated.ops)
    out = KrausChannel(ops, f"{channel.label}:locally_optimal", channel.model, channel.rate)
    return out, _assemble(v, w, c)


def least_unitary_kraus(channel: KrausChannel) -> KrausChannel:
    bell = EffectiveTwoQubitState.from_schmidt(1 / np.sqrt(2))
    out, _ = locally_optimal_kraus(channel, bell)
    return KrausChannel(out.ops, f"{channel.label}:least_unitary", channel.model, channel.rate)


def fixed_kraus(channel: KrausChannel, strategy: Strategy) -> KrausChannel:
    """Kraus set for the non-adaptive strategies (independent of the state)."""
    tag = strategy.tag
    if tag == "least_unitary":
        return least_unitary_kraus(channel)
    if tag == "custom":
        return rotate_kraus(channel, strategy.custom)
    if channel.model in NAMED_MODELS and channel.rate is not None:
        return named_kraus(channel.model, channel.rate, tag)
    if tag == "orthogonal":
        return minimal_kraus(channel)
    if tag == "haar_optimal":
        return least_unitary_kraus(channel)
    raise ValueError(f"strategy {tag!r} needs a named channel")


def kraus_for_strategy(
    channel: KrausChannel, strategy, state: MpsState | None = None, site: int | None = None
) -> KrausChannel:
    strategy = Strategy.parse(strategy)
    if strategy.adaptive:
        if state is None or site is None:
            raise ValueError("locally optimal unraveling needs the state and site")
        return locally_optimal_kraus(channel, effective_two_qubit(state, site))[0]
    return fixed_kraus(channel, strategy)


def branch_probabilities(state: MpsState, ops, site: int) -> tuple[np.ndarray, np.ndarray]:
    """Probabilities ``<psi|K^dag K|psi>`` and the updated (unnormalized) center tensors."""
    state.move_center_(site)
    a = state.tensors[site]
    new = (np.asarray(ops) @ a.reshape(2, -1)).reshape((-1,) + a.shape)
    w = np.sum(new.real**2 + new.imag**2, axis=(1, 2, 3))
    return w / np.vdot(a, a).real, new


def sample_branch(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw; the probabilities must already sum to one within 1e-9."""
    total = float(np.sum(probs))
    if total <= 0 or abs(total - 1) > PROB_TOL:
        raise ValueError(f"branch probabilities sum to {total}, expected 1")
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random() * total, side="right"))
    idx = min(idx, len(probs) - 1)
    while probs[idx] <= 0:
        idx -= 1
    return idx


def unravel_channel_(
    state: MpsState,
    channel: KrausChannel,
    site: int,
    strategy,
    rng: np.random.Generator,
) -> tuple[int, float]:
    """In-place version of :func:`unravel_channel`; returns (branch, probability)."""
    ops = kraus_for_strategy(channel, strategy, state, site).ops
    probs, new = branch_probabilities(state, ops, site)
    i = sample_branch(probs, rng)
    state.tensors[site] = new[i] / np.sqrt(np.vdot(new[i], new[i]).real)
    state.ortho_center = site
    return i, float(probs[i] / probs.sum())


def unravel_channel(state, channel, site, strategy, rng):
    out = state.copy()
    i, p = unravel_channel_(out, channel, site, strategy, rng)
    return out, i, p
