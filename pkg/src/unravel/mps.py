"""Matrix product states for chains of qubits.

Tensors are stored with shape ``(2, d_left, d_right)``.  Qubit 0 is the most
significant bit of the dense vector.  Sites and cuts are 0-based: cut ``k``
separates qubits ``0..k-1`` from ``k..n-1`` and lives on the bond between
sites ``k-1`` and ``k``.

Methods ending in an underscore mutate the state in place.  Moving the
orthogonality center only changes the gauge, so query methods may do it
silently.  The module-level functions copy first and behave as value
operations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg

from ._linalg import ZERO_SV, is_unitary, shannon

MAX_DENSE_QUBITS = 14


def svd(m: np.ndarray):
    """Thin SVD with a fallback driver for the rare gesdd convergence failure."""
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")


def _qr(m: np.ndarray):
    return scipy.linalg.qr(m, mode="economic", check_finite=False)


@dataclass(frozen=True)
class SchmidtCut:
    """Schmidt data at a cut.

    ``left_basis`` and ``right_basis`` are the local isometric factors in the
    canonical gauge centered on the cut; together with the remaining
    isometric tensors they define the Schmidt vectors.
    """

    cut: int
    singular_values: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    @property
    def entropy(self) -> float:
        w = self.singular_values**2
        return shannon(w / w.sum())


@dataclass(frozen=True)
class TruncationReport:
    per_bond_discarded: tuple[float, ...]
    two_norm_bound: float
    retained_norm: float = 1.0

    @property
    def total_discarded(self) -> float:
        return float(sum(self.per_bond_discarded))


@dataclass
class MpsState:
    tensors: list[np.ndarray]
    ortho_center: int | None = None
    qubit_ordering: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.tensors:
            raise ValueError("an MPS needs at least one site")
        self.tensors = [np.asarray(t, dtype=complex) for t in self.tensors]
        n = len(self.tensors)
        if not self.qubit_ordering:
            self.qubit_ordering = tuple(range(n))
        if sorted(self.qubit_ordering) != list(range(n)):
            raise ValueError("qubit_ordering must be a permutation of range(n)")
        if self.tensors[0].shape[1] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for a, b in zip(self.tensors, self.tensors[1:]):
            if a.shape[0] != 2 or a.shape[2] != b.shape[1]:
                raise ValueError("inconsistent tensor shapes")

    # -- basic properties -------------------------------------------------

    @property
    def n_qubits(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        """Dimensions of the n-1 interior bonds."""
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "MpsState":
        return MpsState(list(self.tensors), self.ortho_center, self.qubit_ordering)

    def _check_site(self, site: int, upper: int | None = None) -> None:
        upper = self.n_qubits - 1 if upper is None else upper
        if not 0 <= site <= upper:
            raise IndexError(f"site {site} outside [0, {upper}]")

    # -- gauge ------------------------------------------------------------

    def _shift_right(self, k: int) -> None:
        a = self.tensors[k]
        _, dl, dr = a.shape
        q, r = _qr(a.transpose(1, 0, 2).reshape(dl * 2, dr))
        self.tensors[k] = q.reshape(dl, 2, -1).transpose(1, 0, 2)
        self.tensors[k + 1] = r @ self.tensors[k + 1]

    def _shift_left(self, k: int) -> None:
        a = self.tensors[k]
        _, dl, dr = a.shape
        q, r = _qr(a.transpose(1, 0, 2).reshape(dl, 2 * dr).conj().T)
        self.tensors[k] = q.conj().T.reshape(-1, 2, dr).transpose(1, 0, 2)
        self.tensors[k - 1] = self.tensors[k - 1] @ r.conj().T

    def move_center_(self, target: int) -> "MpsState":
        self._check_site(target)
        if self.ortho_center is None:
            for k in range(target):
                self._shift_right(k)
            for k in range(self.n_qubits - 1, target, -1):
                self._shift_left(k)
        else:
            for k in range(self.ortho_center, target):
                self._shift_right(k)
            for k in range(self.ortho_center, target, -1):
                self._shift_left(k)
        self.ortho_center = target
        return self

    def norm(self) -> float:
        if self.ortho_center is None:
            self.move_center_(0)
        return float(np.linalg.norm(self.tensors[self.ortho_center]))

    def normalize_(self) -> "MpsState":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero state")
        c = self.ortho_center
        self.tensors[c] = self.tensors[c] / nrm
        return self

    # -- local operations -------------------------------------------------

    def apply_two_qubit_gate_(
        self, gate: np.ndarray, site: int, check_unitary: bool = True
    ) -> "MpsState":
        gate = np.asarray(gate, dtype=complex)
        if gate.shape != (4, 4):
            raise ValueError("two-qubit gate must be 4x4")
        if check_unitary and not is_unitary(gate):
            raise ValueError("gate is not unitary within 1e-10")
        self._check_site(site, self.n_qubits - 2)
        if self.ortho_center not in (site, site + 1):
            self.move_center_(site)
        a, b = self.tensors[site], self.tensors[site + 1]
        dl, dr = a.shape[1], b.shape[2]
        theta = gate @ (a[:, None] @ b[None]).reshape(4, dl * dr)
        m = theta.reshape(2, 2, dl, dr).transpose(0, 2, 1, 3).reshape(2 * dl, 2 * dr)
        u, s, vh = svd(m)
        keep = max(1, int(np.count_nonzero(s > ZERO_SV * max(np.linalg.norm(s), 1e-300))))
        u, s, vh = u[:, :keep], s[:keep], vh[:keep]
        self.tensors[site] = u.reshape(2, dl, keep)
        self.tensors[site + 1] = (s[:, None] * vh).reshape(keep, 2, dr).transpose(1, 0, 2)
        self.ortho_center = site + 1
        return self

    def apply_single_qubit_operator_(self, op: np.ndarray, site: int) -> float:
        """Apply ``op`` at ``site`` without renormalizing; return the squared norm."""
        op = np.asarray(op, dtype=complex)
        if op.shape != (2, 2):
            raise ValueError("single-qubit operator must be 2x2")
        self._check_site(site)
        self.move_center_(site)
        a = (op @ self.tensors[site].reshape(2, -1)).reshape(self.tensors[site].shape)
        self.tensors[site] = a
        return float(np.vdot(a, a).real)

    # -- cuts -------------------------------------------------------------

    def schmidt_at_cut(self, k: int) -> SchmidtCut:
        if not 1 <= k <= self.n_qubits - 1:
            raise IndexError(f"cut {k} outside [1, {self.n_qubits - 1}]")
        if self.ortho_center != k:
            self.move_center_(k - 1)
        c = self.ortho_center
        a = self.tensors[c]
        _, dl, dr = a.shape
        if c == k - 1:
            u, s, vh = svd(a.transpose(1, 0, 2).reshape(dl * 2, dr))
        else:
            u, s, vh = svd(a.transpose(1, 0, 2).reshape(dl, 2 * dr))
        nrm = np.linalg.norm(s)
        keep = s > ZERO_SV * nrm
        keep[0] = True
        return SchmidtCut(k, s[keep] / nrm, u[:, keep], vh[keep])

    def entropy_at_cut(self, k: int) -> float:
        return self.schmidt_at_cut(k).entropy

    def truncate_(self, chi: int, bonds: Sequence[int] | None = None) -> TruncationReport:
        """Cap bond dimensions at ``chi`` and renormalize.

        ``bonds`` restricts truncation to the given cuts (1..n-1).  Discarded
        weights are measured relative to the squared norm of the input.
        """
        if chi < 1:
            raise ValueError("chi must be >= 1")
        n = self.n_qubits
        cuts = sorted(set(range(1, n) if bonds is None else bonds), reverse=True)
        for k in cuts:
            if not 1 <= k <= n - 1:
                raise IndexError(f"cut {k} outside [1, {n - 1}]")
        eps = [0.0] * (n - 1)
        dims = self.bond_dims
        if not cuts or all(dims[k - 1] <= chi for k in cuts):
            self.normalize_()
            return TruncationReport(tuple(eps), 0.0, 1.0)
        norm2 = self.norm() ** 2
        self.move_center_(cuts[0])
        for k in cuts:
            if self.ortho_center != k:
                self.move_center_(k)
            a = self.tensors[k]
            _, dl, dr = a.shape
            u, s, vh = svd(a.transpose(1, 0, 2).reshape(dl, 2 * dr))
            nonzero = int(np.count_nonzero(s > ZERO_SV * np.sqrt(norm2)))
            keep = max(1, min(chi, nonzero))
            dropped = s[keep:nonzero]
            eps[k - 1] = float(np.sum(dropped**2) / norm2)
            self.tensors[k] = vh[:keep].reshape(keep, 2, dr).transpose(1, 0, 2)
            self.tensors[k - 1] = self.tensors[k - 1] @ (u[:, :keep] * s[:keep])
            self.ortho_center = k - 1
        retained = self.norm() / np.sqrt(norm2)
        self.normalize_()
        return TruncationReport(tuple(eps), float(np.sqrt(2 * sum(eps))), float(retained))

    # -- global queries ---------------------------------------------------

    def expectation_mpo(self, mpo: Sequence[np.ndarray]) -> complex:
        """<psi|O|psi> for an MPO given as tensors of shape (out, in, w_left, w_right)."""
        if len(mpo) != self.n_qubits:
            raise ValueError("MPO length does not match the number of qubits")
        env = np.ones((1, 1, 1), dtype=complex)
        for a, w in zip(self.tensors, mpo):
            w = np.asarray(w)
            if w.shape[:2] != (2, 2) or w.shape[2] != env.shape[1]:
                raise ValueError("MPO tensor dimensions are incompatible")
            env = np.einsum("awb,pac,pqwv,qbd->cvd", env, a.conj(), w, a, optimize=True)
        if env.shape != (1, 1, 1):
            raise ValueError("MPO boundary bonds must have dimension 1")
        return complex(env[0, 0, 0])

    def sample_bitstring(self, rng: np.random.Generator) -> str:
        self.move_center_(0)
        left = np.ones(1, dtype=complex)
        bits = []
        for a in self.tensors:
            t = np.einsum("a,pab->pb", left, a)
            w = np.einsum("pb,pb->p", t, t.conj()).real
            bit = int(rng.random() * w.sum() >= w[0])
            bits.append(bit)
            left = t[bit] / np.sqrt(w[bit])
        return "".join(map(str, bits))

    def to_dense(self) -> np.ndarray:
        if self.n_qubits > MAX_DENSE_QUBITS:
            raise ValueError(f"refusing to densify more than {MAX_DENSE_QUBITS} qubits")
        v = self.tensors[0][:, 0, :]
        for a in self.tensors[1:]:
            v = np.einsum("xa,pab->xpb", v, a).reshape(-1, a.shape[2])
        return v.reshape(-1)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": "unravel-mps",
            "version": 1,
            "n_qubits": self.n_qubits,
            "ortho_center": self.ortho_center,
            "qubit_ordering": list(self.qubit_ordering),
            "tensors": [
                {
                    "shape": list(t.shape),
                    "data": np.stack([t.real.ravel(), t.imag.ravel()], axis=1).tolist(),
                }
                for t in self.tensors
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MpsState":
        if d.get("format") != "unravel-mps":
            raise ValueError("not a serialized MPS")
        tensors = []
        for t in d["tensors"]:
            pairs = np.asarray(t["data"], dtype=float).reshape(-1, 2)
            tensors.append((pairs[:, 0] + 1j * pairs[:, 1]).reshape(t["shape"]))
        return cls(tensors, d["ortho_center"], tuple(d["qubit_ordering"]))


# -- constructors -------------------------------------------------------------


def new_product_state(n: int, bits: str | None = None) -> MpsState:
    if n < 1:
        raise ValueError("need at least one qubit")
    bits = "0" * n if bits is None else bits
    if len(bits) != n or set(bits) - {"0", "1"}:
        raise ValueError("bits must be a 0/1 string of length n")
    tensors = []
    for b in bits:
        t = np.zeros((2, 1, 1), dtype=complex)
        t[int(b), 0, 0] = 1.0
        tensors.append(t)
    return MpsState(tensors, ortho_center=0)


def from_dense(psi: np.ndarray, n: int | None = None) -> MpsState:
    """Exact MPS of a dense vector via sequential SVDs (center ends on the last site)."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    n = int(round(np.log2(psi.size))) if n is None else n
    if psi.size != 2**n:
        raise ValueError("vector length is not 2**n")
    tensors = []
    rest = psi.reshape(1, -1)
    for _ in range(n - 1):
        dl = rest.shape[0]
        u, s, vh = svd(rest.reshape(dl * 2, -1))
        keep = max(1, int(np.count_nonzero(s > ZERO_SV * np.linalg.norm(s))))
        tensors.append(u[:, :keep].reshape(dl, 2, keep).transpose(1, 0, 2))
        rest = s[:keep, None] * vh[:keep]
    tensors.append(rest.reshape(rest.shape[0], 2, 1).transpose(1, 0, 2))
    return MpsState(tensors, ortho_center=n - 1)


def random_mps(n: int, chi: int, rng: np.random.Generator) -> MpsState:
    """Normalized random MPS with bond dimensions up to ``chi``."""
    dims = [1] + [min(chi, 2**k, 2 ** (n - k)) for k in range(1, n)] + [1]
    tensors = [
        rng.normal(size=(2, dims[k], dims[k + 1])) + 1j * rng.normal(size=(2, dims[k], dims[k + 1]))
        for k in range(n)
    ]
    return MpsState(tensors).normalize_()


# -- value-style wrappers -----------------------------------------------------


def apply_two_qubit_gate(state: MpsState, gate: np.ndarray, site: int) -> MpsState:
    return state.copy().apply_two_qubit_gate_(gate, site)


def apply_single_qubit_operator(state: MpsState, op: np.ndarray, site: int):
    out = state.copy()
    sq = out.apply_single_qubit_operator_(op, site)
    return out, sq


def normalize(state: MpsState) -> MpsState:
    return state.copy().normalize_()


def truncate(state: MpsState, chi: int, bonds: Sequence[int] | None = None):
    out = state.copy()
    report = out.truncate_(chi, bonds)
    return out, report


def schmidt_at_cut(state: MpsState, k: int) -> SchmidtCut:
    return state.schmidt_at_cut(k)


def entropy_at_cut(state: MpsState, k: int) -> float:
    return state.entropy_at_cut(k)


def expectation_mpo(state: MpsState, mpo: Sequence[np.ndarray]) -> complex:
    return state.expectation_mpo(mpo)


def sample_bitstring(state: MpsState, rng: np.random.Generator) -> str:
    return state.copy().sample_bitstring(rng)


def to_dense(state: MpsState) -> np.ndarray:
    return state.to_dense()


def save_mps(state: MpsState, path: str | Path) -> None:
    Path(path).write_text(json.dumps(state.to_dict()))


def load_mps(path: str | Path) -> MpsState:
    return MpsState.from_dict(json.loads(Path(path).read_text()))


# -- MPO helpers --------------------------------------------------------------


def product_mpo(n: int, ops: dict[int, np.ndarray]) -> list[np.ndarray]:
    """Bond-dimension-1 MPO of a tensor product of single-site operators."""
    mpo = []
    for k in range(n):
        op = np.asarray(ops.get(k, np.eye(2)), dtype=complex)
        mpo.append(op.reshape(2, 2, 1, 1))
    return mpo


def mpo_to_dense(mpo: Sequence[np.ndarray]) -> np.ndarray:
    m = np.asarray(mpo[0])[:, :, 0, :]
    for w in mpo[1:]:
        m = np.einsum("pqa,rsab->prqsb", m, w)
        d = m.shape[0] * m.shape[1]
        m = m.reshape(d, d, -1)
    return m[:, :, 0]
