"""Compile 1D Lindbladians into noisy brickwork circuits.

Superoperators act on row-major vectorized density matrices, where
``vec(A rho B) = (A (x) B^T) vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._linalg import I2, PAULI
from .channels import KrausChannel, choi_to_kraus
from .trajectory import CircuitDescription, brick

CHOI_PSD_TOL = 1e-9
LOWERING = np.array([[0, 1], [0, 0]], dtype=complex)
PROJ0 = np.array([[1, 0], [0, 0]], dtype=complex)


@dataclass(frozen=True)
class LindbladModel:
    n_qubits: int
    two_site_terms: tuple[np.ndarray, ...]
    one_site_terms: tuple[np.ndarray, ...]
    jumps: tuple[tuple[int, np.ndarray, float], ...] = ()
    dt: float = 0.1

    def __post_init__(self):
        n = self.n_qubits
        two = tuple(np.asarray(h, dtype=complex) for h in self.two_site_terms)
        one = tuple(np.asarray(h, dtype=complex) for h in self.one_site_terms)
        jumps = tuple((int(s), np.asarray(c, dtype=complex), float(g)) for s, c, g in self.jumps)
        object.__setattr__(self, "two_site_terms", two)
        object.__setattr__(self, "one_site_terms", one)
        object.__setattr__(self, "jumps", jumps)
        if n < 2 or len(two) != n - 1 or len(one) != n:
            raise ValueError("need n-1 two-site terms and n one-site terms, n >= 2")
        for h in two + one:
            if np.max(np.abs(h - h.conj().T)) > 1e-12:
                raise ValueError("Hamiltonian terms must be Hermitian")
        for s, c, g in jumps:
            if not 0 <= s < n or c.shape != (2, 2) or g < 0:
                raise ValueError("invalid jump operator")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    def pair_hamiltonian(self, i: int) -> np.ndarray:
        """Bond term with each site field split evenly over the bonds touching it."""
        n = self.n_qubits
        wl = 1.0 if i == 0 else 0.5
        wr = 1.0 if i + 1 == n - 1 else 0.5
        h1 = self.one_site_terms
        return (
            self.two_site_terms[i]
            + wl * np.kron(h1[i], I2)
            + wr * np.kron(I2, h1[i + 1])
        )

    def hamiltonian(self) -> np.ndarray:
        n = self.n_qubits
        return sum(
            np.kron(np.kron(np.eye(2**i), self.pair_hamiltonian(i)), np.eye(2 ** (n - i - 2)))
            for i in range(n - 1)
        )


def jump_generator(c: np.ndarray, gamma: float) -> np.ndarray:
    """Vectorized dissipator ``gamma (c rho c^dag - {c^dag c, rho}/2)``."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    c = np.asarray(c, dtype=complex)
    cdc = c.conj().T @ c
    return gamma * (np.kron(c, c.conj()) - 0.5 * np.kron(cdc, I2) - 0.5 * np.kron(I2, cdc.T))


def superoperator_choi(s: np.ndarray) -> np.ndarray:
    """Reshuffle a single-qubit superoperator into its unnormalized Choi matrix (trace 2 if TP)."""
    return s.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)


def jump_channel_kraus(c: np.ndarray, gamma: float, dt: float) -> KrausChannel:
    if dt <= 0:
        raise ValueError("dt must be positive")
    c = np.asarray(c, dtype=complex)
    j = superoperator_choi(scipy.linalg.expm(jump_generator(c, gamma) * dt))
    j = (j + j.conj().T) / 2
    if np.linalg.eigvalsh(j).min() < -CHOI_PSD_TOL:
        raise ArithmeticError("propagator Choi matrix is not positive semidefinite")
    ops = choi_to_kraus(j / 2)
    model = rate = None
    if np.allclose(c, PROJ0 * c[0, 0]) and c[0, 0] != 0:
        model, rate = "dephasing", 1 - np.exp(-gamma * abs(c[0, 0]) ** 2 * dt / 2)
    elif np.allclose(c, LOWERING * c[0, 1]) and c[0, 1] != 0:
        model, rate = "amplitude_damping", 1 - np.exp(-gamma * abs(c[0, 1]) ** 2 * dt)
    return KrausChannel(tuple(ops), f"jump(gamma={gamma:g}, dt={dt:g})", model, rate)


def pair_unitary(model: LindbladModel, i: int) -> np.ndarray:
    return scipy.linalg.expm(-1j * model.dt * model.pair_hamiltonian(i))


def _jump_channels(model: LindbladModel, dt: float) -> list[tuple[int, KrausChannel]]:
    return [(s, jump_channel_kraus(c, g, dt)) for s, c, g in model.jumps if g > 0]


def trotterize(
    model: LindbladModel,
    steps: int = 1,
    layering_mode: str = "global",
    initial_bits: str | None = None,
    noise_override: list[tuple[int, KrausChannel]] | None = None,
) -> CircuitDescription:
    """First-order product formula: odd bonds, half-step noise, even bonds, half-step noise.

    ``noise_override`` replaces the compiled half-step jump channels with
    explicit ones (used when the noise strength is specified per sub-layer).
    """
    n = model.n_qubits
    noise = _jump_channels(model, model.dt / 2) if noise_override is None else list(noise_override)
    gates = {i: pair_unitary(model, i) for i in range(n - 1)}
    gates = {i: u for i, u in gates.items() if not np.allclose(u, np.eye(4), atol=1e-15)}
    layers = []
    for t in range(steps):
        for parity in (0, 1):
            g = [(i, gates[i]) for i in range(parity, n - 1, 2) if i in gates]
            if g:
                layers += brick(g, noise, layering_mode, t)
            elif noise:
                layers += brick([], noise, "global", t)[1:2]
    return CircuitDescription(n, tuple(layers), initial_bits, layering_mode=layering_mode,
                              label="trotterized lindbladian")


def dense_lindbladian(model: LindbladModel) -> np.ndarray:
    """Full vectorized generator (for small-n checks)."""
    n = model.n_qubits
    d = 2**n
    h = model.hamiltonian()
    eye = np.eye(d)
    gen = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for s, c, g in model.jumps:
        full = np.kron(np.kron(np.eye(2**s), c), np.eye(2 ** (n - s - 1)))
        cdc = full.conj().T @ full
        gen = gen + g * (np.kron(full, full.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T))
    return gen


# -- JSON model description ----------------------------------------------------

_NAMED_JUMPS = {"lowering": LOWERING, "dephasing": PROJ0}


def model_from_spec(spec: dict) -> LindbladModel:
    """Build a model from ``{"n", "dt", "terms": [...], "jumps": [...]}``.

    Terms are ``{"pauli": "YY", "site": i, "coef": x}`` (one or two letters,
    nearest neighbours); a term without ``site`` is repeated on every site or
    bond.  Jumps are ``{"site": i | "all", "op": "lowering" | "dephasing" |
    [[..]], "gamma": g}``.
    """
    n = int(spec["n"])
    two = [np.zeros((4, 4), dtype=complex) for _ in range(n - 1)]
    one = [np.zeros((2, 2), dtype=complex) for _ in range(n)]
    for term in spec.get("terms", []):
        p = term["pauli"].upper()
        op = PAULI[p[0]] if len(p) == 1 else np.kron(PAULI[p[0]], PAULI[p[1]])
        target = one if len(p) == 1 else two
        if len(p) > 2:
            raise ValueError("only one- and two-site Pauli terms are supported")
        sites = [term["site"]] if "site" in term else range(len(target))
        for s in sites:
            target[s] = target[s] + term.get("coef", 1.0) * op
    jumps = []
    for jmp in spec.get("jumps", []):
        c = jmp["op"]
        c = _NAMED_JUMPS[c] if isinstance(c, str) else np.asarray(c, dtype=complex)
        sites = range(n) if jmp.get("site", "all") == "all" else [jmp["site"]]
        jumps += [(s, c, float(jmp["gamma"])) for s in sites]
    return LindbladModel(n, tuple(two), tuple(one), tuple(jumps), float(spec.get("dt", 0.1)))


def half_step_noise(n: int, channel: KrausChannel) -> list[tuple[int, KrausChannel]]:
    return [(s, channel) for s in range(n)]

