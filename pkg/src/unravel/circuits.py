"""Random gate families and named circuit constructors."""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np
import scipy.linalg

from ._linalg import I2, X, Y, Z
from .channels import KrausChannel
from .lindblad import LindbladModel
from .trajectory import CircuitDescription, brick


def seeded_rng(seed) -> np.random.Generator:
    """Counter-based generator so seeded circuits are reproducible across platforms."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def haar_two_qubit(rng: np.random.Generator) -> np.ndarray:
    return haar_unitary(4, rng)


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def low_entangling_gate(rng: np.random.Generator, theta: float = 0.05) -> np.ndarray:
    if theta < 0:
        raise ValueError("theta must be non-negative")
    return scipy.linalg.expm(-1j * theta * random_hermitian(4, rng))


def low_entangling_with_local(rng: np.random.Generator, theta: float = 0.05) -> np.ndarray:
    u = low_entangling_gate(rng, theta)
    return np.kron(haar_unitary(2, rng), haar_unitary(2, rng)) @ u


GATE_FAMILIES: dict[str, Callable] = {
    "haar": lambda rng, theta: haar_two_qubit(rng),
    "low_entangling": low_entangling_gate,
    "low_entangling_local": low_entangling_with_local,
}


def brickwork_circuit(
    n: int,
    depth: int,
    gate_source="haar",
    noise: KrausChannel | Mapping[int, KrausChannel] | None = None,
    chi: int | None = None,
    layering_mode: str = "global",
    seed=0,
    theta: float = 0.05,
    initial_bits: str | None = None,
) -> CircuitDescription:
    """Alternating brick layers, each gate followed by noise on the two qubits it touched.

    ``gate_source`` is a family name, a fixed 4x4 matrix (translation
    invariant circuit), or a callable ``rng -> 4x4``.
    """
    if n < 2:
        raise ValueError("brickwork circuits need at least two qubits")
    rng = seeded_rng(seed)
    if isinstance(gate_source, str):
        family = GATE_FAMILIES[gate_source]
        draw = lambda: family(rng, theta)  # noqa: E731
    elif callable(gate_source):
        draw = lambda: gate_source(rng)  # noqa: E731
    else:
        fixed = np.asarray(gate_source, dtype=complex)
        draw = lambda: fixed  # noqa: E731
    layers = []
    for t in range(depth):
        gates = [(s, draw()) for s in range(t % 2, n - 1, 2)]
        touched = sorted({q for s, _ in gates for q in (s, s + 1)})
        if noise is None:
            chans = []
        elif isinstance(noise, KrausChannel):
            chans = [(q, noise) for q in touched]
        else:
            chans = [(q, noise[q]) for q in touched if q in noise]
        layers += brick(gates, chans, layering_mode, t, chi)
    return CircuitDescription(n, tuple(layers), initial_bits, layering_mode=layering_mode,
                              label=f"brickwork({gate_source if isinstance(gate_source, str) else 'custom'})")


def heisenberg_model(
    n: int,
    dt: float,
    swap_xy: bool = False,
    jumps: tuple = (),
    coupling: float = 1.0,
    fields: tuple[float, float, float] = (0.35, 0.35, 0.5),
) -> LindbladModel:
    """``sum_i c Y_i Y_{i+1} + hx X_i + hy Y_i + hz Z_i`` with open boundaries.

    ``swap_xy`` exchanges the roles of X and Y everywhere.
    """
    px, py = (Y, X) if swap_xy else (X, Y)
    hx, hy, hz = fields
    two = tuple(coupling * np.kron(py, py) for _ in range(n - 1))
    one = tuple(hx * px + hy * py + hz * Z for _ in range(n))
    return LindbladModel(n, two, one, tuple(jumps), dt)


def identity_gate() -> np.ndarray:
    return np.kron(I2, I2)
