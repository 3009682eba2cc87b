"""Single-qubit channels in Kraus form.

Vectorization convention used throughout: ``|K>> = (K (x) I)|Omega>`` with
``|Omega> = sum_j |jj>``.  In numpy this is ``K.reshape(-1)`` (row-major), so
``vec(A rho B) = (A (x) B^T) vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._linalg import H2, H4, I2, X, Y, Z, is_unitary, shannon

NAMED_MODELS = ("dephasing", "depolarizing", "amplitude_damping")
FLAVORS = ("orthogonal", "projective", "haar_optimal")
ZERO_OP = 1e-12


@dataclass(frozen=True)
class KrausChannel:
    """Ordered Kraus operators of a single-qubit channel.

    ``model`` and ``rate`` are set for the named families so that fixed
    unravelings can be rebuilt from the channel alone.
    """

    ops: tuple[np.ndarray, ...]
    label: str = ""
    model: str | None = None
    rate: float | None = None

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.ops)
        if not ops or any(k.shape != (2, 2) for k in ops):
            raise ValueError("Kraus operators must be a non-empty list of 2x2 matrices")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "ops", ops)

    def __len__(self) -> int:
        return len(self.ops)

    def tp_defect(self) -> float:
        s = sum(k.conj().T @ k for k in self.ops)
        return float(np.max(np.abs(s - I2)))

    def validate_tp(self, tol: float = 1e-10) -> "KrausChannel":
        if self.tp_defect() > tol:
            raise ValueError(f"channel {self.label!r} is not trace preserving")
        return self

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.ops)

    def drop_zero_ops(self, tol: float = ZERO_OP) -> "KrausChannel":
        kept = [k for k in self.ops if np.linalg.norm(k) >= tol]
        return KrausChannel(tuple(kept), self.label, self.model, self.rate)


def validate_tp(channel: KrausChannel, tol: float = 1e-10) -> KrausChannel:
    return channel.validate_tp(tol)


def _check_rate(rate: float) -> float:
    rate = float(rate)
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    return rate


def _orthogonal(model: str, r: float) -> list[np.ndarray]:
    if model == "dephasing":
        return [np.sqrt(1 - r / 2) * I2, np.sqrt(r / 2) * Z]
    if model == "depolarizing":
        return [np.sqrt(1 - 3 * r / 4) * I2] + [np.sqrt(r) / 2 * p for p in (X, Y, Z)]
    if model == "amplitude_damping":
        return [
            np.array([[1, 0], [0, np.sqrt(1 - r)]], dtype=complex),
            np.array([[0, np.sqrt(r)], [0, 0]], dtype=complex),
        ]
    raise ValueError(f"unknown channel model {model!r}")


def named_kraus(model: str, rate: float, flavor: str = "orthogonal") -> KrausChannel:
    r = _check_rate(rate)
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}")
    label = f"{model}({r:g}):{flavor}"
    if flavor == "orthogonal":
        ops = _orthogonal(model, r)
    elif flavor == "haar_optimal":
        ops = _orthogonal(model, r)
        h = H4 if len(ops) == 4 else H2
        ops = list(rotate_kraus(KrausChannel(tuple(ops)), h, validate=False).ops)
    elif model == "dephasing":
        p0 = np.diag([1.0, 0.0]).astype(complex)
        p1 = np.diag([0.0, 1.0]).astype(complex)
        ops = [np.sqrt(1 - r) * I2, np.sqrt(r) * p0, np.sqrt(r) * p1]
    elif model == "depolarizing":
        ops = [np.sqrt(1 - r) * I2]
        for a in range(2):
            for b in range(2):
                e = np.zeros((2, 2), dtype=complex)
                e[a, b] = 1.0
                ops.append(np.sqrt(r / 2) * e)
    elif model == "amplitude_damping":
        raise ValueError("amplitude damping has no projective unraveling")
    else:
        raise ValueError(f"unknown channel model {model!r}")
    return KrausChannel(tuple(ops), label, model, r)


def rotate_kraus(channel: KrausChannel, u: np.ndarray, validate: bool = True) -> KrausChannel:
    """Mix Kraus operators: ``K'_j = sum_i u[i, j] K_i``.

    The channel is zero-padded up to the size of ``u``.  Operators with
    negligible norm are removed from the output.
    """
    u = np.asarray(u, dtype=complex)
    r = len(channel)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < r:
        raise ValueError("rotation must be square and at least as large as the Kraus set")
    if not is_unitary(u):
        raise ValueError("rotation is not unitary within 1e-10")
    stack = np.zeros((u.shape[0], 2, 2), dtype=complex)
    stack[:r] = channel.ops
    new = np.einsum("ij,iab->jab", u, stack)
    out = KrausChannel(tuple(new), channel.label, channel.model, channel.rate).drop_zero_ops()
    return out.validate_tp() if validate else out


def choi(channel: KrausChannel) -> np.ndarray:
    """Normalized Choi state ``(1/2) sum_i |K_i>><<K_i|``."""
    vecs = np.array([k.reshape(-1) for k in channel.ops])
    return vecs.T @ vecs.conj() / 2


def choi_to_kraus(c: np.ndarray, tol: float = 1e-12) -> list[np.ndarray]:
    """Kraus operators from eigenvectors of a (normalized) Choi state, largest weight first."""
    w, v = np.linalg.eigh((c + c.conj().T) / 2)
    order = np.argsort(-w, kind="stable")
    ops = []
    for i in order:
        if w[i] < tol:
            continue
        k = np.sqrt(2 * w[i]) * v[:, i].reshape(2, 2)
        flat = k.reshape(-1)
        lead = flat[np.flatnonzero(np.abs(flat) > 1e-12)[0]]
        ops.append(k * abs(lead) / lead)
    return ops


def minimal_kraus(channel: KrausChannel) -> KrausChannel:
    """Canonical (Choi-eigenvector) Kraus set with at most four operators."""
    ops = choi_to_kraus(choi(channel))
    return KrausChannel(tuple(ops), channel.label, channel.model, channel.rate)


def orthogonal_kraus(channel: KrausChannel) -> KrausChannel:
    if channel.model in NAMED_MODELS and channel.rate is not None:
        return named_kraus(channel.model, channel.rate, "orthogonal")
    return minimal_kraus(channel)


def unitarity(k: np.ndarray) -> float:
    k = np.asarray(k, dtype=complex)
    fro2 = float(np.vdot(k, k).real)
    if fro2 == 0:
        raise ValueError("unitarity is undefined for the zero operator")
    s = np.linalg.svd(k, compute_uv=False)
    return shannon(s**2 / fro2)


def average_unitarity(channel: KrausChannel) -> float:
    total = 0.0
    for k in channel.ops:
        w = float(np.vdot(k, k).real)
        if w > ZERO_OP**2:
            total += w * unitarity(k)
    return total / 2


def channel_from_spec(spec: dict) -> KrausChannel:
    """Build a channel from its JSON description.

    Accepted forms: ``{"model": ..., "rate": x, "flavor": ...}`` or
    ``{"custom": [op, ...]}`` where each op is a 2x2 nested list of numbers or
    ``[re, im]`` pairs.
    """
    if "custom" in spec:
        ops = [_parse_matrix(m) for m in spec["custom"]]
        return KrausChannel(tuple(ops), spec.get("label", "custom")).validate_tp()
    return named_kraus(spec["model"], spec["rate"], spec.get("flavor", "orthogonal"))


def channel_to_spec(channel: KrausChannel) -> dict:
    """Named form when the operators are exactly a named set, custom form otherwise."""
    if channel.model is not None:
        for flavor in FLAVORS:
            try:
                ref = named_kraus(channel.model, channel.rate, flavor)
            except ValueError:
                continue
            if len(ref) == len(channel) and all(
                np.allclose(a, b, atol=1e-14) for a, b in zip(ref.ops, channel.ops)
            ):
                return {"model": channel.model, "rate": channel.rate, "flavor": flavor}
    return {
        "custom": [[[[z.real, z.imag] for z in row] for row in k] for k in channel.ops],
        "label": channel.label,
    }


def _parse_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=float) if not _has_complex(m) else np.asarray(m, dtype=complex)
    if a.shape == (2, 2, 2):
        a = a[..., 0] + 1j * a[..., 1]
    if a.shape != (2, 2):
        raise ValueError("custom Kraus operators must be 2x2")
    return a.astype(complex)


def _has_complex(m) -> bool:
    return any(isinstance(x, complex) for x in np.ravel(np.asarray(m, dtype=object)))


def apply_to_density(ops: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    return sum(k @ rho @ np.conj(k).T for k in ops)


def kraus_sets_equal(a: KrausChannel, b: KrausChannel, tol: float = 1e-9) -> bool:
    """Equality of Kraus sets up to a phase per operator and reordering."""
    left = [k for k in a.ops if np.linalg.norm(k) >= ZERO_OP]
    right = [k for k in b.ops if np.linalg.norm(k) >= ZERO_OP]
    if len(left) != len(right):
        return False
    unused = list(range(len(right)))
    for k in left:
        for j in unused:
            m = right[j]
            ov = np.vdot(m, k)
            phase = ov / abs(ov) if abs(ov) > 0 else 1.0
            if np.max(np.abs(k - phase * m)) <= tol:
                unused.remove(j)
                break
        else:
            return False
    return True


def random_channel(rng: np.random.Generator, n_ops: int = 4) -> KrausChannel:
    """Channel from a Haar-random Stinespring isometry."""
    g = rng.normal(size=(2 * n_ops, 2)) + 1j * rng.normal(size=(2 * n_ops, 2))
    q, _ = np.linalg.qr(g)
    return KrausChannel(tuple(q[2 * i : 2 * i + 2] for i in range(n_ops)), "random")
