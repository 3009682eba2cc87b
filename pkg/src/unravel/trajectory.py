"""Truncated trajectory sampling with certified error accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .channels import KrausChannel, minimal_kraus, orthogonal_kraus
from .mps import MpsState, new_product_state
from .unraveler import (
    PRODUCT_TOL,
    Strategy,
    _optimal_ops,
    branch_probabilities,
    effective_two_qubit,
    fixed_kraus,
    sample_branch,
)

LAYERING_MODES = ("global", "local")


# -- circuit description ------------------------------------------------------


@dataclass(frozen=True)
class UnitaryLayer:
    gates: tuple[tuple[int, np.ndarray], ...]
    step: int = 0


@dataclass(frozen=True)
class NoiseLayer:
    channels: tuple[tuple[int, KrausChannel], ...]
    step: int = 0


@dataclass(frozen=True)
class TruncateLayer:
    chi: int | None = None
    bonds: tuple[int, ...] | None = None
    step: int = 0


Layer = UnitaryLayer | NoiseLayer | TruncateLayer


@dataclass(frozen=True)
class CircuitDescription:
    n_qubits: int
    layers: tuple[Layer, ...]
    initial_bits: str | None = None
    qubit_ordering: tuple[int, ...] = ()
    layering_mode: str = "global"
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.layering_mode not in LAYERING_MODES:
            raise ValueError(f"unknown layering mode {self.layering_mode!r}")
        self.validate()

    def validate(self) -> None:
        n = self.n_qubits
        if n < 1:
            raise ValueError("circuit needs at least one qubit")
        for layer in self.layers:
            if isinstance(layer, UnitaryLayer):
                used: set[int] = set()
                for site, gate in layer.gates:
                    if not 0 <= site <= n - 2:
                        raise ValueError(f"gate site {site} out of range")
                    if {site, site + 1} & used:
                        raise ValueError("gates in one unitary layer must be disjoint")
                    if np.shape(gate) != (4, 4):
                        raise ValueError("gates must be 4x4")
                    used |= {site, site + 1}
            elif isinstance(layer, NoiseLayer):
                for site, _ in layer.channels:
                    if not 0 <= site <= n - 1:
                        raise ValueError(f"noise site {site} out of range")
            elif isinstance(layer, TruncateLayer):
                if layer.chi is not None and layer.chi < 1:
                    raise ValueError("chi must be >= 1")
                for k in layer.bonds or ():
                    if not 1 <= k <= n - 1:
                        raise ValueError(f"bond {k} out of range")
            else:
                raise TypeError(f"unknown layer type {type(layer).__name__}")

    @property
    def n_steps(self) -> int:
        return 1 + max((layer.step for layer in self.layers), default=-1)

    def initial_state(self) -> MpsState:
        return new_product_state(self.n_qubits, self.initial_bits)


def brick(
    gates: Sequence[tuple[int, np.ndarray]],
    noise: Mapping[int, KrausChannel] | Sequence[tuple[int, KrausChannel]],
    mode: str = "global",
    step: int = 0,
    chi: int | None = None,
) -> list[Layer]:
    """Layers for one brick color: gates, the noise after them, and truncation.

    ``global`` applies all gates, then all noise, then truncates every bond.
    ``local`` handles each gate in turn and truncates only the bond it acted on.
    Noise on sites no gate touched is appended at the end in local mode.
    """
    items = list(noise.items()) if isinstance(noise, Mapping) else list(noise)
    if mode == "global":
        return [
            UnitaryLayer(tuple(gates), step),
            NoiseLayer(tuple(items), step),
            TruncateLayer(chi, None, step),
        ]
    if mode != "local":
        raise ValueError(f"unknown layering mode {mode!r}")
    layers: list[Layer] = []
    done: set[int] = set()
    for site, gate in gates:
        mine = [(q, ch) for q, ch in items if q in (site, site + 1)]
        done |= {site, site + 1}
        layers += [
            UnitaryLayer(((site, gate),), step),
            NoiseLayer(tuple(mine), step),
            TruncateLayer(chi, (site + 1,), step),
        ]
    rest = [(q, ch) for q, ch in items if q not in done]
    if rest:
        layers.append(NoiseLayer(tuple(rest), step))
    return layers


# -- records ------------------------------------------------------------------


@dataclass
class TrajectoryRecord:
    final_state: MpsState
    per_layer_errors: list[float]
    layer_steps: list[int]
    eps_bound: float
    eps_max: float
    branches: list[tuple[int, int, float]]
    seed: tuple[int, int] | int | None
    observations: list = field(default_factory=list)

    @property
    def eps_total(self) -> float:
        return float(sum(self.per_layer_errors))

    def cumulative_bound(self) -> np.ndarray:
        """``eps_bound`` of the trajectory prefix ending at each step."""
        steps = max(self.layer_steps, default=-1) + 1
        per_step = np.zeros(steps)
        for e, s in zip(self.per_layer_errors, self.layer_steps):
            per_step[s] += e
        return np.array([bounded_total(c, self.eps_max) for c in np.cumsum(per_step)])

    def to_json(self) -> dict:
        return {
            "seed": list(self.seed) if isinstance(self.seed, tuple) else self.seed,
            "eps_bound": self.eps_bound,
            "eps_max": self.eps_max,
            "per_layer_errors": self.per_layer_errors,
            "layer_steps": self.layer_steps,
            "branches": [list(b) for b in self.branches],
        }


def truncation_error(two_norm_bound: float) -> float:
    """Trace-distance bound of one truncation layer (renormalization included), capped at 2."""
    return min(2.0, 4.0 * two_norm_bound)


def bounded_total(total: float, eps_max: float = 2.0) -> float:
    return float(total) if total <= eps_max - 2 else float(eps_max)


# -- RNG ----------------------------------------------------------------------


def trajectory_rng(seed) -> np.random.Generator:
    """Counter-based stream for one trajectory; ``seed`` is ``(master, index)`` or an int."""
    if isinstance(seed, (tuple, list)):
        master, index = seed
        ss = np.random.SeedSequence(int(master), spawn_key=(int(index),))
    else:
        ss = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(ss))


def trajectory_seeds(master: int, n: int) -> list[tuple[int, int]]:
    return [(int(master), i) for i in range(n)]


# -- execution ----------------------------------------------------------------


def _ops(circuit: CircuitDescription) -> Iterator[tuple]:
    """Flatten layers into primitive operations, marking the end of each step."""
    layers = circuit.layers
    for idx, layer in enumerate(layers):
        if isinstance(layer, UnitaryLayer):
            for site, gate in layer.gates:
                yield ("gate", site, gate, layer.step)
        elif isinstance(layer, NoiseLayer):
            for site, ch in layer.channels:
                yield ("noise", site, ch, layer.step)
        else:
            yield ("trunc", layer.bonds, layer.chi, layer.step)
        if idx + 1 == len(layers) or layers[idx + 1].step != layer.step:
            yield ("end", None, None, layer.step)


class _KrausCache:
    """Per-run memo of state-independent Kraus sets, keyed by channel identity."""

    def __init__(self, strategy: Strategy):
        self.strategy = strategy
        self._cache: dict[int, tuple[KrausChannel, object]] = {}

    def _memo(self, channel: KrausChannel, make):
        hit = self._cache.get(id(channel))
        if hit is None or hit[0] is not channel:
            hit = (channel, make(channel))
            self._cache[id(channel)] = hit
        return hit[1]

    def ops(self, channel: KrausChannel, state: MpsState, site: int):
        if not self.strategy.adaptive:
            return self._memo(channel, lambda ch: fixed_kraus(ch, self.strategy).ops)
        base, ortho = self._memo(channel, _adaptive_inputs)
        eff = effective_two_qubit(state, site)
        if eff.schmidt[1] < PRODUCT_TOL:
            return ortho
        return _optimal_ops(base, eff.psi)


def _adaptive_inputs(channel: KrausChannel):
    channel.validate_tp()
    base = minimal_kraus(channel) if len(channel) > 4 else channel
    return np.array(base.ops), orthogonal_kraus(channel).ops


def _truncate(state: MpsState, bonds, chi_layer, chi_run, exact_error: bool) -> float:
    chi = chi_layer if chi_layer is not None else chi_run
    if chi is None:
        return 0.0
    shadow = state.copy() if exact_error else None
    report = state.truncate_(chi, bonds)
    if not exact_error or report.two_norm_bound == 0:
        return truncation_error(report.two_norm_bound)
    fid = min(1.0, abs(overlap(shadow, state)) ** 2 / shadow.norm() ** 2)
    return float(min(2.0, 2 * math.sqrt(max(0.0, 1 - fid))))


def overlap(a: MpsState, b: MpsState) -> complex:
    env = np.ones((1, 1), dtype=complex)
    for x, y in zip(a.tensors, b.tensors):
        env = np.einsum("ab,pac,pbd->cd", env, x.conj(), y, optimize=True)
    return complex(env[0, 0])


def run_trajectory(
    circuit: CircuitDescription,
    chi: int | None = None,
    strategy="orthogonal",
    seed=0,
    eps_max: float = 2.0,
    exact_error: bool = False,
    observe: Callable[[MpsState], object] | None = None,
    rng: np.random.Generator | None = None,
    _cache: _KrausCache | None = None,
) -> TrajectoryRecord:
    """Sample one trajectory.

    ``chi=None`` disables truncation unless a truncate layer fixes its own
    ``chi``.  ``observe`` is called on the state at the end of every step and
    its results are stored in ``observations``.
    """
    if chi is not None and chi < 1:
        raise ValueError("chi must be >= 1")
    if eps_max < 2:
        raise ValueError("eps_max must be at least 2")
    strategy = Strategy.parse(strategy)
    rng = trajectory_rng(seed) if rng is None else rng
    cache = _cache or _KrausCache(strategy)
    state = circuit.initial_state()
    errors: list[float] = []
    steps: list[int] = []
    branches: list[tuple[int, int, float]] = []
    observations = []
    for kind, a, b, step in _ops(circuit):
        if kind == "gate":
            state.apply_two_qubit_gate_(b, a, check_unitary=False)
        elif kind == "noise":
            probs, new = branch_probabilities(state, cache.ops(b, state, a), a)
            i = sample_branch(probs, rng)
            state.tensors[a] = new[i] / math.sqrt(np.vdot(new[i], new[i]).real)
            branches.append((a, i, float(probs[i] / probs.sum())))
        elif kind == "trunc":
            errors.append(_truncate(state, a, b, chi, exact_error))
            steps.append(step)
        elif observe is not None:
            observations.append(observe(state))
    state.normalize_()
    return TrajectoryRecord(
        state, errors, steps, bounded_total(sum(errors), eps_max), eps_max, branches,
        tuple(seed) if isinstance(seed, (list, tuple)) else seed, observations,
    )


def _run_chunk(circuit, chi, strategy, seeds, kwargs):
    cache = _KrausCache(Strategy.parse(strategy))
    return [run_trajectory(circuit, chi, strategy, s, _cache=cache, **kwargs) for s in seeds]


def run_trajectories(
    circuit: CircuitDescription,
    chi: int | None,
    strategy,
    n: int,
    seed: int = 0,
    workers: int = 1,
    **kwargs,
) -> list[TrajectoryRecord]:
    """Run ``n`` independent trajectories; results do not depend on ``workers``."""
    seeds = trajectory_seeds(seed, n)
    if workers <= 1 or n <= 1:
        return _run_chunk(circuit, chi, strategy, seeds, kwargs)
    from joblib import Parallel, delayed

    chunks = [seeds[i::workers] for i in range(workers)]
    parts = Parallel(n_jobs=workers)(
        delayed(_run_chunk)(circuit, chi, strategy, c, kwargs) for c in chunks if c
    )
    by_seed = {r.seed: r for part in parts for r in part}
    return [by_seed[s] for s in seeds]


# -- error certificates --------------------------------------------------------


def hoeffding_buffer(eps_max: float, n: int, delta: float) -> float:
    return math.sqrt(eps_max**2 / (2 * n) * math.log(1 / delta))


@dataclass(frozen=True)
class ErrorEstimate:
    n: int
    mean: float
    delta: float
    eps_max: float
    buffer: float

    @property
    def total(self) -> float:
        return self.mean + self.buffer


def estimate_error(records: Sequence[TrajectoryRecord], delta: float = 0.05) -> ErrorEstimate:
    if not records:
        raise ValueError("need at least one trajectory record")
    eps_max = records[0].eps_max
    if any(r.eps_max != eps_max for r in records):
        raise ValueError("records disagree on eps_max")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    n = len(records)
    mean = float(np.mean([r.eps_bound for r in records]))
    return ErrorEstimate(n, mean, delta, eps_max, hoeffding_buffer(eps_max, n, delta))


def depolarizing_weights(n_qubits: int, p: float, n_layers: int) -> np.ndarray:
    """Contraction weights ``min(sqrt(8n) (1-p)^(L-l), 1)`` for layers l = 1..L."""
    ages = n_layers - np.arange(1, n_layers + 1)
    return np.minimum(math.sqrt(8 * n_qubits) * (1 - p) ** ages, 1.0)


def concentration_weighted_error(
    records: Sequence[TrajectoryRecord], alpha: float = 1.0, weights=None
) -> float:
    """Mean over records of ``sum_l w_l eps(l)`` with ``w_l = alpha^(L-l)`` unless given."""
    if weights is None and not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    totals = []
    for r in records:
        e = np.asarray(r.per_layer_errors, dtype=float)
        w = alpha ** (len(e) - np.arange(1, len(e) + 1)) if weights is None else np.asarray(weights)
        totals.append(float(np.dot(w[: len(e)], e)))
    return float(np.mean(totals))


# -- downstream tasks ----------------------------------------------------------


def sample_outputs(
    circuit: CircuitDescription,
    chi: int | None,
    strategy,
    n: int,
    seed: int = 0,
    return_records: bool = False,
    **kwargs,
):
    """One bitstring per independent trajectory (drawn from that trajectory's stream)."""
    cache = _KrausCache(Strategy.parse(strategy))
    bits, records = [], []
    for s in trajectory_seeds(seed, n):
        rng = trajectory_rng(s)
        rec = run_trajectory(circuit, chi, strategy, s, rng=rng, _cache=cache, **kwargs)
        bits.append(rec.final_state.sample_bitstring(rng))
        records.append(rec)
    return (bits, records) if return_records else bits


@dataclass(frozen=True)
class ObservableEstimate:
    value: float
    bound: float
    error: ErrorEstimate
    samples: np.ndarray


def estimate_observable(
    circuit: CircuitDescription,
    chi: int | None,
    strategy,
    mpo: Sequence[np.ndarray],
    n: int,
    delta: float = 0.05,
    delta_prime: float = 0.05,
    seed: int = 0,
    **kwargs,
) -> ObservableEstimate:
    """Trajectory average of ``<O>`` with a confidence bound, assuming ``||O|| <= 1``."""
    if len(mpo) != circuit.n_qubits:
        raise ValueError("MPO does not match the circuit size")
    records = run_trajectories(circuit, chi, strategy, n, seed, **kwargs)
    vals = np.array([r.final_state.expectation_mpo(mpo).real for r in records])
    err = estimate_error(records, delta)
    bound = err.total + math.sqrt(2 / n * math.log(2 / delta_prime))
    return ObservableEstimate(float(vals.mean()), bound, err, vals)


@dataclass(frozen=True)
class TreeResult:
    rho: np.ndarray
    expected_eps_bound: float
    n_leaves: int


def enumerate_kraus_tree(
    circuit: CircuitDescription,
    chi: int | None,
    strategy="orthogonal",
    eps_max: float = 2.0,
    max_leaves: int = 10**6,
    prob_floor: float = 1e-15,
) -> TreeResult:
    """Exact mixture and expected ``eps_bound`` over every trajectory branch.

    Branches with probability below ``prob_floor`` are pruned; their total
    weight is below ``prob_floor`` times the number of prunings.
    """
    strategy = Strategy.parse(strategy)
    cache = _KrausCache(strategy)
    ops = list(_ops(circuit))
    dim = 2**circuit.n_qubits
    rho = np.zeros((dim, dim), dtype=complex)
    acc = {"eps": 0.0, "leaves": 0}

    def walk(state: MpsState, pos: int, prob: float, err: float):
        while pos < len(ops):
            kind, a, b, _ = ops[pos]
            pos += 1
            if kind == "gate":
                state.apply_two_qubit_gate_(b, a, check_unitary=False)
            elif kind == "trunc":
                err += _truncate(state, a, b, chi, False)
            elif kind == "noise":
                probs, new = branch_probabilities(state, cache.ops(b, state, a), a)
                for i, p in enumerate(probs):
                    if p * prob <= prob_floor:
                        continue
                    child = state.copy()
                    child.tensors[a] = new[i] / math.sqrt(np.vdot(new[i], new[i]).real)
                    child.ortho_center = a
                    walk(child, pos, prob * p, err)
                return
        acc["leaves"] += 1
        if acc["leaves"] > max_leaves:
            raise RuntimeError("Kraus tree exceeds the leaf limit")
        psi = state.normalize_().to_dense()
        rho[:] += prob * np.outer(psi, psi.conj())
        acc["eps"] += prob * bounded_total(err, eps_max)

    walk(circuit.initial_state(), 0, 1.0, 0.0)
    return TreeResult(rho, acc["eps"], acc["leaves"])
