"""Acceptance checks shared by the test-suite and ``unravel verify``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from ._linalg import binary_entropy, schmidt_entropy
from .channels import (
    average_unitarity,
    kraus_sets_equal,
    named_kraus,
    random_channel,
    rotate_kraus,
    unitarity,
)
from .circuits import brickwork_circuit, haar_unitary, heisenberg_model
from .lindblad import LOWERING, PROJ0, half_step_noise, jump_channel_kraus, jump_generator, trotterize
from .mps import from_dense, product_mpo
from .oracle import (
    born_probabilities,
    brute_force_eof,
    dense_evolve,
    trace_distance,
    tv_distance,
)
from .trajectory import (
    enumerate_kraus_tree,
    estimate_error,
    estimate_observable,
    run_trajectories,
    sample_outputs,
)
from .unraveler import (
    STRATEGIES,
    EffectiveTwoQubitState,
    average_entropy,
    effective_two_qubit,
    least_unitary_kraus,
    locally_optimal_kraus,
)
from .wootters import entanglement_of_formation, optimal_decomposition
from .experiment import saturation, midcut_entropy


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.key} {self.title}: {self.detail} ({self.seconds:.1f}s)"


def _timed(key: str, title: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(key, title, bool(passed), detail, time.perf_counter() - t0)


def random_density(rng: np.random.Generator, rank: int = 4) -> np.ndarray:
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def werner(lam: float) -> np.ndarray:
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    return lam * np.outer(singlet, singlet) + (1 - lam) * np.eye(4) / 4


BELL = EffectiveTwoQubitState.from_schmidt(1 / np.sqrt(2))


# -- 1 -------------------------------------------------------------------------


def check_wootters_vs_brute_force(seed: int = 0, n_states: int = 50, restarts: int = 32):
    def run():
        rng = np.random.default_rng(seed)
        t0 = time.perf_counter()
        worst_below, worst_above = 0.0, 0.0
        for i in range(n_states):
            rho = random_density(rng, (2, 3, 4)[i % 3])
            closed = entanglement_of_formation(rho)
            brute = brute_force_eof(rho, restarts=restarts, rng=rng)
            worst_above = max(worst_above, closed - brute)
            worst_below = max(worst_below, brute - closed)
        elapsed = time.perf_counter() - t0
        ok = worst_above <= 1e-6 and worst_below <= 1e-4 and elapsed < 120
        return ok, (
            f"max(closed-brute)={worst_above:.2e}, max(brute-closed)={worst_below:.2e}, "
            f"{n_states} states in {elapsed:.1f}s"
        )

    return _timed("AC1", "closed-form E_oF vs brute force", run)


# -- 2 -------------------------------------------------------------------------


def check_equal_entropy(seed: int = 0, n_states: int = 1000):
    def run():
        rng = np.random.default_rng(seed)
        worst_rec, worst_ent, count = 0.0, 0.0, 0
        while count < n_states:
            rho = random_density(rng, int(rng.integers(1, 5)))
            dec = optimal_decomposition(rho)
            if dec.concurrence <= 0:
                continue
            count += 1
            worst_rec = max(worst_rec, np.linalg.norm(dec.density() - rho))
            for p, k in zip(dec.probs, range(dec.states.shape[1])):
                if p > 1e-12:
                    worst_ent = max(worst_ent, abs(schmidt_entropy(dec.states[:, k]) - dec.e_of))
        worst_sep = 0.0
        for lam in np.linspace(0, 1 / 3, 25):
            rho = werner(lam)
            dec = optimal_decomposition(rho)
            worst_sep = max(worst_sep, dec.average_entropy())
            worst_rec = max(worst_rec, np.linalg.norm(dec.density() - rho))
        ok = worst_rec < 1e-9 and worst_ent < 1e-7 and worst_sep < 1e-6
        return ok, (
            f"reconstruction {worst_rec:.1e}, entropy spread {worst_ent:.1e} "
            f"on {n_states} entangled states, Werner E_av {worst_sep:.1e}"
        )

    return _timed("AC2", "equal-entropy optimal decompositions", run)


# -- 3 -------------------------------------------------------------------------

CLOSED_FORMS = {
    "dephasing": lambda p: binary_entropy((1 + np.sqrt((2 - p) * p)) / 2),
    "depolarizing": lambda p: binary_entropy((2 + np.sqrt(3) * np.sqrt((4 - 3 * p) * p)) / 4),
    "amplitude_damping": lambda g: binary_entropy((1 + np.sqrt(g)) / 2),
}
RATE_GRIDS = {
    "dephasing": np.linspace(0.02, 0.98, 20),
    "depolarizing": np.linspace(0.02, 0.64, 20),
    "amplitude_damping": np.linspace(0.02, 0.98, 20),
}


def check_choi_closed_forms():
    def run():
        worst, mismatched = 0.0, []
        for model, rates in RATE_GRIDS.items():
            for r in rates:
                ch = named_kraus(model, r)
                opt, _ = locally_optimal_kraus(ch, BELL)
                if not kraus_sets_equal(opt, named_kraus(model, r, "haar_optimal")):
                    mismatched.append(f"{model}({r:.2f})")
                worst = max(worst, abs(average_entropy(opt, BELL.psi) - CLOSED_FORMS[model](r)))
        ok = not mismatched and worst < 1e-9
        detail = f"max |E_av - closed form| = {worst:.1e}; set mismatches: {mismatched or 'none'}"
        return ok, detail

    return _timed("AC3", "Choi-optimal Kraus sets and closed forms", run)


# -- 4 -------------------------------------------------------------------------


def _random_instance(rng: np.random.Generator, max_leaves: int = 1500):
    while True:
        n = int(rng.integers(2, 5))
        depth = int(rng.integers(1, 5))
        chi = int(rng.integers(1, 3))
        model = ("dephasing", "amplitude_damping", "depolarizing")[int(rng.integers(0, 3))]
        strategy = STRATEGIES[int(rng.integers(0, len(STRATEGIES)))]
        if model == "amplitude_damping" and strategy == "projective":
            continue
        ch = named_kraus(model, float(rng.uniform(0.05, 0.5)))
        mode = ("global", "local")[int(rng.integers(0, 2))]
        circ = brickwork_circuit(n, depth, "haar", ch, layering_mode=mode, seed=int(rng.integers(2**31)))
        width = {"projective": 5 if model == "depolarizing" else 3}.get(strategy, len(ch))
        n_noise = sum(len(layer.channels) for layer in circ.layers if hasattr(layer, "channels"))
        if width**n_noise <= max_leaves:
            return circ, chi, strategy


def check_certificate_soundness(seed: int = 0, n_instances: int = 100, n_traj: int = 50, delta: float = 0.05):
    def run():
        rng = np.random.default_rng(seed)
        exact_fail, covered, slack = 0, 0, []
        for i in range(n_instances):
            circ, chi, strategy = _random_instance(rng)
            rho = dense_evolve(circ)
            for eps_max in (2.0, 4.0):
                tree = enumerate_kraus_tree(circ, chi, strategy, eps_max=eps_max)
                td = trace_distance(rho, tree.rho)
                if td > tree.expected_eps_bound + 1e-10:
                    exact_fail += 1
                slack.append(tree.expected_eps_bound - td)
            tree = enumerate_kraus_tree(circ, chi, strategy, eps_max=4.0)
            td = trace_distance(rho, tree.rho)
            recs = run_trajectories(circ, chi, strategy, n_traj, seed=1000 + i, eps_max=4.0)
            if estimate_error(recs, delta).total >= td:
                covered += 1
        ok = exact_fail == 0 and covered >= math.ceil(0.95 * n_instances)
        return ok, (
            f"exact violations {exact_fail}/{2 * n_instances}, min slack {min(slack):.2e}; "
            f"sampled coverage {covered}/{n_instances}"
        )

    return _timed("AC4", "error certificate soundness (tree enumeration + sampling)", run)


# -- 5 -------------------------------------------------------------------------


def check_full_bond_exactness(seed: int = 0):
    def run():
        rng = np.random.default_rng(seed)
        worst, eps_seen = 0.0, 0.0
        cases = 0
        for n in (2, 3, 4, 5):
            for strategy in STRATEGIES:
                small = n <= 3 and strategy != "projective"
                model = "depolarizing" if small else "dephasing"
                depth = 2 if n == 5 else 3
                circ = brickwork_circuit(
                    n, depth, "haar", named_kraus(model, 0.2), seed=int(rng.integers(2**31))
                )
                chi = 2 ** (n // 2)
                tree = enumerate_kraus_tree(circ, chi, strategy)
                worst = max(worst, float(np.max(np.abs(tree.rho - dense_evolve(circ)))))
                recs = run_trajectories(circ, chi, strategy, 20, seed=cases)
                eps_seen = max(eps_seen, tree.expected_eps_bound, estimate_error(recs).mean)
                cases += 1
        ok = worst < 1e-9 and eps_seen == 0.0
        return ok, f"{cases} circuits, max |rho_tree - rho_dense| = {worst:.1e}, max eps = {eps_seen}"

    return _timed("AC5", "exactness at full bond dimension", run)


# -- 6 -------------------------------------------------------------------------


def check_lindblad_closed_forms():
    def run():
        worst = 0.0
        grid = [(g, dt) for g in (0.01, 0.3, 1.0, 5.0) for dt in (0.001, 0.05, 0.2, 1.0)]
        rng = np.random.default_rng(0)
        for gamma, dt in grid:
            for c, model, rate in (
                (PROJ0, "dephasing", 1 - np.exp(-gamma * dt / 2)),
                (LOWERING, "amplitude_damping", 1 - np.exp(-gamma * dt)),
            ):
                ch = jump_channel_kraus(c, gamma, dt)
                ref = named_kraus(model, rate)
                if len(ch.ops) != len(ref.ops):
                    return False, f"operator count differs at gamma*dt={gamma * dt}"
                worst = max(worst, max(np.max(np.abs(a - b)) for a, b in zip(ch.ops, ref.ops)))
                prop = scipy.linalg.expm(jump_generator(c, gamma) * dt)
                rho = random_density(rng, 2)[:2, :2]
                rho = rho / np.trace(rho)
                worst = max(worst, np.max(np.abs((prop @ rho.reshape(-1)).reshape(2, 2) - ch.apply(rho))))
        return worst < 1e-10, f"max deviation {worst:.1e} over {len(grid)} (gamma, dt) pairs"

    return _timed("AC6", "Lindblad jump channels match closed forms", run)


# -- 7 -------------------------------------------------------------------------


def hierarchy_run(gamma: float, n: int = 8, steps: int = 150, n_traj: int = 100, chi: int = 16,
                  dt: float = 0.1, seed: int = 0, workers: int = 1):
    model = heisenberg_model(n, dt)
    noise = half_step_noise(n, named_kraus("amplitude_damping", gamma))
    circ = trotterize(model, steps, noise_override=noise)
    out = {}
    for strategy in ("orthogonal", "haar_optimal", "locally_optimal"):
        recs = run_trajectories(circ, chi, strategy, n_traj, seed, workers, observe=midcut_entropy)
        out[strategy] = saturation(recs)
    return out


def check_hierarchy(gammas=(0.002, 0.01), seed: int = 0, **kwargs):
    def run():
        ok, parts = True, []
        for gamma in gammas:
            s = hierarchy_run(gamma, seed=seed, **kwargs)
            (lo, elo), (ha, eha), (orth, eorth) = (
                s["locally_optimal"], s["haar_optimal"], s["orthogonal"],
            )
            first = lo <= ha + 2 * math.hypot(elo, eha)
            second = ha <= orth + 2 * math.hypot(eha, eorth)
            ok &= first and second
            strict = lo < ha < orth
            parts.append(
                f"gamma={gamma}: S_lo={lo:.3f}+-{elo:.3f}, S_haar={ha:.3f}+-{eha:.3f}, "
                f"S_orth={orth:.3f}+-{eorth:.3f}{' (strict)' if strict else ''}"
            )
        return ok, "; ".join(parts)

    return _timed("AC7", "entanglement hierarchy, Heisenberg + amplitude damping", run)


# -- 8 -------------------------------------------------------------------------


def check_haar_reduction(seed: int = 0, n_states: int = 50):
    def run():
        mismatched = []
        for model in ("dephasing", "depolarizing", "amplitude_damping"):
            for r in np.linspace(0.05, 0.6, 8):
                ch = named_kraus(model, r)
                eff = EffectiveTwoQubitState.from_schmidt(math.sqrt(0.5))
                adaptive, _ = locally_optimal_kraus(ch, eff)
                if not kraus_sets_equal(adaptive, least_unitary_kraus(ch)):
                    mismatched.append(f"{model}({r:.2f})")
        rng = np.random.default_rng(seed)
        devs = []
        for _ in range(n_states):
            psi = rng.normal(size=256) + 1j * rng.normal(size=256)
            state = from_dense(psi / np.linalg.norm(psi))
            for q in range(8):
                devs.append(abs(effective_two_qubit(state, q).s ** 2 - 0.5))
        mean_dev = float(np.mean(devs))
        ok = not mismatched and mean_dev < 0.1
        return ok, f"set mismatches: {mismatched or 'none'}; Haar 8-qubit mean |s^2-1/2| = {mean_dev:.4f}"

    return _timed("AC8", "Haar-reduction equivalence", run)


# -- 9 -------------------------------------------------------------------------


def check_downstream_coverage(seed: int = 0, runs: int = 200, n_per_run: int = 50, n_bits: int = 10_000,
                 delta: float = 0.05, delta_prime: float = 0.05):
    def run():
        n = 5
        circ = brickwork_circuit(n, 6, "haar", named_kraus("depolarizing", 0.05), seed=seed + 11)
        rho = dense_evolve(circ)
        mpo = product_mpo(n, {0: np.diag([1.0, -1.0])})
        exact_z = float(np.trace(rho @ np.kron(np.diag([1.0, -1.0]), np.eye(2 ** (n - 1)))).real)
        p_exact = born_probabilities(rho)
        parts, ok = [], True
        for chi in (2, 4):
            hits = 0
            for k in range(runs):
                est = estimate_observable(circ, chi, "orthogonal", mpo, n_per_run, delta, delta_prime,
                                          seed=seed * 100_000 + k)
                hits += abs(est.value - exact_z) <= est.bound
            rate = hits / runs
            bits, recs = sample_outputs(circ, chi, "orthogonal", n_bits, seed=seed + 7, return_records=True)
            counts = np.bincount([int(b, 2) for b in bits], minlength=2**n) / n_bits
            tv = tv_distance(counts, p_exact)
            sigma = 0.5 * float(np.sum(np.sqrt(p_exact * (1 - p_exact) / n_bits)))
            bound = estimate_error(recs, delta).total
            tv_ok = tv <= bound / 2 + 3 * sigma
            ok &= rate >= 1 - delta - delta_prime and tv_ok
            parts.append(
                f"chi={chi}: coverage {rate:.3f}, TV {tv:.4f} <= {bound / 2 + 3 * sigma:.4f}"
            )
        return ok, "; ".join(parts)

    return _timed("AC9", "bitstring sampling and observable coverage", run)


# -- 10 ------------------------------------------------------------------------


def check_unitarity(seed: int = 0, n_rotations: int = 200):
    def run():
        rng = np.random.default_rng(seed)
        dev_u = max(abs(unitarity(haar_unitary(2, rng)) - 1) for _ in range(100))
        dev_r = 0.0
        for _ in range(100):
            a = rng.normal(size=2) + 1j * rng.normal(size=2)
            b = rng.normal(size=2) + 1j * rng.normal(size=2)
            dev_r = max(dev_r, unitarity(np.outer(a, b.conj())))
        channels = [named_kraus(m, r) for m in ("dephasing", "depolarizing", "amplitude_damping")
                    for r in (0.1, 0.4)]
        channels += [random_channel(rng, int(rng.integers(2, 5))) for _ in range(4)]
        worst_gain = -np.inf
        for ch in channels:
            best = least_unitary_kraus(ch)
            base = average_unitarity(best)
            for _ in range(n_rotations):
                dim = int(rng.integers(len(best), 6))
                other = rotate_kraus(best, haar_unitary(dim, rng))
                worst_gain = max(worst_gain, base - average_unitarity(other))
        ok = dev_u < 1e-12 and dev_r < 1e-12 and worst_gain <= 1e-8
        return ok, (
            f"|u(U)-1| <= {dev_u:.1e}, u(rank 1) <= {dev_r:.1e}, "
            f"best improvement by a random rotation {worst_gain:.1e}"
        )

    return _timed("AC10", "operator unitarity and least-unitary optimality", run)


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "AC1": check_wootters_vs_brute_force,
    "AC2": check_equal_entropy,
    "AC3": check_choi_closed_forms,
    "AC4": check_certificate_soundness,
    "AC5": check_full_bond_exactness,
    "AC6": check_lindblad_closed_forms,
    "AC7": check_hierarchy,
    "AC8": check_haar_reduction,
    "AC9": check_downstream_coverage,
    "AC10": check_unitarity,
}

SUITES = {
    "wootters": ("AC1", "AC2"),
    "choi": ("AC3", "AC8", "AC10"),
    "theorem1": ("AC4", "AC5"),
    "lindblad": ("AC6",),
    "hierarchy": ("AC7",),
    "sampling": ("AC9",),
    "quick": ("AC2", "AC3", "AC5", "AC6", "AC8", "AC10"),
    "all": tuple(CHECKS),
}


def run_suite(tag: str, seed: int = 0, echo: bool = True) -> list[CheckResult]:
    results = []
    for key in SUITES[tag]:
        res = CHECKS[key](seed=seed) if key not in ("AC3", "AC6") else CHECKS[key]()
        if echo:
            print(res.line(), flush=True)
        results.append(res)
    return results
