import numpy as np
import pytest
from hypothesis import given, strategies as st

from unravel._linalg import embed_operator
from unravel.channels import KrausChannel, average_unitarity, choi, kraus_sets_equal, named_kraus, random_channel
from unravel.mps import from_dense, new_product_state, random_mps, to_dense
from unravel.oracle import apply_channel, reduced_density
from unravel.unraveler import (
    STRATEGIES,
    EffectiveTwoQubitState,
    Strategy,
    average_entropy,
    branch_probabilities,
    effective_two_qubit,
    kraus_for_strategy,
    least_unitary_kraus,
    locally_optimal_kraus,
    sample_branch,
    unravel_channel,
)
from unravel.wootters import entanglement_of_formation

from conftest import random_state, random_unitary

seeds = st.integers(0, 2**32 - 1)
MODELS = ("dephasing", "depolarizing", "amplitude_damping")
PLUS = np.array([1, 1]) / np.sqrt(2)


def eff_density(channel, eff):
    c = eff.psi.reshape(2, 2)
    return sum(np.outer((k @ c).reshape(-1), (k @ c).reshape(-1).conj()) for k in channel.ops)


def strategies_for(channel):
    tags = [t for t in STRATEGIES if not (t == "projective" and channel.model == "amplitude_damping")]
    return tags


class TestEffectiveState:
    def test_product(self):
        eff = effective_two_qubit(new_product_state(4, "0110"), 1)
        assert eff.s == pytest.approx(1.0)
        assert abs(abs(eff.psi[2]) - 1) < 1e-12  # |1> on the target, partner |0>

    def test_ghz_middle(self):
        psi = np.zeros(8)
        psi[[0, 7]] = 2**-0.5
        assert effective_two_qubit(from_dense(psi), 1).s == pytest.approx(2**-0.5)

    @given(st.integers(2, 8), seeds)
    def test_reduced_state_matches(self, n, seed):
        rng = np.random.default_rng(seed)
        psi = random_state(rng, n)
        site = int(rng.integers(0, n))
        eff = effective_two_qubit(from_dense(psi), site)
        assert np.linalg.norm(eff.psi) == pytest.approx(1.0, abs=1e-10)
        assert eff.schmidt[0] >= eff.schmidt[1]
        assert np.allclose(eff.reduced_target(), reduced_density(psi, [site], n), atol=1e-9)


class TestLocallyOptimal:
    @pytest.mark.parametrize("model", MODELS)
    @pytest.mark.parametrize("rate", [0.1, 0.35, 0.6])
    def test_bell_gives_haar_sets(self, model, rate):
        opt, _ = locally_optimal_kraus(named_kraus(model, rate), EffectiveTwoQubitState.from_schmidt(2**-0.5))
        assert kraus_sets_equal(opt, named_kraus(model, rate, "haar_optimal"))

    @pytest.mark.parametrize("model", MODELS)
    def test_product_state_any_rotation(self, model):
        eff = EffectiveTwoQubitState.from_schmidt(1.0)
        opt, dec = locally_optimal_kraus(named_kraus(model, 0.3), eff)
        assert dec is None
        assert average_entropy(opt, eff.psi) == pytest.approx(0.0, abs=1e-12)
        assert average_entropy(named_kraus(model, 0.3, "haar_optimal"), eff.psi) == pytest.approx(0, abs=1e-12)

    @given(seeds, st.integers(1, 5))
    def test_attains_entanglement_of_formation(self, seed, r):
        rng = np.random.default_rng(seed)
        ch = random_channel(rng, r)
        s = float(rng.uniform(np.sqrt(0.5), 1.0))
        eff = EffectiveTwoQubitState.from_schmidt(s, random_unitary(rng, 2))
        opt, dec = locally_optimal_kraus(ch, eff)
        assert opt.tp_defect() < 1e-10
        assert len(opt) <= 4
        target = entanglement_of_formation(eff_density(ch, eff))
        assert average_entropy(opt, eff.psi) == pytest.approx(target, abs=1e-8)
        if dec is not None:
            assert dec.e_of == pytest.approx(target, abs=1e-10)

    @given(seeds, st.sampled_from(MODELS), st.floats(0.01, 0.99))
    def test_dominates_other_strategies(self, seed, model, rate):
        rng = np.random.default_rng(seed)
        state = random_mps(5, 4, rng)
        site = int(rng.integers(0, 5))
        ch = named_kraus(model, rate)
        eff = effective_two_qubit(state, site)
        best = average_entropy(kraus_for_strategy(ch, "locally_optimal", state, site), eff.psi)
        for tag in strategies_for(ch):
            assert best <= average_entropy(kraus_for_strategy(ch, tag, state, site), eff.psi) + 1e-8

    @given(st.floats(0.0, 1.0), st.floats(0.01, 0.99))
    def test_damping_hadamard_set_optimal_in_computational_basis(self, s, gamma):
        eff = EffectiveTwoQubitState.from_schmidt(max(s, np.sqrt(1 - s * s)))
        haar = named_kraus("amplitude_damping", gamma, "haar_optimal")
        opt, _ = locally_optimal_kraus(named_kraus("amplitude_damping", gamma), eff)
        assert average_entropy(haar, eff.psi) == pytest.approx(average_entropy(opt, eff.psi), abs=1e-8)

    @pytest.mark.parametrize("model", MODELS)
    def test_haar_reduction(self, model):
        eff = EffectiveTwoQubitState.from_schmidt(2**-0.5)
        ch = named_kraus(model, 0.27)
        assert kraus_sets_equal(locally_optimal_kraus(ch, eff)[0], least_unitary_kraus(ch))


class TestLeastUnitary:
    @pytest.mark.parametrize("model,rate", [("dephasing", 0.2), ("depolarizing", 0.5), ("amplitude_damping", 0.4)])
    def test_named(self, model, rate):
        assert kraus_sets_equal(least_unitary_kraus(named_kraus(model, rate)), named_kraus(model, rate, "haar_optimal"))

    def test_depolarizing_from_projective_input(self):
        # the Choi spectrum is threefold degenerate, so a different input set may
        # land on another, equally unitary-poor, decomposition
        for p in np.linspace(0.05, 0.65, 8):
            out = least_unitary_kraus(named_kraus("depolarizing", p, "projective"))
            ref = named_kraus("depolarizing", p, "haar_optimal")
            assert average_unitarity(out) == pytest.approx(average_unitarity(ref), abs=1e-10)
            assert np.allclose(choi(out), choi(ref), atol=1e-12)


class TestUnravel:
    def test_identity_channel(self, rng):
        state = random_mps(4, 4, rng)
        out, i, p = unravel_channel(state, KrausChannel((np.eye(2),)), 2, "orthogonal", rng)
        assert (i, p) == (0, pytest.approx(1.0))
        assert np.allclose(to_dense(out), to_dense(state))

    def test_projective_dephasing_on_plus(self):
        state = from_dense(np.kron(PLUS, [1, 0]))
        ops = named_kraus("dephasing", 1.0, "projective").ops
        probs, _ = branch_probabilities(state, ops, 0)
        assert np.allclose(probs, [0, 0.5, 0.5])

    @given(st.integers(2, 6), seeds, st.sampled_from(MODELS), st.floats(0.0, 1.0))
    def test_branch_mixture_is_channel_output(self, n, seed, model, rate):
        rng = np.random.default_rng(seed)
        psi = random_state(rng, n)
        state = from_dense(psi)
        site = int(rng.integers(0, n))
        ch = named_kraus(model, rate)
        expected = apply_channel(np.outer(psi, psi.conj()), ch, site, n)
        for tag in strategies_for(ch):
            ops = kraus_for_strategy(ch, tag, state, site).ops
            probs, new = branch_probabilities(state.copy(), ops, site)
            assert probs.sum() == pytest.approx(1.0, abs=1e-9)
            mix = 0
            for k, p in enumerate(probs):
                if p > 1e-14:
                    s = state.copy()
                    s.move_center_(site)
                    s.tensors[site] = new[k]
                    v = to_dense(s)
                    mix = mix + np.outer(v, v.conj())
            assert np.allclose(mix, expected, atol=1e-9)

    def test_updates_state_by_kraus(self, rng):
        psi = random_state(rng, 3)
        state = from_dense(psi)
        ch = named_kraus("amplitude_damping", 0.4)
        out, i, p = unravel_channel(state, ch, 1, "orthogonal", rng)
        v = embed_operator(ch.ops[i], (1,), 3) @ psi
        assert p == pytest.approx(np.linalg.norm(v) ** 2)
        assert abs(abs(np.vdot(v / np.linalg.norm(v), to_dense(out))) - 1) < 1e-10

    def test_sample_branch_validation(self, rng):
        with pytest.raises(ValueError):
            sample_branch(np.array([0.5, 0.4]), rng)
        with pytest.raises(ValueError):
            sample_branch(np.zeros(3), rng)

    def test_sample_branch_distribution(self, rng):
        p = np.array([0.2, 0.0, 0.5, 0.3])
        draws = np.bincount([sample_branch(p, rng) for _ in range(20000)], minlength=4) / 20000
        assert draws[1] == 0
        assert np.allclose(draws, p, atol=0.02)


class TestStrategy:
    def test_unknown(self):
        with pytest.raises(ValueError):
            Strategy.parse("greedy")

    def test_custom(self, rng):
        u = random_unitary(rng, 2)
        strat = Strategy.parse({"custom": [[[z.real, z.imag] for z in row] for row in u]})
        ch = named_kraus("dephasing", 0.3)
        out = kraus_for_strategy(ch, strat)
        assert np.allclose(out.ops[0], u[0, 0] * ch.ops[0] + u[1, 0] * ch.ops[1])

    def test_custom_requires_unitary(self):
        with pytest.raises(ValueError):
            Strategy("custom", np.ones((2, 2)))

    def test_adaptive_needs_state(self):
        with pytest.raises(ValueError):
            kraus_for_strategy(named_kraus("dephasing", 0.1), "locally_optimal")
