import numpy as np
import pytest
from hypothesis import given, strategies as st

from unravel.acceptance import random_density, werner
from unravel.channels import named_kraus, random_channel
from unravel.circuits import brickwork_circuit
from unravel.oracle import (
    apply_channel,
    brute_force_eof,
    dense_evolve,
    product_density,
    pure_trace_distance,
    trace_distance,
    tv_distance,
)
from unravel.trajectory import CircuitDescription, UnitaryLayer
from unravel.wootters import entanglement_of_formation

from conftest import BELL, full_gate, random_state

seeds = st.integers(0, 2**32 - 1)


class TestDenseEvolve:
    def test_noiseless(self, rng):
        circ = brickwork_circuit(4, 3, "haar", seed=1)
        u = np.eye(16)
        for layer in circ.layers:
            if isinstance(layer, UnitaryLayer):
                for site, g in layer.gates:
                    u = full_gate(g, site, 4) @ u
        rho0 = product_density("0000")
        assert np.allclose(dense_evolve(circ), u @ rho0 @ u.conj().T)

    def test_full_depolarizing(self):
        circ = brickwork_circuit(4, 2, "haar", named_kraus("depolarizing", 1.0), seed=0)
        assert np.allclose(dense_evolve(circ), np.eye(16) / 16)

    def test_trace_preserved(self):
        circ = brickwork_circuit(5, 4, "haar", named_kraus("amplitude_damping", 0.3), seed=0)
        assert np.trace(dense_evolve(circ)).real == pytest.approx(1.0, abs=1e-10)

    def test_size_guard(self):
        with pytest.raises(ValueError):
            dense_evolve(CircuitDescription(11, ()))


class TestDistances:
    def test_identical(self, rng):
        rho = random_density(rng)
        assert trace_distance(rho, rho) == pytest.approx(0, abs=1e-12)

    def test_orthogonal_pure(self):
        assert trace_distance(product_density("01"), product_density("10")) == pytest.approx(2.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            trace_distance(np.eye(2), np.eye(4))
        with pytest.raises(ValueError):
            tv_distance([0.5, 0.5], [1.0])

    def test_tv(self):
        assert tv_distance([0.5, 0.5, 0], [0, 0.5, 0.5]) == pytest.approx(0.5)

    @given(seeds, st.floats(0.1, 2.0), st.floats(0.1, 2.0))
    def test_pure_state_identity(self, seed, a, b):
        rng = np.random.default_rng(seed)
        psi = a * random_state(rng, 3)
        phi = b * random_state(rng, 3)
        direct = trace_distance(np.outer(psi, psi.conj()), np.outer(phi, phi.conj()))
        assert pure_trace_distance(psi, phi) == pytest.approx(direct, abs=1e-10)

    @given(seeds)
    def test_channels_contract(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density(rng).reshape(4, 4)
        sigma = random_density(rng).reshape(4, 4)
        ch = random_channel(rng, int(rng.integers(1, 5)))
        before = trace_distance(rho, sigma)
        after = trace_distance(apply_channel(rho, ch, 1, 2), apply_channel(sigma, ch, 1, 2))
        assert after <= before + 1e-10


class TestBruteForce:
    def test_bell(self):
        assert brute_force_eof(np.outer(BELL, BELL), restarts=4, rng=0) == pytest.approx(1.0, abs=1e-6)

    def test_separable_werner(self):
        assert brute_force_eof(werner(0.2), restarts=8, rng=0) <= 1e-4

    @pytest.mark.parametrize("seed", range(3))
    def test_upper_bound_matches_closed_form(self, seed):
        rho = random_density(np.random.default_rng(seed), 2 + seed)
        closed = entanglement_of_formation(rho)
        brute = brute_force_eof(rho, restarts=8, rng=seed)
        assert closed - 1e-6 <= brute <= closed + 1e-4
