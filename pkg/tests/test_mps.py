import numpy as np
import pytest
from hypothesis import given, strategies as st

from unravel._linalg import I2, X, Z, embed_operator
from unravel.mps import (
    MpsState,
    apply_single_qubit_operator,
    apply_two_qubit_gate,
    entropy_at_cut,
    expectation_mpo,
    from_dense,
    load_mps,
    mpo_to_dense,
    new_product_state,
    product_mpo,
    random_mps,
    sample_bitstring,
    save_mps,
    schmidt_at_cut,
    to_dense,
    truncate,
)
from unravel.oracle import reduced_density

from conftest import BELL, CNOT, HAD, full_gate, random_state, random_unitary


def bell_mps():
    s = new_product_state(2, "00")
    s.apply_single_qubit_operator_(HAD, 0)
    return s.apply_two_qubit_gate_(CNOT, 0)


def check_canonical(state: MpsState, tol=1e-12):
    c = state.ortho_center
    for k, a in enumerate(state.tensors):
        if k < c:
            m = a.transpose(1, 0, 2).reshape(-1, a.shape[2])
            assert np.allclose(m.conj().T @ m, np.eye(a.shape[2]), atol=tol)
        elif k > c:
            m = a.transpose(1, 0, 2).reshape(a.shape[1], -1)
            assert np.allclose(m @ m.conj().T, np.eye(a.shape[1]), atol=tol)


class TestProductStates:
    def test_single_qubit(self):
        assert np.allclose(to_dense(new_product_state(1, "0")), [1, 0])

    def test_index_of_bits(self):
        v = to_dense(new_product_state(2, "10"))
        assert np.allclose(v, np.eye(4)[2])

    def test_zero_entropy_everywhere(self):
        s = new_product_state(8, "00000000")
        assert s.bond_dims == [1] * 7
        assert all(entropy_at_cut(s, k) == 0.0 for k in range(1, 8))

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            new_product_state(0, "")
        with pytest.raises(ValueError):
            new_product_state(3, "01")


class TestGates:
    def test_cnot_flips_target(self):
        s = apply_two_qubit_gate(new_product_state(2, "10"), CNOT, 0)
        assert np.allclose(to_dense(s), np.eye(4)[3])

    def test_bell_entropy(self):
        s = bell_mps()
        assert np.allclose(to_dense(s), BELL)
        assert entropy_at_cut(s, 1) == pytest.approx(1.0, abs=1e-12)

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            apply_two_qubit_gate(new_product_state(2), 2 * np.eye(4), 0)

    def test_site_range(self):
        with pytest.raises(IndexError):
            apply_two_qubit_gate(new_product_state(3), np.eye(4), 2)

    @given(st.integers(2, 8), st.integers(0, 2**32 - 1))
    def test_matches_dense(self, n, seed):
        rng = np.random.default_rng(seed)
        psi = random_state(rng, n)
        s = from_dense(psi)
        site = int(rng.integers(0, n - 1))
        u = random_unitary(rng, 4)
        outer = (s.tensors[site].shape[1], s.tensors[site + 1].shape[2])
        out = apply_two_qubit_gate(s, u, site)
        assert np.allclose(to_dense(out), full_gate(u, site, n) @ psi, atol=1e-10)
        assert out.bond_dims[site] <= 2 * min(outer)

    def test_norm_drift_over_many_gates(self, rng):
        s = new_product_state(6)
        for _ in range(1000):
            s.apply_two_qubit_gate_(random_unitary(rng, 4), int(rng.integers(0, 5)))
        assert abs(s.norm() - 1) < 1e-9
        check_canonical(s, 1e-10)

    def test_bond_dims_bounded(self, rng):
        s = random_mps(8, 64, rng)
        dims = s.bond_dims
        assert all(d <= min(2**k, 2 ** (8 - k)) for k, d in zip(range(1, 8), dims))


class TestSingleQubit:
    def test_identity(self, rng):
        s = random_mps(4, 4, rng)
        out, sq = apply_single_qubit_operator(s, I2, 2)
        assert sq == pytest.approx(1.0)
        assert np.allclose(to_dense(out), to_dense(s))

    def test_scaled_pauli(self, rng):
        s = random_mps(5, 4, rng)
        _, sq = apply_single_qubit_operator(s, np.sqrt(0.05) * Z, 3)
        assert sq == pytest.approx(0.05, abs=1e-12)

    def test_projector_on_bell(self):
        _, sq = apply_single_qubit_operator(bell_mps(), np.diag([1.0, 0.0]), 0)
        assert sq == pytest.approx(0.5)

    @given(st.integers(0, 2**32 - 1))
    def test_born_weight(self, seed):
        rng = np.random.default_rng(seed)
        psi = random_state(rng, 4)
        k = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        site = int(rng.integers(0, 4))
        out, sq = apply_single_qubit_operator(from_dense(psi), k, site)
        full = embed_operator(k, (site,), 4)
        assert sq == pytest.approx(np.linalg.norm(full @ psi) ** 2, rel=1e-10)
        assert np.allclose(to_dense(out), full @ psi)


class TestSchmidt:
    def test_bell(self):
        cut = schmidt_at_cut(bell_mps(), 1)
        assert np.allclose(cut.singular_values, [2**-0.5] * 2)

    def test_product(self):
        assert np.allclose(schmidt_at_cut(new_product_state(5, "01101"), 3).singular_values, [1])

    def test_ghz(self):
        psi = np.zeros(16)
        psi[[0, 15]] = 2**-0.5
        assert entropy_at_cut(from_dense(psi), 2) == pytest.approx(1.0)

    @given(st.integers(2, 8), st.integers(0, 2**32 - 1))
    def test_matches_reduced_density(self, n, seed):
        rng = np.random.default_rng(seed)
        psi = random_state(rng, n)
        s = from_dense(psi)
        k = int(rng.integers(1, n))
        ev = np.sort(np.linalg.eigvalsh(reduced_density(psi, list(range(k)), n)))[::-1]
        sv = schmidt_at_cut(s, k).singular_values
        assert np.allclose(sv, np.sqrt(np.clip(ev[: len(sv)], 0, None)), atol=1e-8)
        assert np.sum(sv**2) == pytest.approx(1.0, abs=1e-10)
        assert np.all(np.diff(sv) <= 1e-15)
        right = np.linalg.eigvalsh(reduced_density(psi, list(range(k, n)), n))
        p = right[right > 1e-14]
        assert entropy_at_cut(s, k) == pytest.approx(float(-np.sum(p * np.log2(p))), abs=1e-10)
        assert 0 <= entropy_at_cut(s, k) <= min(k, n - k) + 1e-12


class TestTruncation:
    def test_noop_when_large_enough(self, rng):
        s = random_mps(6, 8, rng)
        out, rep = truncate(s, 8)
        assert rep.per_bond_discarded == (0.0,) * 5 and rep.two_norm_bound == 0
        assert np.allclose(to_dense(out), to_dense(s))

    def test_bell_to_product(self):
        out, rep = truncate(bell_mps(), 1)
        assert rep.per_bond_discarded[0] == pytest.approx(0.5)
        assert rep.two_norm_bound == pytest.approx(1.0)
        assert out.bond_dims == [1]
        assert out.norm() == pytest.approx(1.0)

    def test_rejects_zero_chi(self):
        with pytest.raises(ValueError):
            truncate(bell_mps(), 0)

    @given(st.integers(3, 8), st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_bound_is_sound(self, n, chi, seed):
        rng = np.random.default_rng(seed)
        psi = random_state(rng, n)
        out, rep = truncate(from_dense(psi), chi)
        assert max(out.bond_dims) <= chi
        assert out.norm() == pytest.approx(1.0, abs=1e-10)
        assert all(e >= 0 for e in rep.per_bond_discarded)
        assert rep.two_norm_bound**2 == pytest.approx(2 * sum(rep.per_bond_discarded), abs=1e-12)
        unnormalized = to_dense(out) * rep.retained_norm
        assert np.linalg.norm(psi - unnormalized) <= rep.two_norm_bound + 1e-10

    def test_selected_bonds_only(self, rng):
        s = random_mps(6, 8, rng)
        out, rep = truncate(s, 2, bonds=(3,))
        dims = out.bond_dims
        assert dims[2] <= 2
        assert rep.per_bond_discarded[0] == 0 and rep.per_bond_discarded[4] == 0


class TestQueries:
    def test_z_and_x_on_zero_state(self):
        s = new_product_state(4)
        assert expectation_mpo(s, product_mpo(4, {0: Z})) == pytest.approx(1)
        assert expectation_mpo(s, product_mpo(4, {0: X})) == pytest.approx(0)

    @given(st.integers(2, 7), st.integers(0, 2**32 - 1))
    def test_zz_matches_dense(self, n, seed):
        rng = np.random.default_rng(seed)
        psi = random_state(rng, n)
        mpo = product_mpo(n, {0: Z, 1: Z})
        val = expectation_mpo(from_dense(psi), mpo)
        assert val == pytest.approx(np.vdot(psi, mpo_to_dense(mpo) @ psi), abs=1e-8)
        assert abs(val.imag) < 1e-10

    def test_mpo_size_mismatch(self):
        with pytest.raises(ValueError):
            expectation_mpo(new_product_state(3), product_mpo(2, {}))

    def test_sampling_basis_state(self, rng):
        s = new_product_state(2, "00")
        assert {sample_bitstring(s, rng) for _ in range(20)} == {"00"}

    def test_sampling_bell(self, rng):
        draws = [sample_bitstring(bell_mps(), rng) for _ in range(4000)]
        assert set(draws) == {"00", "11"}
        assert abs(draws.count("00") / 4000 - 0.5) < 4 * np.sqrt(0.25 / 4000)

    def test_sampling_chi_square(self, rng):
        from scipy.stats import chisquare

        psi = random_state(rng, 5)
        p = np.abs(psi) ** 2
        s = from_dense(psi)
        n_draws = 20000
        counts = np.bincount([int(sample_bitstring(s, rng), 2) for _ in range(n_draws)], minlength=32)
        assert chisquare(counts, p * n_draws).pvalue > 1e-3

    def test_dense_guard(self):
        s = new_product_state(15)
        with pytest.raises(ValueError):
            to_dense(s)

    def test_dense_examples(self):
        assert np.allclose(to_dense(new_product_state(2, "01")), [0, 1, 0, 0])


class TestSerialization:
    def test_roundtrip(self, rng, tmp_path):
        s = random_mps(5, 4, rng)
        save_mps(s, tmp_path / "s.json")
        t = load_mps(tmp_path / "s.json")
        assert np.array_equal(to_dense(t), to_dense(s))
        assert t.ortho_center == s.ortho_center

    def test_from_dense_roundtrip(self, rng):
        psi = random_state(rng, 6)
        assert np.allclose(to_dense(from_dense(psi)), psi)

    def test_move_center_keeps_canonical_form(self, rng):
        s = random_mps(7, 8, rng)
        for c in (0, 6, 3):
            s.move_center_(c)
            check_canonical(s)
