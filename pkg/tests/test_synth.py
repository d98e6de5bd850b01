"""Synthesis: diffusers, oracles, multi-controlled Z, relative-phase gates."""
import numpy as np
import pytest

from conftest import frag_circuit, frag_unitary, ideal_diffuser, ideal_oracle_diag
from qsearch import sim, synth
from qsearch.circuit import CircuitBuilder, census, cz, h, z
from qsearch.errors import BadArity, BadMask, MethodArityMismatch, MissingAncilla
from qsearch.synth import OracleSpec


def mcz_diag(k: int) -> np.ndarray:
    d = np.ones(1 << k, dtype=complex)
    d[-1] = -1.0
    return np.diag(d)


class TestDiffuser:
    def test_k1_is_pauli_x(self):
        u = frag_unitary(synth.diffuser(1, (0,)), 1)
        xmat = np.array([[0, 1], [1, 0]], dtype=complex)
        assert sim.phase_aligned_distance(u, xmat) < 1e-10

    def test_k2_matrix_entries(self):
        u = frag_unitary(synth.diffuser(2, (0, 1)), 2)
        assert sim.phase_aligned_distance(u, ideal_diffuser(2)) < 1e-10
        aligned = u * np.sign((u * ideal_diffuser(2).conj()).sum()).conj()
        assert np.allclose(np.abs(u), 0.5)

    def test_k3_uniform_fixed_point(self):
        u = frag_unitary(synth.diffuser(3, (0, 1, 2)), 3)
        s = np.full(8, 1 / np.sqrt(8), dtype=complex)
        out = u @ s
        assert abs(abs(np.vdot(s, out)) - 1.0) < 1e-12

    def test_bad_arity(self):
        with pytest.raises(BadArity):
            synth.diffuser(2, (0,))


class TestOracle:
    def test_plain_all_ones(self):
        spec = OracleSpec(3, "111", "plain-mcz")
        u = frag_unitary(synth.oracle(spec), 3)
        assert sim.phase_aligned_distance(u, ideal_oracle_diag(3, "111")) < 1e-10

    def test_mask_is_x_conjugation(self):
        u_masked = frag_unitary(synth.oracle(OracleSpec(3, "101", "plain-mcz")), 3)
        base = synth.oracle(OracleSpec(3, "111", "plain-mcz"))
        from qsearch.circuit import x as xg

        conj = frag_unitary([xg(1)] + base + [xg(1)], 3)
        assert sim.phase_aligned_distance(u_masked, conj) < 1e-10

    def test_relphase_style_matches_plain(self):
        spec = OracleSpec(5, "10110", "ancilla-relphase")
        frag = synth.oracle(spec, ancillas=(5,))
        u = frag_unitary(frag, 6)
        block, leak = sim.ancilla_block(u, 5, 1)
        assert leak < 1e-10
        assert sim.phase_aligned_distance(block, ideal_oracle_diag(5, "10110")) < 1e-10

    def test_bad_mask(self):
        with pytest.raises(BadMask):
            OracleSpec(3, "10", "plain-mcz")
        with pytest.raises(BadMask):
            OracleSpec(3, "10x", "plain-mcz")


class TestMcz:
    def test_k2_every_method_is_cz(self):
        target = np.diag([1, 1, 1, -1]).astype(complex)
        for method in synth.METHODS:
            frag = synth.mcz_fragment((0, 1), method=method, ancillas=(2,), clbits=(0,))
            u = frag_unitary(frag, 2)
            assert sim.phase_aligned_distance(u, target) < 1e-10, method

    def test_k3_exact_count_and_matrix(self):
        frag = synth.mcz_fragment((0, 1, 2), method="exact-recursive")
        assert census(frag_circuit(frag, 3)).two_qubit_count == 6
        u = frag_unitary(frag, 3)
        assert sim.phase_aligned_distance(u, mcz_diag(3)) < 1e-10

    def test_k6_fold_tree_two_ancillas(self):
        frag = synth.mcz_fragment(tuple(range(6)), method="relphase-maslov", ancillas=(6, 7))
        u = frag_unitary(frag, 8)
        block, leak = sim.ancilla_block(u, 6, 2)
        assert leak < 1e-10
        assert sim.phase_aligned_distance(block, mcz_diag(6)) < 1e-10

    def test_exact_recursive_k4_k5(self):
        for k in (4, 5):
            u = frag_unitary(synth.mcz_fragment(tuple(range(k))), k)
            assert sim.phase_aligned_distance(u, mcz_diag(k)) < 1e-10

    def test_exact_one_ancilla(self):
        frag = synth.mcz_fragment(tuple(range(5)), method="exact-one-ancilla", ancillas=(5,))
        u = frag_unitary(frag, 6)
        block, leak = sim.ancilla_block(u, 5, 1)
        assert leak < 1e-10
        assert sim.phase_aligned_distance(block, mcz_diag(5)) < 1e-10

    def test_missing_ancilla(self):
        with pytest.raises(MissingAncilla):
            synth.mcz_fragment(tuple(range(5)), method="relphase-maslov", ancillas=())

    def test_unknown_method(self):
        with pytest.raises(MethodArityMismatch):
            synth.mcz_fragment((0, 1, 2), method="telepathy")

    def test_polarity_selects_state(self):
        frag = synth.mcz_fragment((0, 1, 2), method="exact-recursive", polarity=(1, 0, 1))
        u = frag_unitary(frag, 3)
        assert sim.phase_aligned_distance(u, ideal_oracle_diag(3, "101")) < 1e-10


class TestRelphase:
    def test_forward_inverse_identity(self):
        frag = synth.relphase_ccx(0, 1, 2) + synth.relphase_ccx(0, 1, 2, inverse=True)
        u = frag_unitary(frag, 3)
        assert sim.phase_aligned_distance(u, np.eye(8, dtype=complex)) < 1e-10
        frag4 = synth.relphase_cccx(0, 1, 2, 3) + synth.relphase_cccx(0, 1, 2, 3, inverse=True)
        u4 = frag_unitary(frag4, 4)
        assert sim.phase_aligned_distance(u4, np.eye(16, dtype=complex)) < 1e-10

    def test_permutation_action(self):
        u = frag_unitary(synth.relphase_ccx(0, 1, 2), 3)
        col = u[:, 0b110]
        assert abs(abs(col[0b111]) - 1.0) < 1e-12  # |110> -> |111> up to phase
        col = u[:, 0b100]
        assert abs(abs(col[0b100]) - 1.0) < 1e-12  # |100> -> |100> up to phase

    def test_moduli_match_toffoli(self):
        ccx = np.eye(8, dtype=complex)
        ccx[[6, 7]] = ccx[[7, 6]]
        for frag in (synth.relphase_ccx(0, 1, 2), synth.margolus_ccx(0, 1, 2)):
            u = frag_unitary(frag, 3)
            assert np.allclose(np.abs(u), np.abs(ccx), atol=1e-12)
        cccx = np.eye(16, dtype=complex)
        cccx[[14, 15]] = cccx[[15, 14]]
        u = frag_unitary(synth.relphase_cccx(0, 1, 2, 3), 4)
        assert np.allclose(np.abs(u), np.abs(cccx), atol=1e-12)

    def test_count_bounds(self):
        assert census(frag_circuit(synth.relphase_ccx(0, 1, 2), 3)).two_qubit_count <= 3
        assert census(frag_circuit(synth.relphase_cccx(0, 1, 2, 3), 4)).two_qubit_count <= 6
        assert census(frag_circuit(synth.exact_ccz(0, 1, 2), 3)).two_qubit_count <= 6

    def test_sandwich_equals_exact_mcz(self):
        # the compute / diagonal payload / uncompute usage pattern
        frag = (
            synth.relphase_ccx(0, 1, 3)
            + list(frag_circuit([cz(3, 2)], 4).instructions)
            + synth.relphase_ccx(0, 1, 3, inverse=True)
        )
        u = frag_unitary(frag, 4)
        block, leak = sim.ancilla_block(u, 3, 1)  # ancilla is the trailing wire
        exact = frag_unitary(synth.mcz_fragment((0, 1, 2), method="exact-recursive"), 3)
        assert leak < 1e-10
        assert sim.phase_aligned_distance(block, exact) < 1e-10

    def test_pair_cancellation_every_method(self):
        """Every compute/uncompute sandwich nets an exact mcz, k <= 6."""
        cases = [
            ("relphase-maslov", 3, 1),
            ("relphase-maslov", 4, 1),
            ("relphase-maslov", 5, 1),
            ("relphase-maslov", 6, 2),
            ("margolus", 3, 1),
            ("margolus", 4, 2),
            ("exact-one-ancilla", 4, 1),
            ("exact-one-ancilla", 5, 1),
            ("exact-one-ancilla", 6, 1),
        ]
        for method, k, n_anc in cases:
            ancillas = tuple(range(k, k + n_anc))
            frag = synth.mcz_fragment(tuple(range(k)), method=method, ancillas=ancillas)
            u = frag_unitary(frag, k + n_anc)
            block, leak = sim.ancilla_block(u, k, n_anc)
            assert leak < 1e-10, (method, k)
            assert sim.phase_aligned_distance(block, mcz_diag(k)) < 1e-10, (method, k)

    def test_determinism(self):
        a = synth.mcz_fragment(tuple(range(5)), method="relphase-maslov", ancillas=(5,))
        b = synth.mcz_fragment(tuple(range(5)), method="relphase-maslov", ancillas=(5,))
        assert a == b


class TestAndCompute:
    def test_phase_clean(self):
        for n_ctl in (2, 3):
            n = n_ctl + 1
            u = frag_unitary(synth.and_compute(tuple(range(n_ctl)), n_ctl), n)
            for v in range(1 << n_ctl):
                idx_in = v << 1
                col = u[:, idx_in]
                j = int(np.argmax(np.abs(col)))
                and_bit = 1 if v == (1 << n_ctl) - 1 else 0
                assert j == (v << 1) | and_bit
                assert abs(col[j] - 1.0) < 1e-12  # zero phase


class TestMeasurementAssisted:
    def _run(self, frag, n, ncl, data):
        b = CircuitBuilder(n, ncl)
        for q in data:
            b.h(q)
        b.extend(frag)
        for q in data:
            b.h(q)
        for i, q in enumerate(data):
            b.measure(q, i)
        return sim.run_exact(b.build()).marginal(list(range(len(data))))

    def test_two_controls_payload_z(self):
        # compute AND, apply Z on the ancilla, then compare the two uncomputes
        data = (0, 1)
        unitary_version = (
            synth.and_compute(data, 2)
            + [i for i in frag_circuit([z(2)], 3).instructions]
            + synth._adjoint(synth.and_compute(data, 2))
        )
        measured_version = (
            synth.and_compute(data, 2)
            + [i for i in frag_circuit([z(2)], 3).instructions]
            + synth.measurement_assisted_uncompute(2, data, 2)
        )
        d1 = self._run(unitary_version, 3, 2, data)
        d2 = self._run(measured_version, 3, 3, data)
        assert d1.tv_distance(d2) < 1e-10

    def test_controls_zero_correction_inert(self):
        """With controls |00> the ancilla stays |0>; the X-basis measurement
        is uniform and the conditional correction acts as identity, so the
        data distribution is untouched."""
        b = CircuitBuilder(3, 3)
        b.extend(synth.and_compute((0, 1), 2))
        b.extend(synth.measurement_assisted_uncompute(2, (0, 1), 2))
        b.measure(0, 0)
        b.measure(1, 1)
        d = sim.run_exact(b.build())
        marg = d.marginal([0, 1])
        assert abs(marg.probability(0) - 1.0) < 1e-12  # data stays |00>
        outcome = d.marginal([2])
        assert abs(outcome.probability(0) - 0.5) < 1e-12  # H|0> measured: uniform

    def test_grover_variant_matches_unitary(self):
        from qsearch import families

        cm = families.build_grover(OracleSpec(5, "01011", "measurement-assisted"), 1)
        cu = families.build_grover(OracleSpec(5, "01011", "ancilla-relphase"), 1)
        dm = sim.run_exact(cm).marginal(list(range(5)))
        du = sim.run_exact(cu).marginal(list(range(5)))
        assert dm.tv_distance(du) < 1e-10
        assert abs(dm.probability(0b01011) - (3 - 4 / 32) ** 2 / 32) < 1e-10
