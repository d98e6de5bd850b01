"""Acceptance criteria, one test per criterion, tolerances pinned.

Run with -s to see the per-criterion PASS lines.
"""
import json
import time

import numpy as np
import pytest

from conftest import binom_sigma, frag_circuit, ideal_oracle_diag
from qsearch import analysis, families, qasm, sim, synth
from qsearch.circuit import CircuitBuilder, census, peephole_cancel
from qsearch.cli import ExperimentConfig, run_experiment
from qsearch.families import Partition
from qsearch.sim import NoiseModel
from qsearch.synth import OracleSpec


def _report(line: str) -> None:
    print(line)


def data_dist(circ):
    d = sim.run_exact(circ)
    return d.marginal(circ.metadata.get("data_clbits", list(range(d.n_bits))))


def grover_pt(n: int) -> float:
    N = 2**n
    return (3 - 4 / N) ** 2 / N


def test_criterion_1_closed_form_grover():
    """1-iteration Grover p_t from the dense simulator vs (3-4/N)^2/N."""
    t0 = time.time()
    stated = {2: 1.0, 3: 0.78125, 4: 0.47265625, 5: 0.2583008, 6: 0.1348267}
    for n in range(2, 7):
        mask = "1" * n
        c = families.build_grover(OracleSpec(n, mask, "plain-mcz"), 1)
        p = data_dist(c).probability(int(mask, 2))
        assert abs(p - grover_pt(n)) < 1e-9, n
        assert abs(p - stated[n]) < 5e-7, n  # stated values are rounded prints
    elapsed = time.time() - t0
    assert elapsed < 1.0
    _report(f"PASS criterion 1: closed-form p_t n=2..6 within 1e-9 ({elapsed:.2f}s)")


def test_criterion_2_table_metric_consistency():
    """R ratios recovered from the reference measured p_succ and our p_t."""
    r3 = analysis.r_metric(0.6614, grover_pt(3))
    assert abs(r3 - 0.85) <= 0.01
    r2 = analysis.r_metric(0.9518, grover_pt(2))
    assert abs(r2 - 0.95) <= 0.01
    _report(f"PASS criterion 2: R(3q)={r3:.4f}~0.85, R(2q)={r2:.4f}~0.95")


def test_criterion_3_partial_diffuser_theory():
    t0 = time.time()
    c43 = families.build_partial(OracleSpec(4, "1111", "plain-mcz"), 3)
    p43 = data_dist(c43).probability(0b1111)
    assert abs(p43 - 0.390625) < 1e-9
    r4 = 0.245 / p43
    assert abs(r4 - 0.63) <= 0.01
    c63 = families.build_partial(OracleSpec(6, "111111", "plain-mcz"), 3)
    p63 = data_dist(c63).probability(0b111111)
    assert abs(p63 - 0.09765625) < 1e-9
    r6 = 0.06 / p63
    assert 0.55 <= r6 <= 0.70
    assert 0.06 > 2 / 64  # beats the query-plus-guess classical bound
    assert 0.06 > 1 / 64
    elapsed = time.time() - t0
    assert elapsed < 1.0
    _report(
        f"PASS criterion 3: p_t(4,3)={p43}, p_t(6,3)={p63}, "
        f"R4={r4:.4f}, R6={r6:.4f} ({elapsed:.2f}s)"
    )


def test_criterion_4_classical_comparison():
    e4 = analysis.expected_quantum_calls(0.66, 1)
    assert e4 < 17 / 2
    e5 = analysis.expected_quantum_calls(0.26, 1)
    assert e5 < 33 / 2
    _report(f"PASS criterion 4: E[calls] 4q {e4:.3f}<8.5, 5q {e5:.3f}<16.5")


def test_criterion_5_synthesis_equivalence_suite():
    t0 = time.time()
    worst_unitary = 0.0
    worst_tv = 0.0
    for n in range(2, 7):
        n_anc = synth.oracle_ancillas_needed(n, "ancilla-relphase")
        ancillas = tuple(range(n, n + n_anc))
        clbits = tuple(range(n_anc))
        for v in range(1 << n):
            mask = format(v, f"0{n}b")
            ideal = ideal_oracle_diag(n, mask)
            # plain style: direct unitary
            u = sim.unitary_of(
                frag_circuit(synth.oracle(OracleSpec(n, mask, "plain-mcz")), n)
            )
            worst_unitary = max(worst_unitary, sim.phase_aligned_distance(u, ideal))
            # ancilla styles: block-restricted unitary plus leakage
            for style in ("ancilla-relphase", "ancilla-relphase-partial-uncompute"):
                frag = synth.oracle(OracleSpec(n, mask, style), ancillas=ancillas)
                u = sim.unitary_of(frag_circuit(frag, n + n_anc))
                block, leak = sim.ancilla_block(u, n, n_anc)
                worst_unitary = max(
                    worst_unitary, leak, sim.phase_aligned_distance(block, ideal)
                )
            # measurement-assisted: distributional against the plain oracle
            b = CircuitBuilder(n + n_anc, n + n_anc)
            for q in range(n):
                b.h(q)
            b.extend(
                synth.oracle(
                    OracleSpec(n, mask, "measurement-assisted"),
                    ancillas=ancillas,
                    clbits=tuple(n + j for j in range(n_anc)),
                )
            )
            for q in range(n):
                b.h(q)
            for q in range(n):
                b.measure(q, q)
            d_meas = sim.run_exact(b.build()).marginal(list(range(n)))
            b2 = CircuitBuilder(n, n)
            for q in range(n):
                b2.h(q)
            b2.extend(synth.oracle(OracleSpec(n, mask, "plain-mcz")))
            for q in range(n):
                b2.h(q)
            for q in range(n):
                b2.measure(q, q)
            d_plain = sim.run_exact(b2.build())
            worst_tv = max(worst_tv, d_meas.tv_distance(d_plain))
    assert worst_unitary < 1e-10
    assert worst_tv < 1e-10

    # relative-phase compute/uncompute pairs net exact for every method/k
    ideal_mcz = {k: np.diag([1.0] * ((1 << k) - 1) + [-1.0]).astype(complex) for k in range(3, 7)}
    cases = [
        ("relphase-maslov", 3, 1), ("relphase-maslov", 4, 1), ("relphase-maslov", 5, 1),
        ("relphase-maslov", 6, 2), ("margolus", 3, 1), ("margolus", 4, 2),
        ("margolus", 5, 2), ("margolus", 6, 3),
        ("exact-one-ancilla", 4, 1), ("exact-one-ancilla", 5, 1), ("exact-one-ancilla", 6, 1),
    ]
    for method, k, n_anc in cases:
        frag = synth.mcz_fragment(
            tuple(range(k)), method=method, ancillas=tuple(range(k, k + n_anc))
        )
        u = sim.unitary_of(frag_circuit(frag, k + n_anc))
        block, leak = sim.ancilla_block(u, k, n_anc)
        assert leak < 1e-10, (method, k)
        assert sim.phase_aligned_distance(block, ideal_mcz[k]) < 1e-10, (method, k)

    elapsed = time.time() - t0
    assert elapsed < 120.0
    _report(
        f"PASS criterion 5: oracle equivalence all n<=6/styles/masks "
        f"(worst unitary {worst_unitary:.2e}, worst TV {worst_tv:.2e}, {elapsed:.1f}s)"
    )


def test_criterion_6_deferred_measurement_p43():
    worst = 0.0
    for v in range(16):
        mask = format(v, "04b")
        c = families.build_wielomianer_p43(OracleSpec(4, mask, "plain-mcz"))
        branching = sim.run_exact(c).marginal([0, 1, 2, 3])
        deferred = sim.run_deferred(c).marginal([0, 1, 2, 3])
        worst = max(worst, branching.tv_distance(deferred))
    assert worst < 1e-10
    _report(f"PASS criterion 6: P43 deferred-measurement TV over 16 oracles {worst:.2e}")


def _equivariance_families(n):
    out = [
        (f"grover{n}", lambda m: families.build_grover(
            OracleSpec(n, m, "ancilla-relphase" if n >= 4 else "plain-mcz"), 1)),
    ]
    if n >= 3:
        out.append((f"partial{n}", lambda m: families.build_partial(
            OracleSpec(n, m, "ancilla-relphase" if n >= 4 else "plain-mcz"), min(3, n - 1))))
    if n >= 3:
        part = Partition((n - 2, 2)) if n >= 4 else Partition((2, 1))
        out.append((f"wojter{n}", lambda m, p=part: families.build_wojter(
            OracleSpec(n, m, "ancilla-relphase"), p)))
        out.append((f"drzewker{n}", lambda m, p=part: families.build_drzewker(
            OracleSpec(n, m, "ancilla-relphase"), p)))
    if n == 5:
        out.append(("wojter-aa5", lambda m: families.build_wojter_aa(
            OracleSpec(5, m, "ancilla-relphase"), Partition((3, 2)))))
        out.append(("pdrzewker5", lambda m: families.build_partial_drzewker(
            OracleSpec(5, m, "ancilla-relphase"), Partition((3, 2)))))
    if n == 4:
        out.append(("wielomianer4", lambda m: families.build_wielomianer_p43(
            OracleSpec(4, m, "plain-mcz"))))
    return out


def test_criterion_7_oracle_equivariance():
    t0 = time.time()
    worst = 0.0
    for n in range(2, 6):  # exhaustive masks
        for name, builder in _equivariance_families(n):
            ref = None
            for v in range(1 << n):
                mask = format(v, f"0{n}b")
                p = data_dist(builder(mask)).as_probabilities()
                relabeled = p[np.arange(p.size) ^ v]
                if ref is None:
                    ref = relabeled
                else:
                    worst = max(worst, float(np.abs(relabeled - ref).max()))
    rng = np.random.default_rng(2024)
    sampled = sorted(int(v) for v in rng.choice(64, size=8, replace=False))
    for name, builder in _equivariance_families(6):
        ref = None
        for v in sampled:
            mask = format(v, "06b")
            p = data_dist(builder(mask)).as_probabilities()
            relabeled = p[np.arange(p.size) ^ v]
            if ref is None:
                ref = relabeled
            else:
                worst = max(worst, float(np.abs(relabeled - ref).max()))
    assert worst < 1e-10
    elapsed = time.time() - t0
    _report(f"PASS criterion 7: relabel equivariance worst deviation {worst:.2e} ({elapsed:.1f}s)")


def test_criterion_8_gate_count_targets():
    def count2(circ):
        return census(peephole_cancel(synth.lower(circ))).two_qubit_count

    grover5 = families.build_grover(OracleSpec(5, "10110", "ancilla-relphase"), 1)
    n_grover = count2(grover5)
    assert n_grover <= 1.15 * 36

    drz = families.build_drzewker(
        OracleSpec(5, "10110", "ancilla-relphase"), Partition((3, 2)), uncompute="partial"
    )
    n_drz = count2(drz)
    assert n_drz <= 1.15 * 44

    woj_faithful = families.build_wojter(
        OracleSpec(5, "10110", "ancilla-relphase"), Partition((3, 2)), uncompute="partial"
    )
    woj_fused = families.build_wojter(
        OracleSpec(5, "10110", "ancilla-relphase"), Partition((3, 2)), fused=True
    )
    n_w_faithful, n_w_fused = count2(woj_faithful), count2(woj_fused)
    assert n_w_fused <= 1.15 * 31
    # the fused decomposition is distribution-identical to the layout build
    assert data_dist(woj_faithful).tv_distance(data_dist(woj_fused)) < 1e-10
    _report(
        "PASS criterion 8: 2q counts grover5="
        f"{n_grover} (target 36), drzewker={n_drz} (target 44), "
        f"wojter fused={n_w_fused} (target 31; layout-faithful build {n_w_faithful}, "
        "sub-iteration fusion documented)"
    )


def test_criterion_9_noise_model_properties():
    t0 = time.time()
    mask = "101"
    c = synth.lower(families.build_grover(OracleSpec(3, mask, "plain-mcz"), 1))
    p_t = grover_pt(3)

    shots0 = 100_000
    d0 = sim.run_noisy(c, NoiseModel(), shots0, seed=101).marginal([0, 1, 2])
    p0 = d0.probability(int(mask, 2))
    assert abs(p0 - p_t) < 4 * binom_sigma(p_t, shots0)

    grid = [0.0, 0.005, 0.01, 0.02, 0.05]
    shots = 50_000
    estimates = []
    for i, p2 in enumerate(grid):
        d = sim.run_noisy(c, NoiseModel(p2=p2), shots, seed=200 + i).marginal([0, 1, 2])
        estimates.append(d.probability(int(mask, 2)))
    for a, b in zip(estimates, estimates[1:]):
        slack = 3 * (binom_sigma(a, shots) + binom_sigma(b, shots))
        assert b <= a + slack

    d_full = sim.run_noisy(c, NoiseModel(p2=1.0), shots, seed=300).marginal([0, 1, 2])
    p_full = d_full.probability(int(mask, 2))
    assert abs(p_full - 1 / 8) < 3 * binom_sigma(1 / 8, shots)

    elapsed = time.time() - t0
    assert elapsed < 300.0
    _report(
        f"PASS criterion 9: noise p2=0 -> {p0:.4f}~{p_t:.4f}, grid "
        f"{[round(e, 4) for e in estimates]} non-increasing, p2=1 -> {p_full:.4f}~0.125 "
        f"({elapsed:.1f}s)"
    )


def test_criterion_10_determinism_and_round_trip(tmp_path):
    cfg = ExperimentConfig(
        family="drzewker", n=5, partition=[3, 2], oracle_style="ancilla-relphase",
        oracle_set="sample:4:7", shots=4000, seed=77,
        noise={"p1": 0.001, "p2": 0.01, "p_meas": 0.002},
    )
    r1 = run_experiment(cfg)
    r2 = run_experiment(cfg)
    s1 = json.dumps({k: v for k, v in r1.items() if k != "timing_seconds"}, sort_keys=True)
    s2 = json.dumps({k: v for k, v in r2.items() if k != "timing_seconds"}, sort_keys=True)
    assert s1 == s2

    circ = families.build_drzewker(
        OracleSpec(5, "01011", "ancilla-relphase"), Partition((3, 2))
    )
    assert qasm.parse(qasm.serialize(circ)) == circ

    path = tmp_path / "report.json"
    path.write_text(json.dumps(r1, indent=2, sort_keys=True))
    assert json.loads(path.read_text())["metrics"]["p_succ"] == r1["metrics"]["p_succ"]
    _report("PASS criterion 10: fixed-seed byte stability and artifact round-trips")
