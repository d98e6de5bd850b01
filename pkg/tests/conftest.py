"""Shared helpers and hypothesis strategies."""
from math import pi

import numpy as np
from hypothesis import strategies as st

from qsearch import sim
from qsearch.circuit import (
    Circuit,
    CircuitBuilder,
    cx,
    cz,
    h,
    rccx,
    rz,
    x,
    z,
)


def frag_circuit(frag, n_qubits, n_clbits=0) -> Circuit:
    b = CircuitBuilder(n_qubits, n_clbits)
    b.extend(frag)
    return b.build()


def frag_unitary(frag, n_qubits) -> np.ndarray:
    return sim.unitary_of(frag_circuit(frag, n_qubits))


def ideal_oracle_diag(n: int, mask: str) -> np.ndarray:
    """Independent construction of the ideal oracle matrix."""
    d = np.ones(1 << n, dtype=complex)
    d[int(mask, 2)] = -1.0
    return np.diag(d)


def ideal_diffuser(k: int) -> np.ndarray:
    """2|s><s| - I built directly from the formula."""
    dim = 1 << k
    s = np.full((dim, 1), 1 / np.sqrt(dim), dtype=complex)
    return 2 * (s @ s.conj().T) - np.eye(dim)


@st.composite
def unitary_gates(draw, n):
    """One random measurement-free gate on n wires."""
    choices = ["h", "x", "z", "rz"]
    if n >= 2:
        choices += ["cx", "cz"]
    if n >= 3:
        choices += ["rccx", "mcz3"]
    kind = draw(st.sampled_from(choices))
    arity = {"h": 1, "x": 1, "z": 1, "rz": 1, "cx": 2, "cz": 2, "rccx": 3, "mcz3": 3}[kind]
    qs = draw(st.permutations(range(n))).copy()[:arity]
    if kind in ("h", "x", "z"):
        return {"h": h, "x": x, "z": z}[kind](qs[0])
    if kind == "rz":
        return rz(draw(st.sampled_from([pi / 4, -pi / 4, pi / 2, -pi / 2])), qs[0])
    if kind == "cx":
        return cx(*qs, polarity=(draw(st.integers(0, 1)),))
    if kind == "cz":
        return cz(*qs)
    if kind == "rccx":
        return rccx(*qs, inverse=draw(st.booleans()))
    return cz(*qs, polarity=tuple(draw(st.integers(0, 1)) for _ in qs))


@st.composite
def unitary_circuits(draw, max_qubits=5, max_depth=18):
    n = draw(st.integers(1, max_qubits))
    depth = draw(st.integers(0, max_depth))
    b = CircuitBuilder(n, 0)
    for _ in range(depth):
        b.add(draw(unitary_gates(n)))
    return b.build()


@st.composite
def measured_circuits(draw, max_qubits=4, max_depth=14):
    """Circuits that may contain measurements and valid conditions."""
    n = draw(st.integers(1, max_qubits))
    b = CircuitBuilder(n, n)
    written: list[int] = []
    free_bits = list(range(n))
    for _ in range(draw(st.integers(0, max_depth))):
        if free_bits and draw(st.integers(0, 4)) == 0:
            q = draw(st.integers(0, n - 1))
            c = free_bits.pop(0)
            b.measure(q, c)
            written.append(c)
            continue
        gate = draw(unitary_gates(n))
        cond = None
        if written and draw(st.integers(0, 3)) == 0:
            cond = (draw(st.sampled_from(written)), draw(st.integers(0, 1)))
        b.add(gate, cond)
    return b.build()


def binom_sigma(p: float, shots: int) -> float:
    return float(np.sqrt(max(p * (1 - p), 1e-12) / shots))
