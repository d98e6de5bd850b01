"""Gate synthesis: diffusers, phase oracles, multi-controlled Z lowering.

Conventions
-----------
rz(theta) is the phase gate diag(1, e^{i theta}); all equivalence contracts
are modulo global phase.  A "fold" computes the AND of up to three live
control wires into a fresh ancilla with a relative-phase gate; because the
payload between a fold and its mirror image is diagonal, the relative
phases cancel exactly and the sandwich implements the multi-controlled Z
with no error.  The diffuser on k qubits is realized as
H^k . C^{k-1}Z(polarity 0...0) . H^k which equals -(2|s><s| - I).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

from .circuit import (
    Circuit,
    CircuitBuilder,
    Gate,
    Instruction,
    cx,
    cz,
    h,
    measure,
    rccx,
    rcccx,
    rz,
    x,
    z,
)
from .errors import (
    BadArity,
    BadMask,
    MethodArityMismatch,
    MissingAncilla,
    ValidationError,
)

METHODS = (
    "exact-recursive",
    "exact-one-ancilla",
    "margolus",
    "relphase-maslov",
    "measurement-assisted",
)

ORACLE_STYLES = (
    "plain-mcz",
    "ancilla-relphase",
    "ancilla-relphase-partial-uncompute",
    "measurement-assisted",
)


@dataclass(frozen=True)
class OracleSpec:
    """Marked bit pattern of width n plus the synthesis style."""

    n: int
    mask: str
    style: str = "plain-mcz"

    def __post_init__(self):
        if len(self.mask) != self.n or any(ch not in "01" for ch in self.mask):
            raise BadMask(f"mask {self.mask!r} is not an {self.n}-bit pattern")
        if self.style not in ORACLE_STYLES:
            raise BadMask(f"unknown oracle style {self.style!r}")

    @property
    def index(self) -> int:
        return int(self.mask, 2)


def _instr(gates) -> list[Instruction]:
    return [g if isinstance(g, Instruction) else Instruction(g) for g in gates]


def _adjoint(gates: list[Instruction]) -> list[Instruction]:
    out = []
    for instr in reversed(gates):
        g = instr.gate
        if g.name == "rz":
            g = rz(-g.angle, g.qubits[0])
        elif g.name in ("rccx", "rcccx"):
            g = Gate(g.name, g.qubits, inverse=not g.inverse)
        # h, x, z, cx, cz are self-inverse
        out.append(Instruction(g, instr.condition))
    return out


def relphase_ccx(a: int, b: int, c: int, inverse: bool = False) -> list[Instruction]:
    """3-CX relative-phase Toffoli (Margolus class) on controls a, b."""
    t, tdg = rz(pi / 4, c), rz(-pi / 4, c)
    frag = _instr([h(c), t, cx(b, c), tdg, cx(a, c), t, cx(b, c), tdg, h(c)])
    return _adjoint(frag) if inverse else frag


def relphase_cccx(a: int, b: int, c: int, d: int, inverse: bool = False) -> list[Instruction]:
    """6-CX relative-phase triple-controlled X on controls a, b, c."""
    t, tdg = rz(pi / 4, d), rz(-pi / 4, d)
    frag = _instr(
        [
            h(d), t, cx(c, d), tdg, h(d),
            cx(a, d), t, cx(b, d), tdg, cx(a, d), t, cx(b, d), tdg,
            h(d), t, cx(c, d), tdg, h(d),
        ]
    )
    return _adjoint(frag) if inverse else frag


def _ry(theta: float, q: int) -> list[Gate]:
    # Ry(theta) = P(pi/2) H P(theta) H P(-pi/2) up to e^{-i theta/2}
    return [rz(-pi / 2, q), h(q), rz(theta, q), h(q), rz(pi / 2, q)]


def margolus_ccx(a: int, b: int, c: int, inverse: bool = False) -> list[Instruction]:
    """The Ry-based Margolus gate, a 3-CX relative-phase Toffoli."""
    frag = _instr(
        _ry(pi / 4, c)
        + [cx(b, c)]
        + _ry(pi / 4, c)
        + [cx(a, c)]
        + _ry(-pi / 4, c)
        + [cx(b, c)]
        + _ry(-pi / 4, c)
    )
    return _adjoint(frag) if inverse else frag


def exact_ccz(a: int, b: int, c: int) -> list[Instruction]:
    """Standard 6-CX network for the exact doubly-controlled Z."""
    t = pi / 4
    return _instr(
        [
            cx(b, c), rz(-t, c), cx(a, c), rz(t, c), cx(b, c), rz(-t, c), cx(a, c),
            rz(t, b), rz(t, c), cx(a, b), rz(t, a), rz(-t, b), cx(a, b),
        ]
    )


def exact_ccx(a: int, b: int, c: int) -> list[Instruction]:
    return _instr([h(c)]) + exact_ccz(a, b, c) + _instr([h(c)])


def mcp(theta: float, controls: tuple[int, ...], target: int) -> list[Instruction]:
    """Multi-controlled phase gate by the ancilla-free recursion."""
    controls = tuple(controls)
    if not controls:
        return _instr([rz(theta, target)])
    if len(controls) == 1:
        c = controls[0]
        return _instr(
            [rz(theta / 2, c), cx(c, target), rz(-theta / 2, target), cx(c, target), rz(theta / 2, target)]
        )
    rest, last = controls[:-1], controls[-1]
    out = mcp(theta / 2, (last,), target)
    out += _mcx_exact(rest, last)
    out += mcp(-theta / 2, (last,), target)
    out += _mcx_exact(rest, last)
    out += mcp(theta / 2, rest, target)
    return out


def _mcx_exact(controls: tuple[int, ...], target: int) -> list[Instruction]:
    if len(controls) == 1:
        return _instr([cx(controls[0], target)])
    if len(controls) == 2:
        return exact_ccx(controls[0], controls[1], target)
    return _instr([h(target)]) + mcz_recursive(tuple(controls) + (target,)) + _instr([h(target)])


def mcz_recursive(qubits: tuple[int, ...]) -> list[Instruction]:
    """Exact C^{k-1}Z lowering with no ancilla."""
    qubits = tuple(qubits)
    if len(qubits) == 1:
        return _instr([z(qubits[0])])
    if len(qubits) == 2:
        return _instr([cz(*qubits)])
    if len(qubits) == 3:
        return exact_ccz(*qubits)
    return mcp(pi, qubits[:-1], qubits[-1])


# phase-clean AND computes (for measurement-assisted uncomputation) ---------

# On ancilla-|0> inputs relphase_ccx leaves phase i exactly on the AND=1
# branch; relphase_cccx leaves i^(ab) * i^(abc) (verified numerically).

def and_compute(controls: tuple[int, ...], target: int) -> list[Instruction]:
    """Map |x, 0> -> |x, AND(x)> with zero relative phase (2 or 3 controls)."""
    controls = tuple(controls)
    if len(controls) == 2:
        return relphase_ccx(controls[0], controls[1], target) + _instr(
            [rz(-pi / 2, target)]
        )
    if len(controls) == 3:
        a, b, _ = controls
        return (
            relphase_cccx(*controls, target)
            + _instr([rz(-pi / 2, target)])
            + mcp(-pi / 2, (a,), b)
        )
    raise BadArity("phase-clean AND supports 2 or 3 controls")


def measurement_assisted_uncompute(
    ancilla: int,
    controls: tuple[int, ...],
    clbit: int,
    polarity: tuple[int, ...] | None = None,
) -> list[Instruction]:
    """X-basis measurement of a computed AND ancilla plus phase correction.

    Replaces the unitary uncompute: H on the ancilla, measure, and when the
    outcome is 1 apply C^{k-1}Z on the controls (with the compute's
    polarity) to cancel the kicked-back phase.
    """
    controls = tuple(controls)
    if len(controls) >= 2:
        correction = cz(*controls, polarity=polarity)
        fix = [Instruction(correction, condition=(clbit, 1))]
    else:
        q = controls[0]
        if polarity is not None and polarity[0] == 0:
            fix = [
                Instruction(x(q), condition=(clbit, 1)),
                Instruction(z(q), condition=(clbit, 1)),
                Instruction(x(q), condition=(clbit, 1)),
            ]
        else:
            fix = [Instruction(z(q), condition=(clbit, 1))]
    return _instr([h(ancilla), measure(ancilla, clbit)]) + fix


# multi-controlled Z synthesis ----------------------------------------------

def mcz_plan(n_controls: int, n_ancillas: int, pair_only: bool = False) -> list[int]:
    """Fold sizes reducing the live controls to at most two."""
    live = n_controls
    folds: list[int] = []
    used = 0
    while live > 2:
        if used >= n_ancillas:
            raise MissingAncilla(
                f"{n_controls} controls need more than {n_ancillas} ancillas"
            )
        take = 2 if pair_only else min(3, live)
        folds.append(take)
        live -= take - 1
        used += 1
    if live == 2 and n_controls == 2 and used < n_ancillas:
        folds.append(2)  # exhibit the two-control sandwich when asked for
    return folds


def _fold_gate(kind: str, controls: tuple[int, ...], target: int, inverse: bool) -> list[Instruction]:
    if kind == "margolus":
        if len(controls) != 2:
            raise MethodArityMismatch("margolus folds exactly two controls")
        return margolus_ccx(controls[0], controls[1], target, inverse=inverse)
    if len(controls) == 2:
        return relphase_ccx(controls[0], controls[1], target, inverse=inverse)
    if len(controls) == 3:
        return relphase_cccx(*controls, target, inverse=inverse)
    raise MethodArityMismatch("relative-phase folds take 2 or 3 controls")


def mcz_fragment(
    qubits: tuple[int, ...],
    method: str = "exact-recursive",
    ancillas: tuple[int, ...] = (),
    polarity: tuple[int, ...] | None = None,
    clbits: tuple[int, ...] = (),
) -> list[Instruction]:
    """Exact C^{k-1}Z on the qubits (up to global phase), ancillas in/out |0>.

    The polarity selects which basis state receives the -1 phase.  With
    method "measurement-assisted" the ancillas are measured instead of
    unitarily uncomputed; one classical bit per fold is required.
    """
    qubits = tuple(qubits)
    ancillas = tuple(ancillas)
    k = len(qubits)
    if k < 1:
        raise BadArity("mcz needs at least one qubit")
    if method not in METHODS + ("plain",):
        raise MethodArityMismatch(f"unknown method {method!r}")
    if polarity is not None and len(polarity) != k:
        raise ValidationError("polarity must cover every qubit")

    if method == "plain":
        # symbolic gate; lower() expands it by the ancilla-free recursion
        if k == 1:
            if polarity is not None and polarity[0] == 0:
                return _instr([x(qubits[0]), z(qubits[0]), x(qubits[0])])
            return _instr([z(qubits[0])])
        return _instr([cz(*qubits, polarity=polarity)])

    if k <= 2 or method == "exact-recursive":
        if polarity is not None and any(p == 0 for p in polarity):
            if k == 1:
                core = _instr([z(qubits[0])])
            elif k == 2:
                return _instr([cz(*qubits, polarity=polarity)])
            else:
                core = mcz_recursive(qubits)
            conj = _instr([x(q) for q, p in zip(qubits, polarity) if p == 0])
            return conj + core + conj
        if k == 1:
            return _instr([z(qubits[0])])
        if k == 2:
            return _instr([cz(*qubits)])
        return mcz_recursive(qubits)

    controls, target = qubits[:-1], qubits[-1]
    pair_only = method == "margolus"
    if method == "exact-one-ancilla":
        if not ancillas:
            raise MissingAncilla("exact-one-ancilla needs one ancilla")
        take = 3 if len(controls) >= 3 else 2
        folds = [take]
        ancillas = ancillas[:1]
    else:
        folds = mcz_plan(len(controls), len(ancillas), pair_only=pair_only)
    if method == "measurement-assisted":
        if len(clbits) < len(folds):
            raise MissingAncilla(
                f"measurement-assisted uncompute needs {len(folds)} classical bits"
            )

    conj = (
        _instr([x(q) for q, p in zip(qubits, polarity) if p == 0])
        if polarity is not None
        else []
    )

    live = list(controls)
    computes: list[tuple[tuple[int, ...], int, int]] = []  # (controls, ancilla, size)
    body: list[Instruction] = []
    for fi, size in enumerate(folds):
        anc = ancillas[fi]
        taken = tuple(live[:size])
        if method == "measurement-assisted":
            body += and_compute(taken, anc)
        else:
            body += _fold_gate("margolus" if pair_only else "maslov", taken, anc, inverse=False)
        computes.append((taken, anc, size))
        live = [anc] + live[size:]

    central = tuple(live) + (target,)
    if len(central) == 2:
        body += _instr([cz(*central)])
    else:
        body += mcz_recursive(central)

    if method == "measurement-assisted":
        for fi, (taken, anc, _) in reversed(list(enumerate(computes))):
            body += measurement_assisted_uncompute(anc, taken, clbits[fi])
            # restore |0> so the ancilla can be reused by later fragments
            body.append(Instruction(x(anc), condition=(clbits[fi], 1)))
    else:
        for taken, anc, _ in reversed(computes):
            body += _fold_gate("margolus" if pair_only else "maslov", taken, anc, inverse=True)

    return conj + body + conj


def and_fold_tree(
    controls: tuple[int, ...],
    ancillas: tuple[int, ...],
    kind: str = "maslov",
) -> tuple[list[Instruction], int, list[tuple[tuple[int, ...], int]]]:
    """Fold controls into a single wire holding their AND.

    Returns (instructions, final wire, folds) where folds lists
    (fold controls, ancilla) in compute order.  kind "maslov" uses
    relative-phase gates (valid inside compute/uncompute sandwiches around
    diagonal payloads), "margolus" uses pair folds, "clean" uses the
    phase-exact AND computes.
    """
    live = list(controls)
    out: list[Instruction] = []
    folds: list[tuple[tuple[int, ...], int]] = []
    used = 0
    while len(live) > 1:
        if used >= len(ancillas):
            raise MissingAncilla(
                f"folding {len(controls)} controls exhausted {len(ancillas)} ancillas"
            )
        take = min(2 if kind == "margolus" else 3, len(live))
        taken = tuple(live[:take])
        anc = ancillas[used]
        used += 1
        if kind == "clean":
            out += and_compute(taken, anc)
        elif kind == "margolus":
            out += margolus_ccx(taken[0], taken[1], anc)
        elif take == 2:
            out += relphase_ccx(taken[0], taken[1], anc)
        else:
            out += relphase_cccx(*taken, anc)
        folds.append((taken, anc))
        live = [anc] + live[take:]
    return out, live[0], folds


def relphase_ancillas_needed(k: int) -> int:
    """Ancillas the maslov fold plan uses for a k-qubit controlled Z."""
    if k <= 3:
        return 1 if k == 3 else 0
    live, used = k - 1, 0
    while live > 2:
        live -= min(3, live) - 1
        used += 1
    return used


# diffusers and oracles ------------------------------------------------------

def diffuser(
    k: int,
    targets: tuple[int, ...],
    method: str = "exact-recursive",
    ancillas: tuple[int, ...] = (),
) -> list[Instruction]:
    """Grover diffuser on the targets, equal to -(2|s><s| - I).

    Realized as H-wall, C^{k-1}Z with all-zero polarity, H-wall; the global
    phase -1 relative to the textbook reflection is part of the contract.
    """
    targets = tuple(targets)
    if k < 1 or len(targets) != k:
        raise BadArity(f"diffuser needs k={k} target qubits")
    if k == 1:
        q = targets[0]
        return _instr([h(q), x(q), z(q), x(q), h(q)])
    wall = _instr([h(q) for q in targets])
    core = mcz_fragment(targets, method=method, ancillas=ancillas, polarity=(0,) * k)
    return wall + core + list(reversed(wall))


def oracle(
    spec: OracleSpec,
    qubits: tuple[int, ...] | None = None,
    ancillas: tuple[int, ...] = (),
    clbits: tuple[int, ...] = (),
) -> list[Instruction]:
    """Phase oracle: -1 exactly on |mask>, +1 elsewhere, for every style."""
    qubits = tuple(qubits) if qubits is not None else tuple(range(spec.n))
    if len(qubits) != spec.n:
        raise BadMask("oracle qubit list must match the mask width")
    polarity = tuple(int(ch) for ch in spec.mask)
    if spec.style == "plain-mcz":
        if spec.n == 1:
            return mcz_fragment(qubits, polarity=polarity)
        return _instr([cz(*qubits, polarity=polarity)])
    method = {
        "ancilla-relphase": "relphase-maslov",
        "ancilla-relphase-partial-uncompute": "relphase-maslov",
        "measurement-assisted": "measurement-assisted",
    }[spec.style]
    return mcz_fragment(
        qubits, method=method, ancillas=ancillas, polarity=polarity, clbits=clbits
    )


def oracle_ancillas_needed(n: int, style: str) -> int:
    if style == "plain-mcz":
        return 0
    return relphase_ancillas_needed(n)


# lowering --------------------------------------------------------------------

def _lower_gate(gate: Gate) -> list[Instruction]:
    name = gate.name
    if name in ("h", "x", "z", "rz", "measure", "barrier"):
        return [Instruction(gate)]
    if name == "rccx":
        return relphase_ccx(*gate.qubits, inverse=gate.inverse)
    if name == "rcccx":
        return relphase_cccx(*gate.qubits, inverse=gate.inverse)
    if name == "cx":
        controls, target = gate.qubits[:-1], gate.qubits[-1]
        pol = gate.effective_polarity()
        conj = _instr([x(q) for q, p in zip(controls, pol) if p == 0])
        if len(controls) == 1:
            core = [Instruction(cx(controls[0], target))]
        else:
            core = _instr([h(target)]) + mcz_recursive(tuple(controls) + (target,)) + _instr([h(target)])
        return conj + core + conj
    if name == "cz":
        pol = gate.effective_polarity()
        conj = _instr([x(q) for q, p in zip(gate.qubits, pol) if p == 0])
        if len(gate.qubits) == 2:
            core = [Instruction(cz(*gate.qubits))]
        else:
            core = mcz_recursive(gate.qubits)
        return conj + core + conj
    raise ValidationError(f"cannot lower gate {name!r}")


def lower(circuit: Circuit) -> Circuit:
    """Expand polarities, relative-phase primitives and wide gates to 1q/2q."""
    builder = CircuitBuilder(circuit.n_qubits, circuit.n_clbits, metadata=dict(circuit.metadata))
    for instr in circuit.instructions:
        for sub in _lower_gate(instr.gate):
            builder.add(sub.gate, instr.condition if instr.condition is not None else sub.condition)
    return builder.build()
