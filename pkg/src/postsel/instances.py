"""Verifier circuits with known acceptance behaviour, for tests and experiments."""

from __future__ import annotations

import math

import numpy as np

from .statevec import (
    GATE_NAMES,
    Circuit,
    RegisterLayout,
    Statevector,
    _LIBRARY,
    apply_circuit,
    gate,
    make_circuit,
    prepare_input,
    zero_state,
)


def random_ops(qubits, n_gates: int, rng: np.random.Generator) -> list:
    qubits = list(qubits)
    names = [nm for nm in GATE_NAMES if _LIBRARY[nm][0] <= len(qubits)]
    ops = []
    for _ in range(n_gates):
        name = names[rng.integers(len(names))]
        arity, n_params, _ = _LIBRARY[name]
        params = rng.uniform(-math.pi, math.pi, size=n_params)
        picked = rng.choice(len(qubits), size=arity, replace=False)
        ops.append((gate(name, *params), tuple(qubits[int(i)] for i in picked)))
    return ops


def _register_prep(layout: RegisterLayout, rng, depth: int):
    """Random product witness psi1 (x) psi2 and the circuits that prepare it from |0>."""
    w1, w2 = layout.witness1, layout.witness2
    witnesses, preps = [], []
    for lo, size in ((0, w1), (w1, w2)):
        if not size:
            continue
        sub = Circuit(RegisterLayout(size, 0, 0), tuple(random_ops(range(size), depth, rng)))
        witnesses.append(apply_circuit(zero_state(size), sub))
        preps.append([(g, tuple(q + lo for q in t)) for g, t in sub.gates])
    return witnesses, preps


def biased_instance(layout: RegisterLayout, p_x: float, rng: np.random.Generator, depth: int = 12):
    """Circuit and product witness factors on which acceptance is exactly ``p_x``.

    Q un-prepares a random product witness, rotates qubit 0 so it reads 1
    with probability p_x, then scrambles every other qubit (qubit 0 is only
    ever used as a control afterwards).
    """
    witnesses, preps = _register_prep(layout, rng, depth)
    ops = []
    for prep in preps:
        ops += [(g.inverse(), t) for g, t in reversed(prep)]
    if p_x >= 1.0:
        ops.append((gate("X"), (0,)))
    elif p_x > 0.0:
        ops.append((gate("RY", 2.0 * math.asin(math.sqrt(p_x))), (0,)))
    n = layout.n_qubits
    if n > 1:
        ops += random_ops(range(1, n), 2 * depth, rng)
        for q in rng.choice(np.arange(1, n), size=min(3, n - 1), replace=False):
            ops.append((gate("CX"), (0, int(q))))
    return Circuit(layout, tuple(ops), 0), witnesses


def biased_circuit(layout: RegisterLayout, p_x: float, rng: np.random.Generator, depth: int = 12):
    """Like ``biased_instance`` but returns the full input psi1 (x) psi2 (x) |0^m>."""
    circuit, witnesses = biased_instance(layout, p_x, rng, depth)
    return circuit, prepare_input(circuit, *witnesses)


def deterministic_acceptor(layout: RegisterLayout, rng: np.random.Generator, depth: int = 12):
    return biased_circuit(layout, 1.0, rng, depth)


def identity_acceptor() -> tuple[Circuit, Statevector]:
    """One witness qubit, no gates, output = the witness: accepts |1> surely."""
    return make_circuit(1), Statevector(1, np.array([0, 1]))


def ry_on_output(theta: float, on_ancilla: bool = False) -> Circuit:
    """RY(theta) on the output qubit, either the witness itself or a fresh ancilla."""
    if on_ancilla:
        return make_circuit(1, 0, 1, ops=[(("RY", theta), 1)], out=1)
    return make_circuit(1, ops=[(("RY", theta), 0)])


def bell_projector_circuit() -> Circuit:
    """Accepts exactly on |Phi+> across the two one-qubit witness registers."""
    return make_circuit(1, 1, 1, ops=[("CX", 0, 1), ("H", 0), ("X", 0), ("X", 1), ("CCX", 0, 1, 2)], out=2)


def cheating_circuit(noise: float = 0.1, bell_weight: float = 0.8) -> Circuit:
    """Acceptance operator noise*I + bell_weight*|Phi+><Phi+|.

    With the defaults the entangled optimum is 0.9 while the best product
    witness only reaches 0.5.
    """
    pc = bell_weight / (1.0 - noise)
    # qubits: 0,1 witnesses; 2 bell flag; 3 coin; 4 noise coin; 5 and; 6 output
    ops = [
        ("CX", 0, 1),
        ("H", 0),
        ("X", 0),
        ("X", 1),
        ("CCX", 0, 1, 2),
        (("RY", 2.0 * math.asin(math.sqrt(pc))), 3),
        (("RY", 2.0 * math.asin(math.sqrt(noise))), 4),
        ("CCX", 2, 3, 5),
        ("X", 5),
        ("X", 4),
        ("CCX", 4, 5, 6),
        ("X", 6),
    ]
    return make_circuit(1, 1, 5, ops=ops, out=6)


def deterministic_rejector() -> tuple[Circuit, Statevector]:
    """Output is an untouched ancilla, so every witness is rejected."""
    return make_circuit(1, 0, 1, out=1), zero_state(2)

