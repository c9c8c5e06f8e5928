"""Postselection gap-amplification gadget.

The gadget wraps a verifier circuit Q with two fresh qubits appended at the
highest indices: a *control* qubit (index n) prepared in
``(t|1> - |0>)/sqrt(1+t^2)`` and a *copy* qubit (index n+1) that receives the
output bit between Q and Q^-1 and is then rotated by
``|0> -> |0> + t|1>, |1> -> |1> - t|0>`` (normalized).  The pair is
postselected onto span{|00>, |11>} and accepted on (|00> + |11>)/sqrt 2.

``protocol1`` uses a tiny rotation t = epsilon and assumes completeness 1;
``protocol3`` uses t = delta for completeness 1 - epsilon'.  The algebra is
identical, so both share one implementation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError, InputError
from .statevec import (
    MAX_QUBITS,
    Circuit,
    RegisterLayout,
    Statevector,
    _run_array,
    apply_circuit,
    basis_projector,
    custom_gate,
    gate,
    inverse_circuit,
    output_probability,
    project,
    projection_probability,
    vector_projector,
)

VARIANTS = ("protocol1", "protocol3")
DEGENERATE_TOL = 1e-12
OUTCOME_COLUMNS = (
    "variant",
    "rotation",
    "p_x",
    "p_post",
    "p_accept",
    "predicted_p_accept",
    "predicted_p_post",
    "discrepancy",
    "l_bound_exponent",
)


@dataclass(frozen=True)
class GadgetParams:
    variant: str = "protocol1"
    rotation: float = 2.0**-10
    r_exponent: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InputError(f"unknown gadget variant {self.variant!r}")
        if self.r_exponent is not None:
            if int(self.r_exponent) < 1:
                raise InputError("r_exponent must be a positive integer")
            object.__setattr__(self, "rotation", 2.0 ** (-10 * int(self.r_exponent)))
        if not 0.0 < self.rotation < 1.0:
            raise InputError(f"rotation must lie in (0, 1), got {self.rotation!r}")

    @classmethod
    def from_r(cls, r: int = 1, variant: str = "protocol1") -> GadgetParams:
        """epsilon = 2^(-10 r)."""
        return cls(variant=variant, r_exponent=r)


@dataclass(frozen=True, eq=False)
class Decomposition:
    p_x: float
    completeness_error: float
    perp_state: Statevector | None
    residual_f1: float
    residual_f0: float
    perp_overlap: float  # |<psi|perp>|, 0 when perp is undefined
    f1_overlap: complex  # <psi|f1>, should equal sqrt(p_x)


@dataclass(frozen=True)
class GadgetOutcome:
    variant: str
    rotation: float
    p_x: float
    p_post: float
    p_accept: float
    predicted_p_accept: float
    predicted_p_post: float
    discrepancy: float
    l_bound_exponent: float

    def as_dict(self) -> dict:
        return asdict(self)

    def row(self) -> tuple:
        return tuple(getattr(self, c) for c in OUTCOME_COLUMNS)


def _copy_then_uncompute(circuit: Circuit, state: Statevector, extra: int) -> np.ndarray:
    """Q, copy the output bit, Q^-1 on ``state`` (x) |0>^extra; the copy lands on the last qubit."""
    n = circuit.n_qubits
    total = n + extra
    if total > MAX_QUBITS:
        raise CapacityError(f"gadget needs {total} qubits, limit is {MAX_QUBITS}")
    amps = np.zeros(1 << total, dtype=complex)
    amps[:: 1 << extra] = state.amplitudes
    wide = Circuit(RegisterLayout(circuit.layout.witness1, circuit.layout.witness2, circuit.layout.ancilla + extra))
    steps = wide.extend(circuit.gates).append(gate("CX"), circuit.output_qubit, total - 1)
    steps = steps.extend(inverse_circuit(circuit).gates)
    return _run_array(amps, steps)


def decompose(circuit: Circuit, input_state: Statevector) -> Decomposition:
    if input_state.n_qubits != circuit.n_qubits:
        raise InputError(f"state has {input_state.n_qubits} qubits, circuit has {circuit.n_qubits}")
    p = output_probability(circuit, input_state)
    p = min(max(p, 0.0), 1.0)
    after = _copy_then_uncompute(circuit, input_state, 1).reshape(-1, 2)
    g0, g1 = after[:, 0], after[:, 1]  # sqrt(1-p)|f0>, sqrt(p)|f1>
    psi = input_state.amplitudes

    r = g1 - np.vdot(psi, g1) * psi
    r_norm = np.linalg.norm(r)
    perp = r / r_norm if r_norm > 0 else np.zeros_like(r)
    # branch norms give 1 - p without cancellation when p is close to 1
    s = math.sqrt(float(np.vdot(g1, g1).real) * float(np.vdot(g0, g0).real))

    res1 = np.linalg.norm(g1 - (p * psi + s * perp))
    res0 = np.linalg.norm(g0 - ((1.0 - p) * psi - s * perp))
    if p > DEGENERATE_TOL:
        res1 /= math.sqrt(p)
    if 1.0 - p > DEGENERATE_TOL:
        res0 /= math.sqrt(1.0 - p)

    degenerate = p < DEGENERATE_TOL or 1.0 - p < DEGENERATE_TOL or r_norm == 0
    perp_state = None if degenerate else Statevector(input_state.n_qubits, perp)
    f1_overlap = complex(np.vdot(psi, g1)) / math.sqrt(p) if p > DEGENERATE_TOL else 0j
    return Decomposition(
        p_x=p,
        completeness_error=1.0 - p,
        perp_state=perp_state,
        residual_f1=float(res1),
        residual_f0=float(res0),
        perp_overlap=0.0 if perp_state is None else abs(np.vdot(psi, perp)),
        f1_overlap=f1_overlap,
    )


def predict_gadget(p_x: float, rotation: float) -> tuple[float, float]:
    """Closed-form (p_accept, p_post) of the gadget for acceptance probability p_x."""
    if not -1e-12 <= p_x <= 1 + 1e-12:
        raise InputError(f"p_x must lie in [0, 1], got {p_x!r}")
    p = min(max(p_x, 0.0), 1.0)
    t = float(rotation)
    s = math.sqrt(p * (1.0 - p))
    a11 = t * (p + (1.0 - p) * t)
    a00 = -((1.0 - p) - t * p)
    b11 = s * t * (1.0 - t)
    b00 = s * (1.0 + t)
    total = a11 * a11 + a00 * a00 + b11 * b11 + b00 * b00
    if total < 1e-300:
        raise InputError(f"gadget prediction undefined at p_x={p_x!r}, rotation={rotation!r}")
    accept = ((a11 + a00) ** 2 + (b11 + b00) ** 2) / (2.0 * total)
    post = total / (1.0 + t * t) ** 2
    return accept, post


def prepare_gate(t: float):
    """Reflection taking |0> to (t|1> - |0>)/sqrt(1+t^2)."""
    return custom_gate("PREP", np.array([[-1.0, t], [t, 1.0]]) / math.sqrt(1.0 + t * t))


def rotation_gate(t: float):
    """|0> -> |0> + t|1>, |1> -> |1> - t|0>, normalized."""
    return custom_gate("ROT", np.array([[1.0, -t], [t, 1.0]]) / math.sqrt(1.0 + t * t))


def gadget_circuit(circuit: Circuit, params: GadgetParams) -> Circuit:
    """Everything before the measurements, as a circuit on n + 2 qubits (control = n, copy = n + 1)."""
    n = circuit.n_qubits
    if n + 2 > MAX_QUBITS:
        raise CapacityError(f"gadget needs {n + 2} qubits, limit is {MAX_QUBITS}")
    lay = circuit.layout
    wide = Circuit(RegisterLayout(lay.witness1, lay.witness2, lay.ancilla + 2), (), circuit.output_qubit)
    t = params.rotation
    return (
        wide.extend(circuit.gates)
        .append(gate("CX"), circuit.output_qubit, n + 1)
        .extend(inverse_circuit(circuit).gates)
        .append(prepare_gate(t), n)
        .append(rotation_gate(t), n + 1)
    )


BELL_PLUS = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0)


def run_gadget(circuit: Circuit, input_state: Statevector, params: GadgetParams) -> GadgetOutcome:
    if input_state.n_qubits != circuit.n_qubits:
        raise InputError(f"state has {input_state.n_qubits} qubits, circuit has {circuit.n_qubits}")
    n = circuit.n_qubits
    wide = gadget_circuit(circuit, params)
    start = np.zeros(1 << (n + 2), dtype=complex)
    start[::4] = input_state.amplitudes
    state = apply_circuit(Statevector(n + 2, start), wide)
    p_post, cond = project(state, basis_projector((n, n + 1), ("00", "11")), where="gadget {00,11} postselection")
    p_accept = projection_probability(cond, vector_projector((n, n + 1), BELL_PLUS))

    p_x = min(max(output_probability(circuit, input_state), 0.0), 1.0)
    pred_accept, pred_post = predict_gadget(p_x, params.rotation)
    return GadgetOutcome(
        variant=params.variant,
        rotation=params.rotation,
        p_x=p_x,
        p_post=p_post,
        p_accept=p_accept,
        predicted_p_accept=pred_accept,
        predicted_p_post=pred_post,
        discrepancy=abs(p_accept - pred_accept),
        l_bound_exponent=-math.log2(p_post),
    )


def sweep(circuit: Circuit, input_state: Statevector, params_list: Sequence[GadgetParams]) -> list[GadgetOutcome]:
    params_list = list(params_list)
    if not params_list:
        raise InputError("sweep needs at least one parameter set")
    return [run_gadget(circuit, input_state, p) for p in params_list]


# --------------------------------------------------------------------------
# Repetition and completeness padding
# --------------------------------------------------------------------------


def amplify_by_repetition(circuit: Circuit, k: int) -> Circuit:
    """k copies on disjoint registers, outputs combined by a Toffoli AND-chain.

    Register order of the result: all witness1 blocks, all witness2 blocks,
    all ancilla blocks, then the k - 1 AND-chain ancillas.
    """
    if k < 1:
        raise InputError("repetition count must be positive")
    lay = circuit.layout
    w1, w2, m = lay.witness1, lay.witness2, lay.ancilla
    total = k * lay.n_qubits + (k - 1)
    if total > MAX_QUBITS:
        raise CapacityError(f"{k} repetitions need {total} qubits, limit is {MAX_QUBITS}")

    def remap(j: int, q: int) -> int:
        if q < w1:
            return j * w1 + q
        if q < w1 + w2:
            return k * w1 + j * w2 + (q - w1)
        return k * (w1 + w2) + j * m + (q - w1 - w2)

    ops = []
    for j in range(k):
        ops += [(g, tuple(remap(j, q) for q in targets)) for g, targets in circuit.gates]
    outs = [remap(j, circuit.output_qubit) for j in range(k)]
    base = k * (w1 + w2 + m)
    acc = outs[0]
    for i, o in enumerate(outs[1:]):
        ops.append((gate("CCX"), (acc, o, base + i)))
        acc = base + i
    return Circuit(RegisterLayout(k * w1, k * w2, k * m + (k - 1)), tuple(ops), acc)


def pad_completeness(circuit: Circuit, c: float) -> Circuit:
    """AND the output with a fresh coin that reads 1 with probability c."""
    if not 0.0 < c < 1.0:
        raise InputError(f"completeness target must lie in (0, 1), got {c!r}")
    lay = circuit.layout
    n = lay.n_qubits
    if n + 2 > MAX_QUBITS:
        raise CapacityError(f"padding needs {n + 2} qubits, limit is {MAX_QUBITS}")
    theta = 2.0 * math.asin(math.sqrt(c))
    ops = circuit.gates + ((gate("RY", theta), (n,)), (gate("CCX"), (circuit.output_qubit, n, n + 1)))
    return Circuit(RegisterLayout(lay.witness1, lay.witness2, lay.ancilla + 2), ops, n + 1)
