"""Postselection protocols that work only for classical-reversible or eigenvector inputs.

* ``run_aaronson_pp`` decides strict majority of a truth table: uniform
  superposition over r, reversible evaluation of b_r with garbage that is then
  erased, Hadamards and postselection on r = 0^n, and a controlled-Hadamard
  comparator swept over control ratios 2^i.
* ``run_mn_protocol`` copies the output bit between Q and Q^dagger and
  postselects the ancillas on |0^m>; the copied bit is a clean pure qubit
  only when the witness is an eigenvector of the acceptance operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InputError, NullPostselectionError
from .gadget import _copy_then_uncompute
from .statevec import (
    MAX_QUBITS,
    NULL_EVENT_TOL,
    Circuit,
    RegisterLayout,
    Statevector,
    acceptance_operator,
    apply_circuit,
    apply_gate,
    basis_projector,
    controlled,
    gate,
    prepare_input,
    project,
)
from .witness import top_eigenpair

# min over all n <= 3 majority-reject tables of the sweep's max |+>-fidelity,
# minus 1e-6; regenerate with scripts/calibrate_pp.py
PP_THRESHOLD = 0.499999
PP_RELIABLE_BITS = 9


@dataclass(frozen=True)
class TruthTable:
    n_bits: int
    outputs: tuple

    def __post_init__(self):
        if not 1 <= self.n_bits <= 12:
            raise InputError(f"truth tables need 1..12 input bits, got {self.n_bits}")
        outs = tuple(int(b) for b in self.outputs)
        if len(outs) != 1 << self.n_bits:
            raise InputError(f"expected {1 << self.n_bits} outputs, got {len(outs)}")
        if set(outs) - {0, 1}:
            raise InputError("truth-table outputs must be 0 or 1")
        object.__setattr__(self, "outputs", outs)

    @property
    def accepting(self) -> int:
        return sum(self.outputs)

    @property
    def rejecting(self) -> int:
        return len(self.outputs) - self.accepting

    def majority(self) -> str:
        """Direct count; the reference answer for the simulated protocol."""
        if self.accepting == self.rejecting:
            raise InputError("truth table is an exact tie")
        return "majority-accept" if self.accepting > self.rejecting else "majority-reject"


@dataclass(frozen=True)
class ControlRatio:
    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise InputError("control amplitudes must be nonnegative")
        if abs(self.alpha**2 + self.beta**2 - 1.0) > 1e-12:
            raise InputError("control amplitudes must satisfy alpha^2 + beta^2 = 1")

    @classmethod
    def from_exponent(cls, i: int) -> ControlRatio:
        """beta / alpha = 2^i."""
        r = 2.0**i
        alpha = 1.0 / math.sqrt(1.0 + r * r)
        return cls(alpha, r * alpha)


# --------------------------------------------------------------------------
# Reversible compilation of a truth table
# --------------------------------------------------------------------------


def _and_ladder(controls, work):
    """CCX chain leaving work[k] = controls[0] & ... & controls[k + 1]."""
    ops = [(gate("CCX"), (controls[0], controls[1], work[0]))]
    for k in range(2, len(controls)):
        ops.append((gate("CCX"), (controls[k], work[k - 2], work[k - 1])))
    return ops


def _mcx(controls, target, work):
    if len(controls) == 1:
        return [(gate("CX"), (controls[0], target))]
    ladder = _and_ladder(controls, work)
    return ladder + [(gate("CX"), (work[len(controls) - 2], target))] + ladder[::-1]


@dataclass(frozen=True)
class ReversibleTable:
    """Registers: r = 0..n-1, output b = n, work = n+1 .. 2n-1."""

    compute: Circuit  # b_r and garbage_r
    erase: Circuit  # garbage_r -> 0, leaves b_r

    @property
    def n_bits(self) -> int:
        return (self.compute.n_qubits) // 2


def compile_table(table: TruthTable) -> ReversibleTable:
    """Multiplexed reversible evaluation of b_r.

    Each minterm of the smaller output class drives a multi-controlled X onto
    b (the zero class is handled by a leading X on b).  The evaluation then
    leaves the prefix ANDs of r in the work register as garbage.
    """
    n = table.n_bits
    total = 2 * n
    if total > MAX_QUBITS:
        raise CapacityError(f"{n}-bit table needs {total} qubits, limit is {MAX_QUBITS}")
    r = list(range(n))
    b = n
    work = list(range(n + 1, 2 * n))
    layout = RegisterLayout(0, 0, total)

    ones = [i for i, v in enumerate(table.outputs) if v]
    zeros = [i for i, v in enumerate(table.outputs) if not v]
    ops = []
    if len(zeros) < len(ones):
        ops.append((gate("X"), (b,)))
        terms = zeros
    else:
        terms = ones
    for m in terms:
        flips = [(gate("X"), (r[k],)) for k in range(n) if not (m >> (n - 1 - k)) & 1]
        ops += flips + _mcx(r, b, work) + flips

    garbage = _and_ladder(r, work) if n > 1 else []
    compute = Circuit(layout, tuple(ops + garbage), b)
    erase = Circuit(layout, tuple(garbage[::-1]), b)
    return ReversibleTable(compute, erase)


# --------------------------------------------------------------------------
# Comparator
# --------------------------------------------------------------------------

_CH = controlled(gate("H"), "CH")


def comparator_gadget(target: Statevector, control: ControlRatio) -> tuple[float, Statevector]:
    """Controlled-Hadamard comparator.

    Returns the probability of postselecting the target on |1> and the
    renormalized control state, proportional to
    alpha*b|0> + beta*(a - b)/sqrt(2)|1> for target a|0> + b|1>.
    """
    if target.n_qubits != 1:
        raise InputError("comparator target must be a single qubit")
    a, b = target.amplitudes
    if abs(a.imag) > 1e-12 or abs(b.imag) > 1e-12 or a.real < -1e-12 or b.real < -1e-12:
        raise InputError("comparator target needs nonnegative real amplitudes")
    ctrl = Statevector(1, np.array([control.alpha, control.beta], dtype=complex))
    state = apply_gate(ctrl.tensor(target), _CH, (0, 1))
    prob, cond = project(state, basis_projector((1,), ("1",)), where="comparator")
    return prob, Statevector.from_array(cond.amplitudes.reshape(2, 2)[:, 1], normalize=True)


PLUS = np.array([1.0, 1.0]) / math.sqrt(2.0)


def plus_fidelity(state: Statevector) -> float:
    return float(abs(np.vdot(PLUS, state.amplitudes)) ** 2)


# --------------------------------------------------------------------------
# Majority detection
# --------------------------------------------------------------------------


def postselected_target(table: TruthTable, erase_garbage: bool = True) -> tuple[float, np.ndarray]:
    """Superpose r, evaluate b_r, erase garbage, Hadamard r and postselect r = 0^n.

    Returns (postselection probability, amplitudes over (b, work)).

    Row k of the returned matrix is the b = k branch; column j indexes the
    work register, so erased garbage leaves only column 0 populated.
    """
    rev = compile_table(table)
    n = table.n_bits
    total = 2 * n
    layout = rev.compute.layout
    hadamards = tuple((gate("H"), (q,)) for q in range(n))
    ops = hadamards + rev.compute.gates
    if erase_garbage:
        ops += rev.erase.gates
    ops += hadamards
    state = apply_circuit(Statevector(total, np.eye(1, 1 << total, 0).ravel()), Circuit(layout, ops, n))
    prob, cond = project(state, basis_projector(range(n), ["0" * n]), where="pp r = 0^n postselection")
    return prob, cond.amplitudes.reshape(1 << n, 2, -1)[0]


def target_state(table: TruthTable) -> Statevector:
    """The postselected output qubit, proportional to #reject|0> + #accept|1>."""
    _, rest = postselected_target(table)
    clean = rest[:, 0]
    if np.vdot(clean, clean).real < 1.0 - 1e-12:
        raise InputError("work register was not returned to zero")
    return Statevector.from_array(np.abs(clean), normalize=True)


def sweep_exponents(n_bits: int) -> range:
    return range(-(n_bits + 2), n_bits + 3)


@dataclass(frozen=True)
class SweepPoint:
    exponent: int
    post_prob: float
    plus_fidelity: float


@dataclass(frozen=True)
class PPResult:
    decision: str
    sweep: tuple
    max_fidelity: float

    def as_dict(self) -> dict:
        return {
            "decision": self.decision,
            "sweep": [
                {"exponent": p.exponent, "post_prob": p.post_prob, "plus_fidelity": p.plus_fidelity}
                for p in self.sweep
            ],
        }


def run_aaronson_pp(table: TruthTable, exponents=None, threshold: float = PP_THRESHOLD) -> PPResult:
    """Strict-majority decision by postselection.

    Majority-reject tables put same-sign amplitudes into the comparator and
    some sweep point pushes the control toward |+> (fidelity >= 1/2);
    majority-accept tables give opposite signs and fidelity < 1/2 everywhere.
    With the frozen threshold the separation holds for tables of up to
    ``PP_RELIABLE_BITS`` bits.
    """
    table.majority()  # promise check
    target = target_state(table)
    exps = sweep_exponents(table.n_bits) if exponents is None else exponents
    points = []
    for i in exps:
        prob, ctrl = comparator_gadget(target, ControlRatio.from_exponent(i))
        points.append(SweepPoint(int(i), prob, plus_fidelity(ctrl)))
    best = max(p.plus_fidelity for p in points)
    decision = "majority-reject" if best > threshold else "majority-accept"
    return PPResult(decision, tuple(points), best)


# --------------------------------------------------------------------------
# Eigenvector-witness protocol
# --------------------------------------------------------------------------


def mn_witness(circuit: Circuit) -> tuple[float, Statevector]:
    """Top eigenpair of Pi_0 Q^dagger Pi_acc Q Pi_0 on the witness register."""
    if circuit.layout.witness_qubits < 1:
        raise InputError("circuit has no witness register")
    a = acceptance_operator(circuit)
    value, vec = top_eigenpair(a.entries)
    return value, Statevector.from_array(vec, normalize=True)


@dataclass(frozen=True, eq=False)
class MNResult:
    density: np.ndarray  # reduced 2x2 state of the copied output bit
    p_post: float

    @property
    def purity(self) -> float:
        return float(np.trace(self.density @ self.density).real)

    @property
    def one_weight(self) -> float:
        """Born probability of reading 1 from the indicator."""
        return float(self.density[1, 1].real)

    @property
    def one_amplitude_share(self) -> float:
        """|c1| / (|c0| + |c1|); equals the eigenvalue for eigenvector witnesses."""
        c0, c1 = math.sqrt(max(self.density[0, 0].real, 0)), math.sqrt(max(self.density[1, 1].real, 0))
        return c1 / (c0 + c1)

    @property
    def indicator_state(self) -> Statevector:
        _, vec = top_eigenpair(self.density)
        return Statevector.from_array(vec, normalize=True)


def run_mn_protocol(circuit: Circuit, witness: Statevector) -> MNResult:
    """Q, copy the output bit to a fresh qubit, Q^dagger, postselect ancillas on 0^m."""
    psi = prepare_input(circuit, witness)
    after = _copy_then_uncompute(circuit, psi, 1)
    n = circuit.n_qubits
    m = circuit.layout.ancilla
    w = circuit.layout.witness_qubits
    state = Statevector(n + 1, after)
    if m:
        p_post, state = project(state, basis_projector(range(w, n), ["0" * m]), where="mn ancilla postselection")
    else:
        p_post = 1.0
    mat = state.amplitudes.reshape(-1, 2)
    rho = mat.T @ mat.conj()
    if p_post < NULL_EVENT_TOL:
        raise NullPostselectionError(p_post, "mn ancilla postselection")
    return MNResult(rho, p_post)
