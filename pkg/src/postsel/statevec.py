"""Dense statevector simulation with postselection.

Qubit 0 is the most significant bit of the amplitude index, so the
amplitude vector reshaped to ``(2,) * n`` has axis ``k`` equal to qubit ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, InputError, NullPostselectionError

MAX_QUBITS = 22
NORM_TOL = 1e-12
UNITARY_TOL = 1e-12
HERMITIAN_TOL = 1e-12
NULL_EVENT_TOL = 1e-14
ANCILLA_TOL = 1e-10


def _check_capacity(n_qubits: int) -> None:
    if n_qubits > MAX_QUBITS:
        raise CapacityError(f"{n_qubits} qubits exceeds the simulator limit of {MAX_QUBITS}")


# --------------------------------------------------------------------------
# States
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InputError("a statevector needs at least one qubit")
        _check_capacity(self.n_qubits)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 1 << self.n_qubits:
            raise InputError(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, got {amps.shape[0]}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InputError(f"statevector is not normalized (|psi|^2 = {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_array(cls, amplitudes, normalize: bool = False) -> Statevector:
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        dim = amps.shape[0]
        n = dim.bit_length() - 1
        if dim < 2 or 1 << n != dim:
            raise InputError(f"amplitude count {dim} is not a power of two >= 2")
        if normalize:
            nrm = np.linalg.norm(amps)
            if nrm < NULL_EVENT_TOL:
                raise InputError("cannot normalize the zero vector")
            amps = amps / nrm
        return cls(n, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def inner(self, other: Statevector) -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def tensor(self, other: Statevector) -> Statevector:
        _check_capacity(self.n_qubits + other.n_qubits)
        return Statevector(self.n_qubits + other.n_qubits, np.kron(self.amplitudes, other.amplitudes))

    def allclose(self, other: Statevector, atol: float = 1e-10) -> bool:
        return self.n_qubits == other.n_qubits and bool(
            np.allclose(self.amplitudes, other.amplitudes, rtol=0.0, atol=atol)
        )

    def __repr__(self):
        return f"Statevector(n_qubits={self.n_qubits}, amplitudes={np.array2string(self.amplitudes, precision=4)})"


def new_basis_state(n_qubits: int, basis_index: int = 0) -> Statevector:
    if n_qubits < 1:
        raise InputError("zero-qubit states are not allowed")
    _check_capacity(n_qubits)
    if not 0 <= basis_index < 1 << n_qubits:
        raise InputError(f"basis index {basis_index} out of range for {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[basis_index] = 1.0
    return Statevector(n_qubits, amps)


def zero_state(n_qubits: int) -> Statevector:
    return new_basis_state(n_qubits, 0)


def tensor_states(*states: Statevector) -> Statevector:
    out = states[0]
    for s in states[1:]:
        out = out.tensor(s)
    return out


def random_state(n_qubits: int, rng: np.random.Generator) -> Statevector:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    v = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return Statevector.from_array(v, normalize=True)


# --------------------------------------------------------------------------
# Gates
# --------------------------------------------------------------------------

_SQ2 = 1.0 / math.sqrt(2.0)


def _rx(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def _u(theta, phi, lam):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ]
    )


def _controlled_matrix(u: np.ndarray, n_controls: int = 1) -> np.ndarray:
    k = u.shape[0]
    dim = k << n_controls
    m = np.eye(dim, dtype=complex)
    m[dim - k :, dim - k :] = u
    return m


_X = np.array([[0, 1], [1, 0]], dtype=complex)

# name -> (arity, n_params, matrix factory, inverse builder)
_LIBRARY = {
    "H": (1, 0, lambda: np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2),
    "X": (1, 0, lambda: _X),
    "Y": (1, 0, lambda: np.array([[0, -1j], [1j, 0]])),
    "Z": (1, 0, lambda: np.diag([1.0 + 0j, -1.0])),
    "S": (1, 0, lambda: np.diag([1.0, 1j])),
    "SDG": (1, 0, lambda: np.diag([1.0, -1j])),
    "T": (1, 0, lambda: np.diag([1.0, np.exp(0.25j * math.pi)])),
    "TDG": (1, 0, lambda: np.diag([1.0, np.exp(-0.25j * math.pi)])),
    "RX": (1, 1, _rx),
    "RY": (1, 1, _ry),
    "RZ": (1, 1, _rz),
    "U": (1, 3, _u),
    "CX": (2, 0, lambda: _controlled_matrix(_X)),
    "CZ": (2, 0, lambda: np.diag([1.0 + 0j, 1, 1, -1])),
    "SWAP": (2, 0, lambda: np.eye(4, dtype=complex)[[0, 2, 1, 3]]),
    "CCX": (3, 0, lambda: _controlled_matrix(_X, 2)),
}

GATE_NAMES = tuple(_LIBRARY)

_SELF_INVERSE = {"H", "X", "Y", "Z", "CX", "CZ", "SWAP", "CCX"}
_NAMED_INVERSE = {"S": "SDG", "SDG": "S", "T": "TDG", "TDG": "T"}
# controlled-X family applied as an index permutation
_PERMUTATION_GATES = {"X", "CX", "CCX"}


@dataclass(frozen=True, eq=False)
class Gate:
    name: str
    params: tuple = ()
    matrix: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4, 8):
            raise InputError(f"gate {self.name}: matrix must be 2x2, 4x4 or 8x8")
        err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if err >= UNITARY_TOL:
            raise InputError(f"gate {self.name}: matrix is not unitary (error {err:.2e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    @property
    def arity(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    @property
    def is_named(self) -> bool:
        return self.name in _LIBRARY

    def inverse(self) -> Gate:
        if self.name in _SELF_INVERSE:
            return self
        if self.name in _NAMED_INVERSE:
            return gate(_NAMED_INVERSE[self.name])
        if self.name in ("RX", "RY", "RZ"):
            return gate(self.name, -self.params[0])
        if self.name == "U":
            theta, phi, lam = self.params
            return gate("U", -theta, -lam, -phi)
        name = self.name[:-4] if self.name.endswith("_inv") else self.name + "_inv"
        return Gate(name, self.params, self.matrix.conj().T)

    def same_as(self, other: Gate, atol: float = 1e-12) -> bool:
        return self.arity == other.arity and bool(np.allclose(self.matrix, other.matrix, rtol=0, atol=atol))

    def __repr__(self):
        if self.params:
            return f"{self.name}({', '.join(repr(p) for p in self.params)})"
        return self.name


def gate(name: str, *params: float) -> Gate:
    """Look up a library gate by (case-insensitive) name."""
    key = name.upper()
    if key not in _LIBRARY:
        raise InputError(f"unknown gate {name!r}")
    arity, n_params, factory = _LIBRARY[key]
    if len(params) != n_params:
        raise InputError(f"gate {key} takes {n_params} parameter(s), got {len(params)}")
    return Gate(key, tuple(params), factory(*params))


def controlled(g: Gate, name: str | None = None) -> Gate:
    """Add one control qubit; the control is the first target."""
    if g.arity > 2:
        raise InputError("cannot control a 3-qubit gate")
    return Gate(name or "C" + g.name, g.params, _controlled_matrix(g.matrix))


def custom_gate(name: str, matrix) -> Gate:
    return Gate(name, (), np.asarray(matrix, dtype=complex))


# --------------------------------------------------------------------------
# Array kernels (operate on arrays of shape (2**n, *batch))
# --------------------------------------------------------------------------


def _apply_array(amps: np.ndarray, g: Gate, targets: Sequence[int], n: int) -> np.ndarray:
    batch = amps.shape[1:]
    psi = amps.reshape((2,) * n + batch)
    k = len(targets)
    if g.name in _PERMUTATION_GATES:
        out = psi.copy()
        sel = [slice(None)] * psi.ndim
        for c in targets[:-1]:
            sel[c] = 1
        t = targets[-1]
        sel0, sel1 = list(sel), list(sel)
        sel0[t], sel1[t] = 0, 1
        out[tuple(sel0)] = psi[tuple(sel1)]
        out[tuple(sel1)] = psi[tuple(sel0)]
        return out.reshape(amps.shape)
    if g.name == "SWAP":
        return np.swapaxes(psi, targets[0], targets[1]).copy().reshape(amps.shape)
    u = g.matrix.reshape((2,) * (2 * k))
    out = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), list(targets)))
    out = np.moveaxis(out, list(range(k)), list(targets))
    return np.ascontiguousarray(out).reshape(amps.shape)


def _check_targets(targets: Sequence[int], n: int, arity: int) -> tuple:
    targets = tuple(int(t) for t in targets)
    if len(targets) != arity:
        raise InputError(f"gate arity {arity} does not match {len(targets)} target(s)")
    if len(set(targets)) != len(targets):
        raise InputError(f"duplicate target qubits {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise InputError(f"target qubit {t} out of range for {n} qubits")
    return targets


def apply_gate(state: Statevector, g: Gate, targets: Sequence[int]) -> Statevector:
    targets = _check_targets(targets, state.n_qubits, g.arity)
    out = _apply_array(state.amplitudes, g, targets, state.n_qubits)
    return Statevector(state.n_qubits, out)


# --------------------------------------------------------------------------
# Circuits
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RegisterLayout:
    witness1: int
    witness2: int
    ancilla: int

    def __post_init__(self):
        if min(self.witness1, self.witness2, self.ancilla) < 0:
            raise InputError("register sizes must be nonnegative")
        if self.witness1 + self.witness2 + self.ancilla < 1:
            raise InputError("a circuit needs at least one qubit")

    @property
    def n_qubits(self) -> int:
        return self.witness1 + self.witness2 + self.ancilla

    @property
    def witness_qubits(self) -> int:
        return self.witness1 + self.witness2


@dataclass(frozen=True)
class Circuit:
    layout: RegisterLayout
    gates: tuple = ()
    output_qubit: int = 0

    def __post_init__(self):
        n = self.layout.n_qubits
        _check_capacity(n)
        if not 0 <= self.output_qubit < n:
            raise InputError(f"output qubit {self.output_qubit} out of range for {n} qubits")
        ops = []
        for g, targets in self.gates:
            ops.append((g, _check_targets(targets, n, g.arity)))
        object.__setattr__(self, "gates", tuple(ops))

    @property
    def n_qubits(self) -> int:
        return self.layout.n_qubits

    def __len__(self):
        return len(self.gates)

    def append(self, g: Gate, *targets: int) -> Circuit:
        return Circuit(self.layout, self.gates + ((g, tuple(targets)),), self.output_qubit)

    def extend(self, ops: Iterable) -> Circuit:
        return Circuit(self.layout, self.gates + tuple(ops), self.output_qubit)


def make_circuit(witness1: int, witness2: int = 0, ancilla: int = 0, ops=(), out: int = 0) -> Circuit:
    """Convenience builder; ``ops`` holds ``(name_or_gate, targets...)`` tuples.

    Parametrized gates are given as ``(("RY", theta), 0)``.
    """
    built = []
    for op in ops:
        head, *targets = op
        if isinstance(head, Gate):
            g = head
        elif isinstance(head, tuple):
            g = gate(head[0], *head[1:])
        else:
            g = gate(head)
        built.append((g, tuple(targets)))
    return Circuit(RegisterLayout(witness1, witness2, ancilla), tuple(built), out)


def _run_array(amps: np.ndarray, circuit: Circuit) -> np.ndarray:
    n = circuit.n_qubits
    for g, targets in circuit.gates:
        amps = _apply_array(amps, g, targets, n)
    return amps


def apply_circuit(state: Statevector, circuit: Circuit) -> Statevector:
    if state.n_qubits != circuit.n_qubits:
        raise InputError(f"state has {state.n_qubits} qubits, circuit has {circuit.n_qubits}")
    return Statevector(state.n_qubits, _run_array(state.amplitudes, circuit))


def inverse_circuit(circuit: Circuit) -> Circuit:
    ops = tuple((g.inverse(), targets) for g, targets in reversed(circuit.gates))
    return Circuit(circuit.layout, ops, circuit.output_qubit)


def random_circuit(
    layout: RegisterLayout, n_gates: int, rng: np.random.Generator, output_qubit: int = 0
) -> Circuit:
    """Random circuit over the full gate library."""
    n = layout.n_qubits
    names = [nm for nm in GATE_NAMES if _LIBRARY[nm][0] <= n]
    ops = []
    for _ in range(n_gates):
        name = names[rng.integers(len(names))]
        arity, n_params, _ = _LIBRARY[name]
        params = rng.uniform(-math.pi, math.pi, size=n_params)
        targets = rng.choice(n, size=arity, replace=False)
        ops.append((gate(name, *params), tuple(int(t) for t in targets)))
    return Circuit(layout, tuple(ops), output_qubit)


# --------------------------------------------------------------------------
# Projectors and postselection
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProjectorSpec:
    """Projector on a subset of qubits.

    ``kind == "basis"``: ``data`` is a collection of allowed bitstrings
    (strings of '0'/'1', one character per listed qubit, in order).
    ``kind == "vector"``: ``data`` is a normalized vector on those qubits.
    """

    kind: str
    qubits: tuple
    data: object

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        if len(set(qubits)) != len(qubits) or not qubits:
            raise InputError("projector qubits must be distinct and non-empty")
        object.__setattr__(self, "qubits", qubits)
        k = len(qubits)
        if self.kind == "basis":
            allowed = frozenset(self.data)
            for b in allowed:
                if len(b) != k or set(b) - {"0", "1"}:
                    raise InputError(f"bitstring {b!r} does not match {k} qubit(s)")
            object.__setattr__(self, "data", allowed)
        elif self.kind == "vector":
            v = np.array(self.data, dtype=complex).reshape(-1)
            if v.shape[0] != 1 << k:
                raise InputError("projector vector has the wrong dimension")
            if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
                raise InputError("projector vector must be normalized")
            v.setflags(write=False)
            object.__setattr__(self, "data", v)
        else:
            raise InputError(f"unknown projector kind {self.kind!r}")

    def complement(self) -> ProjectorSpec:
        if self.kind != "basis":
            raise InputError("only basis-subspace projectors have a basis complement")
        k = len(self.qubits)
        everything = {format(i, f"0{k}b") for i in range(1 << k)}
        return ProjectorSpec("basis", self.qubits, everything - self.data)


def basis_projector(qubits: Sequence[int], bitstrings: Iterable[str]) -> ProjectorSpec:
    return ProjectorSpec("basis", tuple(qubits), tuple(bitstrings))


def vector_projector(qubits: Sequence[int], vector) -> ProjectorSpec:
    return ProjectorSpec("vector", tuple(qubits), vector)


def _project_array(amps: np.ndarray, proj: ProjectorSpec, n: int) -> np.ndarray:
    """Unnormalized P|amps>; supports trailing batch axes."""
    for q in proj.qubits:
        if not 0 <= q < n:
            raise InputError(f"projector qubit {q} out of range for {n} qubits")
    batch = amps.shape[1:]
    k = len(proj.qubits)
    psi = np.moveaxis(amps.reshape((2,) * n + batch), proj.qubits, range(k))
    shape = psi.shape
    mat = psi.reshape(1 << k, -1)
    if proj.kind == "basis":
        keep = np.zeros(1 << k, dtype=bool)
        for b in proj.data:
            keep[int(b, 2)] = True
        out = np.where(keep[:, None], mat, 0)
    else:
        v = proj.data
        out = np.outer(v, v.conj() @ mat)
    out = np.moveaxis(out.reshape(shape), range(k), proj.qubits)
    return np.ascontiguousarray(out).reshape(amps.shape)


def project(state: Statevector, proj: ProjectorSpec, where: str = "project") -> tuple[float, Statevector]:
    """Postselect ``state`` on ``proj``; returns (probability, conditioned state)."""
    out = _project_array(state.amplitudes, proj, state.n_qubits)
    prob = float(np.vdot(out, out).real)
    if prob < NULL_EVENT_TOL:
        raise NullPostselectionError(prob, where)
    return min(prob, 1.0), Statevector(state.n_qubits, out / math.sqrt(prob))


def projection_probability(state: Statevector, proj: ProjectorSpec) -> float:
    out = _project_array(state.amplitudes, proj, state.n_qubits)
    return float(np.vdot(out, out).real)


# --------------------------------------------------------------------------
# Acceptance semantics
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError("operator must be a square matrix")
        err = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if err >= HERMITIAN_TOL:
            raise InputError(f"operator is not Hermitian (error {err:.2e})")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def expectation(self, v) -> float:
        v = v.amplitudes if isinstance(v, Statevector) else np.asarray(v, dtype=complex)
        return float(np.vdot(v, self.entries @ v).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


def output_probability(circuit: Circuit, state: Statevector) -> float:
    """||Pi_1 Q |state>||^2 for an arbitrary input state."""
    if state.n_qubits != circuit.n_qubits:
        raise InputError(f"state has {state.n_qubits} qubits, circuit has {circuit.n_qubits}")
    out = _run_array(state.amplitudes, circuit)
    psi = np.moveaxis(out.reshape((2,) * circuit.n_qubits), circuit.output_qubit, 0)
    return float(np.sum(np.abs(psi[1]) ** 2))


def ancilla_zero_weight(circuit: Circuit, state: Statevector) -> float:
    m = circuit.layout.ancilla
    if m == 0:
        return 1.0
    mat = state.amplitudes.reshape(-1, 1 << m)
    return float(np.sum(np.abs(mat[:, 0]) ** 2))


def prepare_input(circuit: Circuit, *witnesses: Statevector) -> Statevector:
    """witness1 (x) witness2 (x) |0^m>.

    A single witness spanning both registers is also accepted.
    """
    lay = circuit.layout
    parts = [w for w in witnesses if w is not None]
    total = sum(w.n_qubits for w in parts)
    if total != lay.witness_qubits:
        raise InputError(f"witnesses cover {total} qubits, layout needs {lay.witness_qubits}")
    if lay.ancilla:
        parts.append(zero_state(lay.ancilla))
    return tensor_states(*parts)


def acceptance_probability(circuit: Circuit, input_state: Statevector) -> float:
    if input_state.n_qubits != circuit.n_qubits:
        raise InputError(f"state has {input_state.n_qubits} qubits, circuit has {circuit.n_qubits}")
    w0 = ancilla_zero_weight(circuit, input_state)
    if w0 < 1.0 - ANCILLA_TOL:
        raise InputError(f"ancilla register is not |0^m> (weight on zero = {w0!r})")
    return output_probability(circuit, input_state)


def _witness_columns(circuit: Circuit) -> np.ndarray:
    """Q applied to every witness basis vector tensored with |0^m>, as columns."""
    lay = circuit.layout
    d = 1 << lay.witness_qubits
    cols = np.zeros((1 << circuit.n_qubits, d), dtype=complex)
    cols[np.arange(d) << lay.ancilla, np.arange(d)] = 1.0
    return _run_array(cols, circuit)


def acceptance_operator(circuit: Circuit) -> HermitianOperator:
    """A on the witness registers with <v|A|v> = acceptance probability of v (x) |0^m>."""
    out = _witness_columns(circuit)
    n = circuit.n_qubits
    d = out.shape[1]
    psi = np.moveaxis(out.reshape((2,) * n + (d,)), circuit.output_qubit, 0)
    k = psi[1].reshape(-1, d)
    a = k.conj().T @ k
    return HermitianOperator(0.5 * (a + a.conj().T))
