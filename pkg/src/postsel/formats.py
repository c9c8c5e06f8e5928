"""Line-oriented text formats: circuits, statevectors, truth tables.

Circuit format::

    # comment
    registers witness1=1 witness2=1 ancilla=1
    out 2
    H 0
    CX 0 2
    RY(1.5707963267948966) 1

State format: ``amplitudes <k>`` followed by ``2**k`` lines ``<re> <im>``.
Truth-table format: ``bits <n>`` followed by ``2**n`` lines of ``0``/``1``.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError
from .statevec import GATE_NAMES, Circuit, RegisterLayout, Statevector, gate

_REGISTERS = re.compile(r"registers\s+witness1=(\S+)\s+witness2=(\S+)\s+ancilla=(\S+)\s*$")
_GATE = re.compile(r"([A-Za-z]+)(?:\(([^)]*)\))?((?:\s+\S+)*)\s*$")


def _strip(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def _column(raw: str, token: str) -> int:
    idx = raw.find(token)
    return idx + 1 if idx >= 0 else 1


def _parse_int(text: str, lineno: int, raw: str, what: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ParseError(f"malformed {what} {text!r}", lineno, _column(raw, text)) from None
    if value < 0:
        raise ParseError(f"{what} must be nonnegative", lineno, _column(raw, text))
    return value


def _parse_angle(text: str, lineno: int, raw: str) -> float:
    text = text.strip()
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"malformed angle {text!r}", lineno, _column(raw, text)) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite angle {text!r}", lineno, _column(raw, text))
    return value


def parse_circuit(text: str) -> Circuit:
    layout = None
    out = 0
    out_seen = False
    ops = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        line = line.strip()
        if layout is None:
            m = _REGISTERS.match(line)
            if m is None:
                raise ParseError("expected 'registers witness1=<w1> witness2=<w2> ancilla=<m>'", lineno, col)
            sizes = [_parse_int(v, lineno, raw, "register size") for v in m.groups()]
            try:
                layout = RegisterLayout(*sizes)
            except InputError as exc:
                raise ParseError(str(exc), lineno, col) from None
            continue
        if line.startswith("out ") or line == "out":
            if out_seen:
                raise ParseError("duplicate 'out' directive", lineno, col)
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("expected 'out <index>'", lineno, col)
            out = _parse_int(parts[1], lineno, raw, "output index")
            if out >= layout.n_qubits:
                raise ParseError(f"output index {out} out of range", lineno, _column(raw, parts[1]))
            out_seen = True
            continue
        m = _GATE.match(line)
        if m is None:
            raise ParseError(f"cannot parse gate line {line!r}", lineno, col)
        name, angles, rest = m.groups()
        key = name.upper()
        if key not in GATE_NAMES:
            raise ParseError(f"unknown gate {name!r}", lineno, _column(raw, name))
        params = [] if angles is None else [_parse_angle(a, lineno, raw) for a in angles.split(",")]
        targets = []
        for tok in rest.split():
            q = _parse_int(tok, lineno, raw, "qubit index")
            if q >= layout.n_qubits:
                raise ParseError(
                    f"qubit index {q} out of range for {layout.n_qubits} qubits", lineno, _column(raw, tok)
                )
            targets.append(q)
        try:
            g = gate(key, *params)
        except InputError as exc:
            raise ParseError(str(exc), lineno, _column(raw, name)) from None
        if len(targets) != g.arity:
            raise ParseError(f"{key} needs {g.arity} target(s), got {len(targets)}", lineno, col)
        if len(set(targets)) != len(targets):
            raise ParseError(f"duplicate targets {targets}", lineno, col)
        ops.append((g, tuple(targets)))
    if layout is None:
        raise ParseError("missing 'registers' directive", max(1, len(text.splitlines())), 1)
    return Circuit(layout, tuple(ops), out)


def serialize_circuit(circuit: Circuit) -> str:
    lay = circuit.layout
    lines = [f"registers witness1={lay.witness1} witness2={lay.witness2} ancilla={lay.ancilla}"]
    if circuit.output_qubit:
        lines.append(f"out {circuit.output_qubit}")
    for g, targets in circuit.gates:
        if not g.is_named:
            raise InputError(f"gate {g.name} has no text representation")
        head = g.name
        if g.params:
            head += "(" + ",".join(repr(float(p)) for p in g.params) + ")"
        lines.append(" ".join([head, *map(str, targets)]))
    return "\n".join(lines) + "\n"


def load_circuit(path) -> Circuit:
    return parse_circuit(Path(path).read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# State files
# --------------------------------------------------------------------------


def parse_state(text: str, normalize: bool = False) -> Statevector:
    lines = [(i, _strip(raw).strip()) for i, raw in enumerate(text.splitlines(), start=1)]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise ParseError("empty state file", 1)
    lineno, head = lines[0]
    parts = head.split()
    if len(parts) != 2 or parts[0] != "amplitudes":
        raise ParseError("expected 'amplitudes <k>'", lineno)
    k = _parse_int(parts[1], lineno, head, "qubit count")
    if k < 1:
        raise ParseError("state needs at least one qubit", lineno)
    body = lines[1:]
    if len(body) != 1 << k:
        raise ParseError(f"expected {1 << k} amplitude lines, found {len(body)}", body[-1][0] if body else lineno)
    amps = np.empty(1 << k, dtype=complex)
    for j, (lineno, ln) in enumerate(body):
        fields = ln.split()
        if len(fields) != 2:
            raise ParseError("expected '<re> <im>'", lineno)
        try:
            amps[j] = complex(float(fields[0]), float(fields[1]))
        except ValueError:
            raise ParseError(f"malformed amplitude {ln!r}", lineno) from None
    try:
        return Statevector.from_array(amps, normalize=normalize)
    except InputError as exc:
        raise ParseError(str(exc), lines[0][0]) from None


def serialize_state(state: Statevector) -> str:
    lines = [f"amplitudes {state.n_qubits}"]
    lines += [f"{float(a.real)!r} {float(a.imag)!r}" for a in state.amplitudes]
    return "\n".join(lines) + "\n"


def load_state(path, normalize: bool = False) -> Statevector:
    return parse_state(Path(path).read_text(encoding="utf-8"), normalize=normalize)


# --------------------------------------------------------------------------
# Truth tables
# --------------------------------------------------------------------------


def parse_truth_table(text: str) -> tuple[int, tuple[int, ...]]:
    lines = [(i, _strip(raw).strip()) for i, raw in enumerate(text.splitlines(), start=1)]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise ParseError("empty truth-table file", 1)
    lineno, head = lines[0]
    parts = head.split()
    if len(parts) != 2 or parts[0] != "bits":
        raise ParseError("expected 'bits <n>'", lineno)
    n = _parse_int(parts[1], lineno, head, "bit count")
    body = lines[1:]
    if len(body) != 1 << n:
        raise ParseError(f"expected {1 << n} output lines, found {len(body)}", body[-1][0] if body else lineno)
    outputs = []
    for lineno, ln in body:
        if ln not in ("0", "1"):
            raise ParseError(f"expected 0 or 1, got {ln!r}", lineno)
        outputs.append(int(ln))
    return n, tuple(outputs)


def serialize_truth_table(n_bits: int, outputs) -> str:
    return "\n".join([f"bits {n_bits}", *(str(int(b)) for b in outputs)]) + "\n"
