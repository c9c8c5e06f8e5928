"""Acceptance-criteria battery, shared by ``postsel suite`` and the test suite."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .gadget import GadgetParams, amplify_by_repetition, decompose, pad_completeness, run_gadget
from .instances import (
    bell_projector_circuit,
    biased_circuit,
    biased_instance,
    deterministic_acceptor,
    random_ops,
)
from .legacy import TruthTable, mn_witness, run_aaronson_pp, run_mn_protocol
from .rng import substream
from .statevec import (
    Circuit,
    HermitianOperator,
    RegisterLayout,
    acceptance_operator,
    acceptance_probability,
    make_circuit,
    new_basis_state,
    prepare_input,
    random_state,
    tensor_states,
    zero_state,
)
from .witness import entangled_optimum, random_product_search, seesaw_optimize

SOUNDNESS_PX = (0.25, 0.5, 0.875, 1.0 - 2.0**-8)
SOUNDNESS_ROTATIONS = tuple(2.0**-k for k in range(5, 21))


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} ({self.seconds:.2f} s)"

    def as_dict(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "seconds": self.seconds,
            "details": self.details,
        }


def _timed(number: int, title: str, fn, seed: int) -> CriterionResult:
    t0 = time.perf_counter()
    passed, details = fn(seed)
    return CriterionResult(number, title, bool(passed), time.perf_counter() - t0, details)


def _random_layout(rng, max_qubits: int, min_qubits: int = 2) -> RegisterLayout:
    while True:
        w1 = int(rng.integers(1, 4))
        w2 = int(rng.integers(0, 4))
        m = int(rng.integers(0, 4))
        if min_qubits <= w1 + w2 + m <= max_qubits:
            return RegisterLayout(w1, w2, m)


def _random_pair(rng, max_qubits: int = 8, depth: int = 30):
    lay = _random_layout(rng, max_qubits)
    ops = random_ops(range(lay.n_qubits), depth, rng)
    circuit = Circuit(lay, tuple(ops), int(rng.integers(lay.n_qubits)))
    return circuit, random_state(lay.n_qubits, rng)


# ---------------------------------------------------------------------------


def completeness(seed: int = 0):
    """20 deterministic acceptors on up to 12 qubits keep p_accept = 1."""
    rng = substream(seed, "criterion-1")
    eps = GadgetParams.from_r(1)
    worst, slowest = 0.0, 0.0
    sizes = []
    for i in range(20):
        n = 4 + (i % 9)  # 4..12 qubits
        w = max(1, (n - 2) // 2)
        lay = RegisterLayout(w, w, n - 2 * w)
        circuit, psi = deterministic_acceptor(lay, rng)
        t0 = time.perf_counter()
        out = run_gadget(circuit, psi, eps)
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, abs(out.p_accept - 1.0))
        sizes.append(n)
    return worst < 1e-9 and slowest < 1.0, {"max_abs_error": worst, "slowest_run_s": slowest, "qubits": sizes}


def soundness(seed: int = 0):
    """p_accept -> 1/2 with |p_accept - 1/2| <= 10 t / (1 - p_x), matching the predictor."""
    rng = substream(seed, "criterion-2")
    t0 = time.perf_counter()
    worst_disc, worst_ratio = 0.0, 0.0
    for p_x in SOUNDNESS_PX:
        circuit, psi = biased_circuit(RegisterLayout(2, 2, 1), p_x, rng)
        for t in SOUNDNESS_ROTATIONS:
            out = run_gadget(circuit, psi, GadgetParams(rotation=t))
            worst_disc = max(worst_disc, out.discrepancy)
            worst_ratio = max(worst_ratio, abs(out.p_accept - 0.5) / (10 * t / (1 - out.p_x)))
    elapsed = time.perf_counter() - t0
    ok = worst_disc < 1e-9 and worst_ratio <= 1.0 and elapsed < 30.0
    return ok, {"max_discrepancy": worst_disc, "max_bound_ratio": worst_ratio, "runtime_s": elapsed}


def postselection_floor(seed: int = 0):
    """p_post >= t^2 / 2 on the soundness grid plus 100 random pairs."""
    rng = substream(seed, "criterion-3")
    worst = math.inf
    for p_x in SOUNDNESS_PX:
        circuit, psi = biased_circuit(RegisterLayout(2, 2, 1), p_x, rng)
        for t in SOUNDNESS_ROTATIONS:
            out = run_gadget(circuit, psi, GadgetParams(rotation=t))
            worst = min(worst, out.p_post / (t * t / 2))
    for _ in range(100):
        circuit, psi = _random_pair(rng)
        t = SOUNDNESS_ROTATIONS[int(rng.integers(len(SOUNDNESS_ROTATIONS)))]
        out = run_gadget(circuit, psi, GadgetParams(rotation=t))
        worst = min(worst, out.p_post / (t * t / 2))
    return worst >= 1.0, {"min_floor_ratio": worst}


def decomposition_residuals(seed: int = 0):
    """100 random pairs: residuals < 1e-9 and <psi|perp> = 0 within 1e-10."""
    rng = substream(seed, "criterion-4")
    worst_res, worst_overlap = 0.0, 0.0
    for _ in range(100):
        circuit, psi = _random_pair(rng)
        d = decompose(circuit, psi)
        worst_res = max(worst_res, d.residual_f1, d.residual_f0)
        worst_overlap = max(worst_overlap, d.perp_overlap)
    ok = worst_res < 1e-9 and worst_overlap < 1e-10
    return ok, {"max_residual": worst_res, "max_perp_overlap": worst_overlap}


def protocol3_regime(seed: int = 0):
    """delta = 1e-2: yes side (epsilon' = 1e-6) >= 0.999, no side (delta' in {.1,.2,.3}) <= 0.7."""
    rng = substream(seed, "criterion-5")
    delta = 1e-2
    params = GadgetParams(variant="protocol3", rotation=delta)
    circuit, psi = biased_circuit(RegisterLayout(2, 2, 1), 1.0 - 1e-6, rng)
    yes = run_gadget(circuit, psi, params)
    no = []
    for dp in (0.1, 0.2, 0.3):
        circuit, psi = biased_circuit(RegisterLayout(2, 2, 1), 1.0 - dp, rng)
        no.append(run_gadget(circuit, psi, params))
    worst_disc = max(o.discrepancy for o in [yes, *no])
    ok = yes.p_accept >= 0.999 and all(o.p_accept <= 0.7 for o in no) and worst_disc < 1e-9
    return ok, {
        "yes_p_accept": yes.p_accept,
        "yes_threshold": 0.999,
        "no_p_accept": [o.p_accept for o in no],
        "max_discrepancy": worst_disc,
    }


def _random_acceptance_operator(rng) -> tuple[HermitianOperator, int]:
    w = int(rng.integers(1, 4))
    m = int(rng.integers(1, 3))
    lay = RegisterLayout(w, w, m)
    ops = random_ops(range(lay.n_qubits), 10 * lay.n_qubits, rng)
    circuit = Circuit(lay, tuple(ops), int(rng.integers(lay.n_qubits)))
    return acceptance_operator(circuit), w


def _register_operator(rng, w: int) -> HermitianOperator:
    """Acceptance operator of a single w-qubit register (one or two ancillas)."""
    lay = RegisterLayout(w, 0, int(rng.integers(1, 3)))
    ops = random_ops(range(lay.n_qubits), 10 * lay.n_qubits, rng)
    return acceptance_operator(Circuit(lay, tuple(ops), int(rng.integers(lay.n_qubits))))


def witness_sandwich(seed: int = 0):
    """random search <= seesaw <= entangled optimum; separable exactness; the Bell gap."""
    rng = substream(seed, "criterion-6")
    sandwich_violation = -math.inf
    for i in range(100):
        a, w = _random_acceptance_operator(rng)
        rs = random_product_search(a, w, samples=2000, seed=seed * 1000 + i)
        sw = seesaw_optimize(a, w, seed=seed + i)
        ent, _ = entangled_optimum(a)
        # rs <= sw + 1e-6 <= ent + 1e-6, the right inequality up to rounding
        sandwich_violation = max(sandwich_violation, rs.value - (sw.value + 1e-6), sw.value - (ent + 1e-12))

    sep_error = 0.0
    for _ in range(20):
        w = int(rng.integers(1, 4))
        a1, a2 = _register_operator(rng, w), _register_operator(rng, w)
        a = HermitianOperator(np.kron(a1.entries, a2.entries))
        target = a1.eigenvalues()[-1] * a2.eigenvalues()[-1]
        sep_error = max(sep_error, abs(seesaw_optimize(a, w).value - target))

    bell = acceptance_operator(bell_projector_circuit())
    bell_prod = seesaw_optimize(bell, 1).value
    bell_ent, _ = entangled_optimum(bell)
    ok = (
        sandwich_violation <= 0.0
        and sep_error < 1e-8
        and abs(bell_prod - 0.5) < 1e-6
        and abs(bell_ent - 1.0) < 1e-6
    )
    return ok, {
        "max_sandwich_violation": sandwich_violation,
        "max_separable_error": sep_error,
        "bell_product_optimum": bell_prod,
        "bell_entangled_optimum": bell_ent,
    }


def _non_tie_table(rng, n: int) -> TruthTable:
    while True:
        t = TruthTable(n, tuple(int(b) for b in rng.integers(0, 2, 1 << n)))
        if t.accepting != t.rejecting:
            return t


def pp_equivalence(seed: int = 0):
    """Exhaustive n <= 3 plus 200 random tables for n in 4..8 agree with direct counting."""
    rng = substream(seed, "criterion-7")
    t0 = time.perf_counter()
    mismatches, checked = 0, 0
    for n in (1, 2, 3):
        for outs in itertools.product((0, 1), repeat=1 << n):
            t = TruthTable(n, outs)
            if t.accepting == t.rejecting:
                continue
            checked += 1
            mismatches += run_aaronson_pp(t).decision != t.majority()
    for i in range(200):
        t = _non_tie_table(rng, 4 + i % 5)
        checked += 1
        mismatches += run_aaronson_pp(t).decision != t.majority()
    elapsed = time.perf_counter() - t0
    return mismatches == 0 and elapsed < 60.0, {"tables": checked, "mismatches": mismatches, "runtime_s": elapsed}


def mn_eigenvector(seed: int = 0):
    """Eigenvector witnesses give a pure indicator whose |1> amplitude share is the eigenvalue."""
    rng = substream(seed, "criterion-8")
    worst_purity, worst_share = 0.0, 0.0
    for _ in range(20):
        lay = RegisterLayout(int(rng.integers(1, 3)), int(rng.integers(0, 3)), int(rng.integers(1, 3)))
        ops = random_ops(range(lay.n_qubits), 8 * lay.n_qubits, rng)
        circuit = Circuit(lay, tuple(ops), int(rng.integers(lay.n_qubits)))
        lam, v = mn_witness(circuit)
        res = run_mn_protocol(circuit, v)
        worst_purity = max(worst_purity, abs(res.purity - 1.0))
        worst_share = max(worst_share, abs(res.one_amplitude_share - lam))
    # the |-> eigenbasis of H|1><1|H makes |0> a non-eigenvector witness
    demo = run_mn_protocol(make_circuit(1, ops=[("H", 0)]), new_basis_state(1, 0))
    ok = worst_purity < 1e-9 and worst_share < 1e-9 and demo.purity < 0.99
    return ok, {
        "max_purity_defect": worst_purity,
        "max_share_error": worst_share,
        "non_eigenvector_purity": demo.purity,
    }


def repetition_and_padding(seed: int = 0):
    """k = 3 repetition of p_x = 0.9 gives 0.729; padding an acceptor to c = 0.8 gives 0.8."""
    rng = substream(seed, "criterion-9")
    circuit, (s1, s2) = biased_instance(RegisterLayout(1, 1, 1), 0.9, rng)
    rep = amplify_by_repetition(circuit, 3)
    rep_input = prepare_input(rep, tensor_states(s1, s1, s1), tensor_states(s2, s2, s2))
    rep_value = acceptance_probability(rep, rep_input)

    acc, acc_psi = deterministic_acceptor(RegisterLayout(2, 1, 1), rng)
    padded = pad_completeness(acc, 0.8)
    pad_input = acc_psi.tensor(zero_state(2))
    pad_value = acceptance_probability(padded, pad_input)
    ok = abs(rep_value - 0.729) < 1e-9 and abs(pad_value - 0.8) < 1e-10
    return ok, {"repetition_value": rep_value, "padding_value": pad_value}


def gadget_16_qubits(seed: int = 0):
    rng = substream(seed, "criterion-10")
    circuit, psi = biased_circuit(RegisterLayout(6, 6, 2), 0.5, rng, depth=40)
    t0 = time.perf_counter()
    out = run_gadget(circuit, psi, GadgetParams.from_r(1))
    elapsed = time.perf_counter() - t0
    return elapsed < 5.0, {"qubits": circuit.n_qubits + 2, "runtime_s": elapsed, "discrepancy": out.discrepancy}


CRITERIA = (
    (1, "completeness preservation", completeness),
    (2, "soundness collapse toward 1/2", soundness),
    (3, "postselection floor p_post >= t^2/2", postselection_floor),
    (4, "decomposition residuals", decomposition_residuals),
    (5, "protocol-3 regime", protocol3_regime),
    (6, "witness optimization sandwich", witness_sandwich),
    (7, "majority-detection oracle equivalence", pp_equivalence),
    (8, "eigenvector-witness indicator", mn_eigenvector),
    (9, "repetition and completeness padding", repetition_and_padding),
)

SUITE_BUDGET_S = 300.0


def run_criterion(number: int, seed: int = 0) -> CriterionResult:
    for num, title, fn in CRITERIA:
        if num == number:
            return _timed(num, title, fn, seed)
    raise KeyError(number)


def run_suite(seed: int = 0, log=None) -> list[CriterionResult]:
    t0 = time.perf_counter()
    results = []
    for num, title, fn in CRITERIA:
        res = _timed(num, title, fn, seed)
        results.append(res)
        if log:
            log(res.line())
    perf = _timed(10, "performance (16-qubit gadget < 5 s, suite < 5 min)", gadget_16_qubits, seed)
    total = time.perf_counter() - t0
    perf.details["suite_runtime_s"] = total
    perf.passed = perf.passed and total < SUITE_BUDGET_S
    results.append(perf)
    if log:
        log(perf.line())
    return results
