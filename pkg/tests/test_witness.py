import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from postsel.errors import InputError
from postsel.instances import (
    bell_projector_circuit,
    cheating_circuit,
    deterministic_acceptor,
    deterministic_rejector,
)
from postsel.statevec import HermitianOperator, RegisterLayout, Statevector, acceptance_operator, random_state
from postsel.witness import (
    DecisionThresholds,
    SeesawBudget,
    Verdict,
    decide,
    decide_with_evidence,
    entangled_optimum,
    product_value,
    random_product_search,
    reduced_operator,
    seesaw_optimize,
    top_eigenpair,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_psd(rng, d, scale=1.0):
    """Hermitian with spectrum in [0, scale] and a nondegenerate top."""
    u = _random_unitary(rng, d)
    spectrum = np.sort(rng.uniform(0, 0.8, size=d))
    spectrum[-1] = 1.0
    return HermitianOperator(scale * (u * spectrum) @ u.conj().T)


def test_entangled_optimum_examples():
    value, state = entangled_optimum(HermitianOperator(np.diag([0.0, 1.0])))
    assert value == 1.0 and state.allclose(Statevector(1, [0, 1]))
    value, state = entangled_optimum(HermitianOperator(np.eye(4) / 2))
    assert abs(value - 0.5) < 1e-15 and abs(state.norm() - 1) < 1e-12


def test_entangled_optimum_recovers_known_spectrum():
    rng = np.random.default_rng(0)
    u = _random_unitary(rng, 16)
    spectrum = np.linspace(0.0, 0.93, 16)
    value, _ = entangled_optimum(HermitianOperator((u * spectrum) @ u.conj().T))
    assert abs(value - 0.93) < 1e-10


def test_degenerate_tie_break_is_basis_independent():
    rng = np.random.default_rng(1)
    u = _random_unitary(rng, 3)
    # top eigenspace spanned by |0>, |1>; any rotation of that span gives the same pick
    m = np.diag([1.0, 1.0, 0.2])
    _, v1 = top_eigenpair(m)
    block = np.eye(3, dtype=complex)
    block[:2, :2] = u[:2, :2] / np.linalg.norm(u[:2, :2], axis=0)
    q, _ = np.linalg.qr(block)
    _, v2 = top_eigenpair(q @ m @ q.conj().T)
    assert np.allclose(v1, [1, 0, 0]) and np.allclose(v2, [1, 0, 0])


def test_reduced_operator_examples():
    rng = np.random.default_rng(2)
    a1, a2 = _random_psd(rng, 4), _random_psd(rng, 4)
    a = HermitianOperator(np.kron(a1.entries, a2.entries))
    lam2, v2 = top_eigenpair(a2.entries)
    m = reduced_operator(a, Statevector.from_array(v2), "fix-second")
    assert np.allclose(m.entries, lam2 * a1.entries, atol=1e-10)

    f = random_state(2, rng)
    assert np.allclose(reduced_operator(HermitianOperator(np.eye(16)), f, "fix-first").entries, np.eye(4))
    with pytest.raises(InputError):
        reduced_operator(a, random_state(1, rng), "fix-first", dims=(4, 4))
    with pytest.raises(InputError):
        reduced_operator(a, f, "sideways")


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_reduced_operator_matches_expectation(seed):
    rng = np.random.default_rng(seed)
    a = _random_psd(rng, 16)
    f, u = random_state(2, rng), random_state(2, rng)
    m2 = reduced_operator(a, f, "fix-first")
    m1 = reduced_operator(a, f, "fix-second")
    assert np.max(np.abs(m1.entries - m1.entries.conj().T)) < 1e-12
    assert abs(m2.expectation(u) - product_value(a, f, u)) < 1e-12
    assert abs(m1.expectation(u) - product_value(a, u, f)) < 1e-12


def test_seesaw_separable():
    rng = np.random.default_rng(3)
    a1, a2 = _random_psd(rng, 4, 0.9), _random_psd(rng, 4, 0.7)
    a = HermitianOperator(np.kron(a1.entries, a2.entries))
    pw = seesaw_optimize(a, 2)
    assert abs(pw.value - 0.9 * 0.7) < 1e-8
    assert pw.iterations <= 3


def test_seesaw_deterministic_acceptor():
    c, _ = deterministic_acceptor(RegisterLayout(1, 1, 1), np.random.default_rng(0))
    assert abs(seesaw_optimize(acceptance_operator(c), 1).value - 1.0) < 1e-12


def test_seesaw_against_brute_force():
    rng = np.random.default_rng(4)
    a = _random_psd(rng, 16)
    sw = seesaw_optimize(a, 2)
    ent, _ = entangled_optimum(a)
    rs = random_product_search(a, 2, 100_000, seed=1)
    assert sw.value <= ent + 1e-12
    assert sw.value >= rs.value - 1e-6


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=3))
def test_sandwich_and_monotone(seed, w):
    rng = np.random.default_rng(seed)
    a = _random_psd(rng, 1 << (2 * w))
    sw = seesaw_optimize(a, w, seed=seed)
    ent, _ = entangled_optimum(a)
    rs = random_product_search(a, w, 500, seed=seed)
    assert rs.value <= sw.value + 1e-6 <= ent + 2e-6
    assert all(b >= x - 1e-12 for x, b in zip(sw.iterates, sw.iterates[1:]))
    assert abs(sw.value - product_value(a, sw.psi1, sw.psi2)) < 1e-10


def test_seesaw_unequal_registers():
    rng = np.random.default_rng(5)
    a1, a2 = _random_psd(rng, 2), _random_psd(rng, 8)
    a = HermitianOperator(np.kron(a1.entries, a2.entries))
    pw = seesaw_optimize(a, (1, 3))
    assert pw.psi1.n_qubits == 1 and pw.psi2.n_qubits == 3
    assert abs(pw.value - 1.0) < 1e-8


def test_bell_projector_gap():
    a = acceptance_operator(bell_projector_circuit())
    ent, _ = entangled_optimum(a)
    assert abs(ent - 1) < 1e-12
    assert abs(seesaw_optimize(a, 1).value - 0.5) < 1e-6


def test_random_search_examples():
    assert random_product_search(HermitianOperator(np.eye(4)), 1, 10, seed=0).value == pytest.approx(1.0)
    assert random_product_search(HermitianOperator(np.zeros((4, 4))), 1, 10, seed=0).value == 0.0
    a = _random_psd(np.random.default_rng(6), 16)
    r1 = random_product_search(a, 2, 3000, seed=9)
    r2 = random_product_search(a, 2, 3000, seed=9)
    assert r1.value == r2.value
    assert np.array_equal(r1.psi1.amplitudes, r2.psi1.amplitudes)
    assert np.array_equal(r1.psi2.amplitudes, r2.psi2.amplitudes)
    with pytest.raises(InputError):
        random_product_search(a, 2, 0, seed=0)


def test_seesaw_is_deterministic():
    a = _random_psd(np.random.default_rng(7), 64)
    p1, p2 = seesaw_optimize(a, 3, seed=11), seesaw_optimize(a, 3, seed=11)
    assert p1.value == p2.value and p1.iterates == p2.iterates
    assert np.array_equal(p1.psi1.amplitudes, p2.psi1.amplitudes)


def test_thresholds_validation():
    with pytest.raises(InputError):
        DecisionThresholds(c=0.8, s=0.8)
    with pytest.raises(InputError):
        DecisionThresholds(c=0.0, s=0.0)
    with pytest.raises(InputError):
        DecisionThresholds(c=1.0, s=0.9995)


def test_decide_examples():
    th = DecisionThresholds(1.0, 0.75)
    c, _ = deterministic_acceptor(RegisterLayout(1, 1, 1), np.random.default_rng(0))
    assert decide(c, th) is Verdict.ACCEPT
    c, _ = deterministic_rejector()
    assert decide(c, th) is Verdict.REJECT
    ev = decide_with_evidence(cheating_circuit(), th, SeesawBudget(seed=3))
    assert ev.verdict is Verdict.INDETERMINATE
    assert abs(ev.entangled_value - 0.9) < 1e-12
    assert abs(ev.product_value - 0.5) < 1e-6


def test_cheating_circuit_operator():
    a = acceptance_operator(cheating_circuit()).entries
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert np.allclose(a, 0.1 * np.eye(4) + 0.8 * np.outer(bell, bell), atol=1e-12)
