import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from postsel.errors import CapacityError, InputError, NullPostselectionError
from postsel.instances import identity_acceptor, ry_on_output
from postsel.legacy import (
    PP_THRESHOLD,
    ControlRatio,
    TruthTable,
    comparator_gadget,
    compile_table,
    mn_witness,
    plus_fidelity,
    postselected_target,
    run_aaronson_pp,
    run_mn_protocol,
    target_state,
)
from postsel.statevec import (
    Circuit,
    RegisterLayout,
    Statevector,
    acceptance_operator,
    apply_circuit,
    new_basis_state,
    random_circuit,
    random_state,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _non_tie_tables(n):
    for outs in itertools.product((0, 1), repeat=1 << n):
        if 2 * sum(outs) != 1 << n:
            yield TruthTable(n, outs)


def test_truth_table_validation():
    with pytest.raises(InputError):
        TruthTable(2, (1, 0, 1))
    with pytest.raises(InputError):
        TruthTable(1, (0, 2))
    with pytest.raises(InputError):
        TruthTable(0, (1,))
    with pytest.raises(InputError):
        TruthTable(2, (1, 1, 0, 0)).majority()


def test_control_ratio():
    c = ControlRatio.from_exponent(3)
    assert abs(c.beta / c.alpha - 8) < 1e-12
    with pytest.raises(InputError):
        ControlRatio(0.5, 0.5)


def test_compiled_table_computes_outputs():
    table = TruthTable(3, (0, 1, 1, 0, 1, 0, 0, 1))
    rev = compile_table(table)
    n = 3
    for r in range(1 << n):
        start = new_basis_state(2 * n, r << n)
        out = apply_circuit(apply_circuit(start, rev.compute), rev.erase)
        idx = int(np.argmax(np.abs(out.amplitudes)))
        assert abs(out.amplitudes[idx]) == pytest.approx(1.0)
        assert idx >> n == r and (idx >> (n - 1)) & 1 == table.outputs[r]
        assert idx & ((1 << (n - 1)) - 1) == 0  # work register clean


def test_compile_capacity():
    with pytest.raises(CapacityError):
        compile_table(TruthTable(12, (1,) * 4096))


def test_target_state_amplitudes():
    table = TruthTable(2, (1, 1, 1, 0))
    t = target_state(table)
    assert np.allclose(t.amplitudes, np.array([1, 3]) / math.sqrt(10))
    prob, _ = postselected_target(table)
    # post-Hadamard amplitudes are (#rej, #acc) / 2^n
    assert prob == pytest.approx((1 + 9) / 16)


def test_unerased_garbage_spoils_target():
    table = TruthTable(3, (1, 0, 0, 1, 1, 1, 0, 1))
    _, rest = postselected_target(table, erase_garbage=False)
    rho = rest @ rest.conj().T
    rho /= np.trace(rho)
    assert np.trace(rho @ rho).real < 1 - 1e-3
    _, rest = postselected_target(table)
    assert np.abs(rest[:, 1:]).max() < 1e-12


def test_comparator_examples():
    prob, ctrl = comparator_gadget(Statevector(1, [0, 1]), ControlRatio(1.0, 0.0))
    assert prob == pytest.approx(1.0) and ctrl.allclose(Statevector(1, [1, 0]))
    with pytest.raises(NullPostselectionError):
        comparator_gadget(Statevector(1, [2**-0.5, 2**-0.5]), ControlRatio(0.0, 1.0))
    a, b = math.sqrt(0.25), math.sqrt(0.75)
    _, ctrl = comparator_gadget(Statevector(1, [a, b]), ControlRatio(2**-0.5, 2**-0.5))
    expect = np.array([b, (a - b) / math.sqrt(2)])
    expect /= np.linalg.norm(expect)
    assert ctrl.allclose(Statevector(1, expect), atol=1e-12)
    assert plus_fidelity(ctrl) == pytest.approx(abs(expect.sum()) ** 2 / 2, abs=1e-12)


def test_comparator_rejects_bad_target():
    with pytest.raises(InputError):
        comparator_gadget(Statevector(1, [2**-0.5, -(2**-0.5)]), ControlRatio(1.0, 0.0))
    with pytest.raises(InputError):
        comparator_gadget(random_state(2, np.random.default_rng(0)), ControlRatio(1.0, 0.0))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, math.pi / 2 - 0.01), st.floats(0.01, math.pi / 2 - 0.01))
def test_comparator_closed_form(phi, chi):
    a, b = math.cos(phi), math.sin(phi)
    alpha, beta = math.cos(chi), math.sin(chi)
    prob, ctrl = comparator_gadget(Statevector(1, [a, b]), ControlRatio(alpha, beta))
    expect = np.array([alpha * b, beta * (a - b) / math.sqrt(2)])
    assert prob == pytest.approx(float(expect @ expect), abs=1e-12)
    expect /= np.linalg.norm(expect)
    assert ctrl.allclose(Statevector(1, expect), atol=1e-12)


def test_pp_examples():
    assert run_aaronson_pp(TruthTable(2, (1, 1, 1, 0))).decision == "majority-accept"
    assert run_aaronson_pp(TruthTable(2, (0, 0, 0, 0))).decision == "majority-reject"
    with pytest.raises(InputError):
        run_aaronson_pp(TruthTable(2, (0, 1, 1, 0)))


def test_pp_report_shape():
    res = run_aaronson_pp(TruthTable(1, (1, 1)))
    d = res.as_dict()
    assert set(d) == {"decision", "sweep"}
    assert [p["exponent"] for p in d["sweep"]] == list(range(-3, 4))


def test_pp_exhaustive_small():
    for n in (1, 2, 3):
        for table in _non_tie_tables(n):
            assert run_aaronson_pp(table).decision == table.majority()


def test_pp_threshold_calibration():
    # frozen value = min over n <= 3 majority-reject tables of the sweep maximum, minus 1e-6;
    # every majority-accept table must stay strictly below it
    reject_min, accept_max = 1.0, 0.0
    for n in (1, 2, 3):
        for table in _non_tie_tables(n):
            best = run_aaronson_pp(table).max_fidelity
            if table.majority() == "majority-reject":
                reject_min = min(reject_min, best)
            else:
                accept_max = max(accept_max, best)
    assert round(reject_min - 1e-6, 6) == PP_THRESHOLD
    assert accept_max < PP_THRESHOLD < reject_min


@pytest.mark.parametrize("n", [4, 6, 8])
def test_pp_random_tables(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        outs = rng.integers(0, 2, size=1 << n)
        if 2 * outs.sum() == 1 << n:
            outs[0] ^= 1
        table = TruthTable(n, outs)
        assert run_aaronson_pp(table).decision == table.majority()


def test_mn_witness_examples():
    c, w = identity_acceptor()
    lam, v = mn_witness(c)
    assert lam == pytest.approx(1.0) and abs(abs(v.inner(w)) - 1) < 1e-12
    lam, _ = mn_witness(ry_on_output(math.pi / 2, on_ancilla=True))
    assert abs(lam - 0.5) < 1e-12
    with pytest.raises(InputError):
        mn_witness(Circuit(RegisterLayout(0, 0, 2)))


def test_mn_witness_eigen_residual():
    rng = np.random.default_rng(8)
    c = random_circuit(RegisterLayout(2, 2, 2), 40, rng)
    lam, v = mn_witness(c)
    m = acceptance_operator(c).entries
    assert np.linalg.norm(m @ v.amplitudes - lam * v.amplitudes) < 1e-9


def test_mn_identity_acceptor():
    c, w = identity_acceptor()
    res = run_mn_protocol(c, w)
    assert res.p_post == 1.0
    assert res.indicator_state.allclose(Statevector(1, [0, 1]))


def test_mn_half_eigenvalue():
    c = ry_on_output(math.pi / 2, on_ancilla=True)
    lam, v = mn_witness(c)
    res = run_mn_protocol(c, v)
    assert abs(res.one_weight - 0.5) < 1e-9
    assert abs(res.purity - 1) < 1e-9


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_mn_eigenvector_purity(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(RegisterLayout(1, 1, 2), 30, rng, output_qubit=int(rng.integers(4)))
    lam, v = mn_witness(c)
    if lam < 1e-6:
        return
    res = run_mn_protocol(c, v)
    assert abs(res.purity - 1) < 1e-9
    assert abs(res.one_amplitude_share - lam) < 1e-9
    # the Born weight of |1> is lam^2 / (lam^2 + (1 - lam)^2), not lam
    assert abs(res.one_weight - lam**2 / (lam**2 + (1 - lam) ** 2)) < 1e-9


def test_mn_non_eigenvector_is_mixed():
    rng = np.random.default_rng(12)
    c = random_circuit(RegisterLayout(2, 1, 2), 40, rng)
    res = run_mn_protocol(c, random_state(3, rng))
    assert res.purity < 1 - 1e-6
