"""Optimization of acceptance operators over unentangled two-register witnesses."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .rng import substream
from .statevec import Circuit, HermitianOperator, Statevector, acceptance_operator

EIG_DEGENERACY_TOL = 1e-12
DECISION_TOL = 1e-9


def top_eigenpair(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue of a Hermitian matrix and a unit eigenvector.

    Degenerate top eigenspaces resolve to the normalized projection of the
    lowest-index basis vector with nonzero overlap, which does not depend on
    the basis LAPACK happens to return.
    """
    m = np.asarray(matrix, dtype=complex)
    w, v = np.linalg.eigh(m)
    top = w[-1]
    space = v[:, w >= top - EIG_DEGENERACY_TOL * max(1.0, abs(top))]
    proj_rows = space @ space.conj().T
    norms = np.real(np.diag(proj_rows))
    k = int(np.argmax(norms > 1e-8))
    vec = proj_rows[:, k] / math.sqrt(norms[k])
    value = float(np.vdot(vec, m @ vec).real)
    return value, vec


@dataclass(frozen=True, eq=False)
class ProductWitness:
    psi1: Statevector
    psi2: Statevector
    value: float
    iterates: tuple = ()

    @property
    def iterations(self) -> int:
        return max(len(self.iterates) - 1, 0)

    def product_state(self) -> Statevector:
        return self.psi1.tensor(self.psi2)

    def as_dict(self) -> dict:
        def amps(s):
            return [[float(a.real), float(a.imag)] for a in s.amplitudes]

        return {"value": self.value, "iterations": self.iterations, "psi1": amps(self.psi1), "psi2": amps(self.psi2)}


@dataclass(frozen=True)
class DecisionThresholds:
    c: float = 1.0
    s: float = 0.75
    gap_floor: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.c <= 1.0:
            raise InputError(f"completeness threshold c must lie in (0, 1], got {self.c!r}")
        if not 0.0 <= self.s < 1.0:
            raise InputError(f"soundness threshold s must lie in [0, 1), got {self.s!r}")
        if self.gap_floor <= 0 or self.c - self.s < self.gap_floor:
            raise InputError(f"c - s = {self.c - self.s!r} is below the gap floor {self.gap_floor!r}")


@dataclass(frozen=True)
class SeesawBudget:
    max_iters: int = 500
    tol: float = 1e-10
    restarts: int = 8
    seed: int = 0


class Verdict(str, enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    INDETERMINATE = "indeterminate"


def _split(a: HermitianOperator, dims) -> tuple[int, int]:
    if dims is None:
        d = math.isqrt(a.dim)
        if d * d != a.dim:
            raise InputError(f"operator dimension {a.dim} is not a square; pass dims explicitly")
        return d, d
    d1, d2 = dims
    if d1 * d2 != a.dim:
        raise InputError(f"dims {dims} do not factor operator dimension {a.dim}")
    return d1, d2


def _dims_for(a: HermitianOperator, w) -> tuple[int, int]:
    if isinstance(w, tuple):
        return _split(a, (1 << w[0], 1 << w[1]))
    d = 1 << w
    if d * d != a.dim:
        raise InputError(f"operator dimension {a.dim} does not match two {w}-qubit registers")
    return d, d


def entangled_optimum(a: HermitianOperator) -> tuple[float, Statevector]:
    value, vec = top_eigenpair(a.entries)
    return value, Statevector.from_array(vec, normalize=True)


def reduced_operator(a: HermitianOperator, fixed: Statevector, side: str, dims=None) -> HermitianOperator:
    """Contract one tensor factor of ``a`` against ``fixed``.

    ``side="fix-second"`` returns M on register 1 with <u|M|u> = <u,f|A|u,f>;
    ``side="fix-first"`` returns M on register 2 with <u|M|u> = <f,u|A|f,u>.
    """
    if dims is None:
        dims = (a.dim // fixed.dim, fixed.dim) if side == "fix-second" else (fixed.dim, a.dim // fixed.dim)
    d1, d2 = _split(a, dims)
    t = a.entries.reshape(d1, d2, d1, d2)
    f = fixed.amplitudes
    if side == "fix-second":
        if f.shape[0] != d2:
            raise InputError(f"fixed state has dimension {f.shape[0]}, register 2 has {d2}")
        m = np.einsum("j,ijkl,l->ik", f.conj(), t, f)
    elif side == "fix-first":
        if f.shape[0] != d1:
            raise InputError(f"fixed state has dimension {f.shape[0]}, register 1 has {d1}")
        m = np.einsum("i,ijkl,k->jl", f.conj(), t, f)
    else:
        raise InputError(f"side must be 'fix-first' or 'fix-second', got {side!r}")
    return HermitianOperator(0.5 * (m + m.conj().T))


def product_value(a: HermitianOperator, psi1: Statevector, psi2: Statevector) -> float:
    return a.expectation(np.kron(psi1.amplitudes, psi2.amplitudes))


def _ascend(a: HermitianOperator, dims, psi1: np.ndarray, psi2: np.ndarray, max_iters: int, tol: float):
    d1, d2 = dims
    t = a.entries.reshape(d1, d2, d1, d2)

    def value(x, y):
        v = np.kron(x, y)
        return float(np.vdot(v, a.entries @ v).real)

    trace = [value(psi1, psi2)]
    for _ in range(max_iters):
        m1 = np.einsum("j,ijkl,l->ik", psi2.conj(), t, psi2)
        _, psi1 = top_eigenpair(0.5 * (m1 + m1.conj().T))
        m2 = np.einsum("i,ijkl,k->jl", psi1.conj(), t, psi1)
        _, psi2 = top_eigenpair(0.5 * (m2 + m2.conj().T))
        trace.append(value(psi1, psi2))
        if trace[-1] - trace[-2] < tol:
            break
    return psi1, psi2, trace


def _random_unit(rng: np.random.Generator, d: int, count: int | None = None) -> np.ndarray:
    shape = (d,) if count is None else (count, d)
    v = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _marginal_init(a: HermitianOperator, dims) -> tuple[np.ndarray, np.ndarray]:
    d1, d2 = dims
    _, vec = top_eigenpair(a.entries)
    mat = vec.reshape(d1, d2)
    _, x = top_eigenpair(mat @ mat.conj().T)
    _, y = top_eigenpair(mat.T @ mat.conj())
    return x, y


def seesaw_optimize(
    a: HermitianOperator,
    w,
    init: ProductWitness | None = None,
    max_iters: int = 500,
    tol: float = 1e-10,
    restarts: int = 8,
    seed: int = 0,
) -> ProductWitness:
    """Alternating top-eigenvector ascent over psi1 (x) psi2.

    ``w`` is the per-register qubit count, or a ``(w1, w2)`` pair.  Without
    ``init`` the first start is the pair of top eigenvectors of the entangled
    optimum's reduced states, followed by ``restarts`` seeded random starts;
    the best run wins, ties going to the earliest start.
    """
    dims = _dims_for(a, w)
    if init is not None:
        starts = [(init.psi1.amplitudes.copy(), init.psi2.amplitudes.copy())]
    else:
        starts = [_marginal_init(a, dims)]
        rng = substream(seed, "seesaw", 0)
        starts += [(_random_unit(rng, dims[0]), _random_unit(rng, dims[1])) for _ in range(restarts)]

    best = None
    for x0, y0 in starts:
        x, y, trace = _ascend(a, dims, x0, y0, max_iters, tol)
        if best is None or trace[-1] > best[2][-1]:
            best = (x, y, trace)
    x, y, trace = best
    return ProductWitness(
        Statevector.from_array(x, normalize=True),
        Statevector.from_array(y, normalize=True),
        trace[-1],
        tuple(trace),
    )


def random_product_search(a: HermitianOperator, w, samples: int, seed: int, chunk: int = 4096) -> ProductWitness:
    """Best of ``samples`` Haar-random product pairs drawn from ``default_rng(seed)``."""
    if samples < 1:
        raise InputError("samples must be positive")
    d1, d2 = _dims_for(a, w)
    rng = np.random.default_rng(seed)
    best_val, best_pair = -np.inf, None
    done = 0
    while done < samples:
        count = min(chunk, samples - done)
        xs = _random_unit(rng, d1, count)
        ys = _random_unit(rng, d2, count)
        vs = (xs[:, :, None] * ys[:, None, :]).reshape(count, d1 * d2)
        vals = np.einsum("bi,ij,bj->b", vs.conj(), a.entries, vs).real
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_pair = float(vals[i]), (xs[i], ys[i])
        done += count
    x, y = best_pair
    return ProductWitness(
        Statevector.from_array(x, normalize=True), Statevector.from_array(y, normalize=True), best_val, (best_val,)
    )


@dataclass(frozen=True)
class DecisionEvidence:
    verdict: Verdict
    product_value: float
    entangled_value: float
    witness: ProductWitness | None = field(default=None, compare=False)


def decide_with_evidence(
    circuit: Circuit, thresholds: DecisionThresholds, budget: SeesawBudget = SeesawBudget()
) -> DecisionEvidence:
    lay = circuit.layout
    a = acceptance_operator(circuit)
    ent, _ = entangled_optimum(a)
    witness = None
    if lay.witness1 and lay.witness2:
        witness = seesaw_optimize(
            a, (lay.witness1, lay.witness2), None, budget.max_iters, budget.tol, budget.restarts, budget.seed
        )
        prod = witness.value
    else:
        # one register is empty: every witness is a product
        prod = ent
    if prod >= thresholds.c - DECISION_TOL:
        verdict = Verdict.ACCEPT
    elif ent < thresholds.s + DECISION_TOL:
        verdict = Verdict.REJECT
    else:
        verdict = Verdict.INDETERMINATE
    return DecisionEvidence(verdict, prod, ent, witness)


def decide(circuit: Circuit, thresholds: DecisionThresholds, budget: SeesawBudget = SeesawBudget()) -> Verdict:
    return decide_with_evidence(circuit, thresholds, budget).verdict
