"""Statevector simulation of postselection gadgets for two-witness verifiers."""

from .errors import CapacityError, InputError, NullPostselectionError, ParseError, SimulationError
from .gadget import GadgetOutcome, GadgetParams, decompose, pad_completeness, amplify_by_repetition, predict_gadget, run_gadget, sweep
from .legacy import TruthTable, run_aaronson_pp, run_mn_protocol
from .statevec import Circuit, RegisterLayout, Statevector, acceptance_operator, apply_circuit, gate, make_circuit
from .witness import DecisionThresholds, Verdict, decide, seesaw_optimize

__version__ = "0.1.0"
