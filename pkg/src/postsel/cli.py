"""Command-line front end: ``postsel <command> ...``.

Exit status: 0 success, 1 invalid configuration or I/O failure, 2 parse
error in an input file, 3 numeric failure (null postselection, capacity).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import CapacityError, InputError, NullPostselectionError, ParseError
from .formats import load_circuit, load_state, parse_truth_table
from .gadget import OUTCOME_COLUMNS, GadgetOutcome, GadgetParams, decompose, run_gadget, sweep
from .legacy import TruthTable, mn_witness, run_aaronson_pp, run_mn_protocol
from .statevec import Circuit, Statevector, acceptance_operator, new_basis_state, prepare_input
from .witness import (
    DecisionThresholds,
    SeesawBudget,
    decide_with_evidence,
    entangled_optimum,
    random_product_search,
    seesaw_optimize,
)

SCHEMA_VERSION = "1"
COMMANDS = ("decompose", "gadget", "sweep", "optimize", "decide", "pp", "mn", "suite")

EXIT_OK, EXIT_CONFIG, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class ExperimentConfig:
    command: str
    circuit_path: str | None = None
    state_path: str | None = None
    basis: int | None = None
    table_path: str | None = None
    params: dict = field(default_factory=dict)
    output_path: str | None = None
    format: str = "json"
    seed: int = 0

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise InputError(f"unknown format {self.format!r}")
        needs_circuit = self.command in ("decompose", "gadget", "sweep", "optimize", "decide", "mn")
        if needs_circuit and not self.circuit_path:
            raise InputError(f"{self.command} needs --circuit")
        if self.command in ("decompose", "gadget", "sweep") and self.state_path is None and self.basis is None:
            raise InputError(f"{self.command} needs --witness or --basis")
        if self.command == "pp" and not self.table_path:
            raise InputError("pp needs --table")
        if self.command == "sweep" and not self.output_path:
            raise InputError("sweep needs --out")
        for path in (self.circuit_path, self.state_path, self.table_path):
            if path is not None and not Path(path).is_file():
                raise InputError(f"no such file: {path}")


class _FileParseError(Exception):
    def __init__(self, path, err: ParseError):
        self.path, self.err = path, err
        super().__init__(f"{path}:{err.line}:{err.column}: {err.message}")


def _load(loader, path, *args):
    try:
        return loader(path, *args)
    except ParseError as exc:
        raise _FileParseError(path, exc) from exc


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------


def write_atomic(path, text: str) -> None:
    """Write via a temp file in the target directory and rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _g17(x) -> str:
    return x if isinstance(x, str) else f"{float(x):.17g}"


def format_table(outcomes, fmt: str) -> str:
    outcomes = list(outcomes)
    if not outcomes:
        raise InputError("no outcomes to emit")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(OUTCOME_COLUMNS)
        for o in outcomes:
            writer.writerow([_g17(v) for v in o.row()])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([{c: v for c, v in zip(OUTCOME_COLUMNS, o.row())} for o in outcomes], indent=2) + "\n"
    raise InputError(f"unknown format {fmt!r}")


def emit_table(outcomes, fmt: str, path) -> None:
    write_atomic(path, format_table(outcomes, fmt))


def read_table(path, fmt: str) -> list[GadgetOutcome]:
    text = Path(path).read_text(encoding="utf-8")
    if fmt == "json":
        rows = json.loads(text)
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    return [
        GadgetOutcome(**{c: (r[c] if c == "variant" else float(r[c])) for c in OUTCOME_COLUMNS}) for r in rows
    ]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, Statevector):
        return _jsonable(obj.amplitudes)
    return obj


# --------------------------------------------------------------------------
# Dispatch
# --------------------------------------------------------------------------


def _input_state(circuit: Circuit, cfg: ExperimentConfig) -> Statevector:
    lay = circuit.layout
    if cfg.state_path is not None:
        state = _load(load_state, cfg.state_path)
    else:
        state = new_basis_state(lay.witness_qubits or lay.n_qubits, cfg.basis)
    if state.n_qubits == circuit.n_qubits:
        return state
    if state.n_qubits == lay.witness_qubits:
        return prepare_input(circuit, state)
    raise InputError(
        f"witness has {state.n_qubits} qubits; expected {lay.witness_qubits} (witness) or {circuit.n_qubits} (full)"
    )


def _gadget_params(p: dict) -> GadgetParams:
    variant = {"1": "protocol1", "3": "protocol3"}.get(str(p.get("variant", "1")), p.get("variant"))
    if p.get("rotation") is not None:
        return GadgetParams(variant=variant, rotation=float(p["rotation"]))
    return GadgetParams(variant=variant, r_exponent=int(p.get("r") or 1))


def _results(cfg: ExperimentConfig, log) -> object:
    p = cfg.params
    circuit = _load(load_circuit, cfg.circuit_path) if cfg.circuit_path else None
    table = None
    if cfg.table_path:
        text = Path(cfg.table_path).read_text(encoding="utf-8")
        try:
            n, outs = parse_truth_table(text)
        except ParseError as exc:
            raise _FileParseError(cfg.table_path, exc) from exc
        table = TruthTable(n, outs)
    state = _input_state(circuit, cfg) if cfg.command in ("decompose", "gadget", "sweep") else None
    witness = _load(load_state, cfg.state_path) if cfg.command == "mn" and cfg.state_path else None

    if cfg.command == "decompose":
        d = decompose(circuit, state)
        return {
            "p_x": d.p_x,
            "completeness_error": d.completeness_error,
            "residual_f1": d.residual_f1,
            "residual_f0": d.residual_f0,
            "perp_overlap": d.perp_overlap,
            "f1_overlap": d.f1_overlap,
            "perp_state": None if d.perp_state is None else d.perp_state,
        }
    if cfg.command == "gadget":
        return run_gadget(circuit, state, _gadget_params(p)).as_dict()
    if cfg.command == "sweep":
        variant = _gadget_params(p).variant
        rotations = [float(x) for x in str(p["rotations"]).split(",") if x.strip()]
        outcomes = sweep(circuit, state, [GadgetParams(variant=variant, rotation=t) for t in rotations])
        emit_table(outcomes, cfg.format, cfg.output_path)
        return [o.as_dict() for o in outcomes]
    if cfg.command == "optimize":
        a = acceptance_operator(circuit)
        lay = circuit.layout
        if not (lay.witness1 and lay.witness2):
            raise InputError("optimize needs two nonempty witness registers")
        w = (lay.witness1, lay.witness2)
        if p.get("method", "seesaw") == "random":
            pw = random_product_search(a, w, int(p.get("samples") or 10000), cfg.seed)
        else:
            pw = seesaw_optimize(
                a, w, max_iters=int(p.get("iters") or 500), tol=float(p.get("tol") or 1e-10), seed=cfg.seed
            )
        ent, _ = entangled_optimum(a)
        return {**pw.as_dict(), "entangled_optimum": ent}
    if cfg.command == "decide":
        th = DecisionThresholds(float(p.get("c", 1.0)), float(p.get("s", 0.75)), float(p.get("gap_floor") or 1e-3))
        budget = SeesawBudget(int(p.get("iters") or 500), float(p.get("tol") or 1e-10), seed=cfg.seed)
        ev = decide_with_evidence(circuit, th, budget)
        return {"decision": ev.verdict.value, "product_value": ev.product_value, "entangled_value": ev.entangled_value}
    if cfg.command == "pp":
        return run_aaronson_pp(table).as_dict()
    if cfg.command == "mn":
        lam, eig = mn_witness(circuit)
        res = run_mn_protocol(circuit, witness if witness is not None else eig)
        return {
            "eigenvalue": lam,
            "witness_is_eigenvector": witness is None,
            "p_post": res.p_post,
            "purity": res.purity,
            "one_weight": res.one_weight,
            "one_amplitude_share": res.one_amplitude_share,
            "indicator_density": res.density,
        }
    if cfg.command == "suite":
        from .acceptance import run_suite

        results = run_suite(cfg.seed, log=log)
        return {"all_passed": all(r.passed for r in results), "criteria": [r.as_dict() for r in results]}
    raise InputError(f"unknown command {cfg.command!r}")


def run(config: ExperimentConfig, log=None) -> dict:
    """Validate, dispatch, and return the report (nothing is written here)."""
    config.validate()
    t0 = time.perf_counter()
    results = _results(config, log)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": asdict(config),
        "results": _jsonable(results),
        "timing": {"wall_seconds": time.perf_counter() - t0},
        "seed": config.seed,
    }


# --------------------------------------------------------------------------
# argparse
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="postsel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, out_help="write the JSON report here instead of stdout"):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help=out_help)
        return sp

    def witness_args(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--witness", help="state file (witness register or full input)")
        g.add_argument("--basis", type=int, help="basis index of the witness register; ancillas start at 0")

    sp = common(sub.add_parser("decompose", help="amplitude decomposition around Q, copy, Q^-1"))
    sp.add_argument("--circuit", required=True)
    witness_args(sp)

    sp = common(sub.add_parser("gadget", help="run the postselection gadget once"))
    sp.add_argument("--circuit", required=True)
    witness_args(sp)
    sp.add_argument("--variant", choices=("1", "3"), default="1")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--rotation", type=float)
    g.add_argument("--r", type=int, help="rotation = 2^(-10 r)")

    sp = common(sub.add_parser("sweep", help="gadget over a list of rotations"), "table output file")
    sp.add_argument("--circuit", required=True)
    witness_args(sp)
    sp.add_argument("--variant", choices=("1", "3"), default="1")
    sp.add_argument("--rotations", required=True, help="comma-separated rotation values")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = common(sub.add_parser("optimize", help="best product witness for the acceptance operator"))
    sp.add_argument("--circuit", required=True)
    sp.add_argument("--method", choices=("seesaw", "random"), default="seesaw")
    sp.add_argument("--iters", type=int, default=500)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--samples", type=int, default=10000)

    sp = common(sub.add_parser("decide", help="three-way accept/reject/indeterminate decision"))
    sp.add_argument("--circuit", required=True)
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--s", type=float, default=0.75)
    sp.add_argument("--gap-floor", type=float, default=1e-3)

    sp = common(sub.add_parser("pp", help="majority detection on a truth-table file"))
    sp.add_argument("--table", required=True)

    sp = common(sub.add_parser("mn", help="eigenvector-witness indicator protocol"))
    sp.add_argument("--circuit", required=True)
    sp.add_argument("--witness", help="witness-register state file (default: top eigenvector)")

    sp = common(sub.add_parser("suite", help="run the acceptance battery"), "directory for report.json")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    ns = vars(args).copy()
    keys = ("variant", "rotation", "r", "rotations", "method", "iters", "tol", "samples", "c", "s", "gap_floor")
    params = {k: ns[k] for k in keys if ns.get(k) is not None}
    return ExperimentConfig(
        command=args.command,
        circuit_path=ns.get("circuit"),
        state_path=ns.get("witness"),
        basis=ns.get("basis"),
        table_path=ns.get("table"),
        params=params,
        output_path=ns.get("out"),
        format=ns.get("format") or "json",
        seed=ns.get("seed", 0),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)

    def log(line):
        print(line, file=sys.stderr)

    try:
        report = run(cfg, log=log)
        text = json.dumps(report, indent=2) + "\n"
        if cfg.command == "suite" and cfg.output_path:
            out_dir = Path(cfg.output_path)
            out_dir.mkdir(parents=True, exist_ok=True)
            write_atomic(out_dir / "report.json", text)
        elif cfg.output_path and cfg.command != "sweep":
            write_atomic(cfg.output_path, text)
        else:
            sys.stdout.write(text)
    except _FileParseError as exc:
        log(f"parse error: {exc}")
        return EXIT_PARSE
    except (NullPostselectionError, CapacityError) as exc:
        log(f"numeric failure in {cfg.command}: {exc}")
        return EXIT_NUMERIC
    except (InputError, OSError) as exc:
        log(f"error: {exc}")
        return EXIT_CONFIG
    if cfg.command == "suite" and not report["results"]["all_passed"]:
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
