"""``pctc-lab``: run circuit files under either loop semantics, or the packaged experiments.

Exit codes: 0 success, 2 bad input, 3 a claim check failed under ``experiment --check``.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import tolerances as tol
from .circuit import Circuit, CircuitError, check
from .deutsch import circuit_deutsch, fixed_points, von_neumann_entropy
from .experiments import EXPERIMENTS, DEFAULT_SEED, build_copy_interaction, build_fig1a, build_fig1b_cnot
from .experiments import build_fig1b_copy, build_grandfather, evaluate, run_experiment, jsonable
from .pctc import EntangledResidueError, loop_operator, run_postselected
from .serialization import CircuitParseError, parse_circuit

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 2, 3
_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


class InputError(Exception):
    """Bad invocation or unreadable input; ``detail`` goes on following stderr lines."""

    def __init__(self, reason: str, detail: list[str] | None = None):
        super().__init__(reason)
        self.detail = detail or []


@dataclass(frozen=True)
class CliConfig:
    command: str
    input: str | None = None
    semantics: str = "pctc"
    epsilon: float = tol.ZERO_AMPLITUDE
    probe: str | None = None
    loop: str | None = None
    seed: int = DEFAULT_SEED
    order: str = "pf-first"
    check: bool = False
    format: str = "text"
    output: str | None = None
    experiment: str | None = None
    circuit: str | None = None


# ------------------------------------------------------------------ formatting


def sci(x: float) -> str:
    """Compact scientific notation: 0.0e0, 2.5e-1, 1.0e0."""
    if x == 0:
        return "0.0e0"
    m, e = f"{x:.1e}".split("e")
    return f"{m}e{int(e)}"


def _num(x: float) -> str:
    x = round(float(x), 10) + 0.0
    return f"{x:.6g}"


def _cnum(z: complex) -> str:
    z = complex(z)
    if abs(z.imag) < 1e-10:
        return _num(z.real)
    if abs(z.real) < 1e-10:
        return _num(z.imag) + "j"
    sign = "+" if round(z.imag, 10) >= 0 else "-"
    return f"{_num(z.real)}{sign}{_num(abs(z.imag))}j"


def _pairs(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.ravel(v)]


def _ket_lines(vec: np.ndarray, dims) -> list[str]:
    lines = []
    for k, amp in enumerate(vec):
        if abs(amp) > 1e-12:
            digits = np.unravel_index(k, dims) if dims else ()
            lines.append(f"  |{''.join(str(int(d)) for d in digits)}>  {_cnum(amp)}")
    return lines


def _matrix_lines(m: np.ndarray, indent: str = "  ") -> list[str]:
    cells = [[_cnum(z) for z in row] for row in m]
    width = max(len(c) for row in cells for c in row)
    return [indent + "  ".join(c.rjust(width) for c in row) for row in cells]


def _verdict_lines(verdicts: dict) -> list[str]:
    lines = []
    for name, v in verdicts.items():
        measured = json.dumps(jsonable(v["measured"]), sort_keys=True)
        lines.append(f"  {'PASS' if v['pass'] else 'FAIL'}  {name}  measured={measured}  tolerance={json.dumps(v['tolerance'])}")
    return lines


# ------------------------------------------------------------------ inputs


def _load(path: str) -> Circuit:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        circuit = parse_circuit(text)
        check(circuit)
    except CircuitParseError as exc:
        raise InputError(f"invalid circuit file {path}", [str(exc)]) from None
    except CircuitError as exc:
        raise InputError(
            f"invalid circuit {path}: {len(exc.violations)} violation(s)", [str(v) for v in exc.violations]
        ) from None
    return circuit


def _packaged() -> dict[Circuit, str]:
    known: dict[Circuit, str] = {build_fig1a(1): "fig1a", build_grandfather(): "grandfather"}
    for order in ("pf-first", "cnot-first"):
        for write in ("overwrite", "copy"):
            known[build_fig1b_cnot(write, order)] = "fig1b_cnot"
            for completion in ("rule", "alt"):
                known[build_fig1b_copy(write, order, completion)] = "fig1b_copy"
    known[build_copy_interaction()] = "deutsch_contrast"
    return known


def _single_loop(circuit: Circuit) -> str:
    loops = circuit.loops()
    if len(loops) != 1:
        raise InputError(f"Deutsch semantics needs exactly one loop, circuit has {len(loops)}")
    return next(iter(loops.values()))[0]


# ------------------------------------------------------------------ commands


def _deutsch_report(cfg: CliConfig, circuit: Circuit, loop: str) -> tuple[dict, list[str]]:
    try:
        u, rho_cr, cr = circuit_deutsch(circuit, loop)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    sol = fixed_points(u, rho_cr)
    rho = sol.fixed_state.entries
    doc = {
        "command": cfg.command,
        "semantics": "deutsch",
        "loop": loop,
        "cr_wires": list(cr),
        "fixed_state": [_pairs(row) for row in rho],
        "entropy": von_neumann_entropy(rho),
        "residual": sol.residual,
        "iterations": sol.iterations,
        "multiplicity": sol.multiplicity,
        "selected": sol.selected,
        "converged": sol.converged,
        "method": sol.method,
        "agreement": sol.agreement,
    }
    text = [
        f"DEUTSCH fixed point on {loop} (residual {sci(sol.residual)} ≤ {tol.DEUTSCH_RESIDUAL:g})",
        f"multiplicity {sol.multiplicity}" + (" (maximum-entropy representative)" if sol.selected else ""),
        f"method {sol.method}, iterations {sol.iterations}",
        "density matrix (z basis):",
        *_matrix_lines(rho),
    ]
    return doc, text


def cmd_run(cfg: CliConfig) -> tuple[dict, list[str], bool]:
    circuit = _load(cfg.input)
    if cfg.semantics == "deutsch":
        doc, text = _deutsch_report(cfg, circuit, _single_loop(circuit))
        return doc, text, True
    out = run_postselected(circuit, epsilon=cfg.epsilon)
    doc = {
        "command": "run",
        "semantics": "pctc",
        "weight": out.weight,
        "paradox": out.paradox,
        "epsilon": cfg.epsilon,
        "wires": list(out.wires),
        "state": None if out.state is None else _pairs(out.state.amplitudes),
    }
    if out.paradox:
        text = [f"PARADOX (weight {sci(out.weight)} ≤ {cfg.epsilon:g})"]
    else:
        text = [
            f"CONSISTENT (weight {sci(out.weight)} > {cfg.epsilon:g})",
            f"surviving wires: {' '.join(out.wires)}",
            "normalized state (z basis):",
            *_ket_lines(out.state.amplitudes, out.state.dims),
        ]
    ok = True
    exp = _packaged().get(circuit)
    if exp is not None:
        rep = evaluate(exp, circuit, cfg.seed, epsilon=cfg.epsilon)
        doc["experiment"] = exp
        doc["verdicts"] = rep.verdicts
        text += [f"matches packaged experiment {exp}:", *_verdict_lines(rep.verdicts)]
        ok = rep.passed
    return doc, text, ok


def _loop_analysis(cfg: CliConfig):
    circuit = _load(cfg.input)
    if cfg.probe is None:
        raise InputError("--probe is required")
    if cfg.probe not in circuit.ids:
        raise InputError(f"unknown probe wire {cfg.probe!r}")
    try:
        return loop_operator(circuit, cfg.probe, cfg.epsilon), None
    except EntangledResidueError as exc:
        return None, exc
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _residue_report(cfg: CliConfig, exc: EntangledResidueError) -> tuple[dict, list[str], bool]:
    doc = {
        "command": cfg.command,
        "probe": cfg.probe,
        "classification": "entangled_residue",
        "schmidt_values": [float(s) for s in exc.schmidt_values],
    }
    text = [
        f"ENTANGLED RESIDUE on probe {cfg.probe}: no single-wire loop operator",
        "Schmidt values: " + " ".join(_num(s) for s in exc.schmidt_values),
    ]
    return doc, text, True


def cmd_analyze(cfg: CliConfig) -> tuple[dict, list[str], bool]:
    la, exc = _loop_analysis(cfg)
    if exc is not None:
        return _residue_report(cfg, exc)
    m = la.loop_operator.entries
    doc = {
        "command": "analyze",
        "probe": la.probe,
        "classification": la.classification,
        "count": la.count,
        "loop_operator": [_pairs(row) for row in m],
        "eigenvalues": [[float(l.real), float(l.imag)] for l, _ in la.eigenpairs],
        "eigenvectors": [_pairs(v.amplitudes) for _, v in la.eigenpairs],
        "residue_wires": list(la.residue_wires),
        "residue": None if la.residue is None else _pairs(la.residue.amplitudes),
    }
    label = {"paradox": "PARADOX", "tautology": "TAUTOLOGY"}.get(la.classification, f"CONSISTENT({la.count})")
    text = [
        f"{label} on probe {la.probe}",
        "loop operator (z basis):",
        *_matrix_lines(m),
        "eigenvalues: " + ", ".join(_cnum(l) for l, _ in la.eigenpairs),
    ]
    return doc, text, True


def cmd_fixed_points(cfg: CliConfig) -> tuple[dict, list[str], bool]:
    if cfg.semantics == "deutsch":
        circuit = _load(cfg.input)
        doc, text = _deutsch_report(cfg, circuit, cfg.loop or _single_loop(circuit))
        return doc, text, True
    la, exc = _loop_analysis(cfg)
    if exc is not None:
        return _residue_report(cfg, exc)
    states = [v for l, v in la.eigenpairs if abs(l) > tol.EIG_NONZERO] if la.classification != "paradox" else []
    doc = {"command": "fixed-points", "probe": la.probe, "classification": la.classification, "fixed_states": []}
    text = [f"{len(states)} fixed state(s) on probe {la.probe} ({la.classification})"]
    for k, v in enumerate(states, 1):
        pm = _H @ v.amplitudes if len(v.amplitudes) == 2 else None
        doc["fixed_states"].append({"z": _pairs(v.amplitudes), "pm": None if pm is None else _pairs(pm)})
        line = f"  [{k}] z amplitudes ({', '.join(_cnum(z) for z in v.amplitudes)})"
        if pm is not None:
            line += f"  pm amplitudes ({', '.join(_cnum(z) for z in pm)})"
        text.append(line)
    return doc, text, True


def cmd_deutsch(cfg: CliConfig) -> tuple[dict, list[str], bool]:
    circuit = _load(cfg.input)
    doc, text = _deutsch_report(cfg, circuit, cfg.loop or _single_loop(circuit))
    return doc, text, True


def cmd_experiment(cfg: CliConfig) -> tuple[dict, list[str], bool]:
    if cfg.experiment not in EXPERIMENTS:
        raise InputError(f"unknown experiment {cfg.experiment!r}", ["known: " + ", ".join(EXPERIMENTS)])
    circuit = _load(cfg.circuit) if cfg.circuit else None
    rep = run_experiment(cfg.experiment, cfg.seed, cfg.order, epsilon=cfg.epsilon, circuit=circuit)
    cls = rep.classification
    cls_text = cls.get("classification") if isinstance(cls, dict) else cls
    text = [
        f"experiment {rep.id} (seed {rep.seed}, order {cfg.order})",
        f"classification: {cls_text}",
        "verdicts:",
        *_verdict_lines(rep.verdicts),
        f"{'ALL PASS' if rep.passed else 'SOME CHECKS FAILED'}",
    ]
    return rep.to_dict(), text, rep.passed


def cmd_list(cfg: CliConfig) -> tuple[dict, list[str], bool]:
    doc = {"experiments": {k: v[2] for k, v in EXPERIMENTS.items()}}
    width = max(len(k) for k in EXPERIMENTS)
    return doc, [f"{k.ljust(width)}  {v[2]}" for k, v in EXPERIMENTS.items()], True


COMMANDS = {
    "run": cmd_run,
    "analyze": cmd_analyze,
    "fixed-points": cmd_fixed_points,
    "deutsch": cmd_deutsch,
    "experiment": cmd_experiment,
    "list": cmd_list,
}


# ------------------------------------------------------------------ argv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message, [self.format_usage().strip()])


def _epsilon(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < x < 1e-3:
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, 1e-3), got {text}")
    return x


def _seed(text: str) -> int:
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= x < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--semantics", choices=("pctc", "deutsch"), default="pctc")
    common.add_argument("--epsilon", type=_epsilon, default=tol.ZERO_AMPLITUDE, help="paradox threshold on the weight")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED)

    p = _Parser(prog="pctc-lab", description="Simulate quantum circuits with closed timelike curves.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = sub.add_parser("run", parents=[common], help="run a circuit file")
    s.add_argument("input")
    for name in ("analyze", "fixed-points"):
        s = sub.add_parser(name, parents=[common], help=f"{name} the loop operator seen by a probe wire")
        s.add_argument("input")
        s.add_argument("--probe")
        s.add_argument("--loop", help="past wire of the loop (deutsch semantics)")
    s = sub.add_parser("deutsch", parents=[common], help="Deutsch fixed point of a circuit file")
    s.add_argument("input")
    s.add_argument("--loop")
    s = sub.add_parser("experiment", parents=[common], help="run a packaged experiment")
    s.add_argument("experiment")
    s.add_argument("--check", action="store_true", help="exit 3 if any claim check fails")
    s.add_argument("--order", choices=("pf-first", "cnot-first"), default="pf-first")
    s.add_argument("--circuit", help="evaluate the claims on this circuit file instead of the built one")
    sub.add_parser("list", parents=[common], help="list packaged experiments")
    return p


def parse_config(argv: list[str]) -> CliConfig:
    ns = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(ns).items() if k in CliConfig.__dataclass_fields__}
    return CliConfig(**fields)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        doc, text, ok = COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"pctc-lab: error: {exc}", file=sys.stderr)
        for line in exc.detail:
            print(f"  {line}", file=sys.stderr)
        return EXIT_INPUT
    body = json.dumps(jsonable(doc), indent=2) if cfg.format == "json" else "\n".join(text)
    body += "\n"
    if cfg.output:
        try:
            Path(cfg.output).write_text(body, encoding="utf-8")
        except OSError as exc:
            print(f"pctc-lab: error: cannot write {cfg.output}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_INPUT
    else:
        sys.stdout.write(body)
    if cfg.command == "experiment" and cfg.check and not ok:
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
