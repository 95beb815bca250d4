"""Command-line front end: ``compile``, ``verify`` and ``diagram``.

Exit status is 0 when everything requested passed, 1 when a verification
failed and 2 for usage, parse or compile errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from .circuit import Circuit, CircuitError, cycles_to_circuit, parse_circuit, random_cycle_form
from .graph import GraphError, SubstrateDiagram, emit_diagram
from .owqc import PatternError, embed_in_cluster, to_diagram
from .pauli import PauliFrame
from .primitives import fragment
from .statevec import SimulatorError, random_state
from .tqc import compile_full, compile_pseudo
from .verify import (
    SCHEMES,
    VerificationError,
    compile_scheme,
    resource_table,
    verify_branches,
    verify_random,
)

__all__ = ["CliConfig", "build_parser", "main", "run"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FORMATS = ("text", "json", "dot", "ascii")


class UsageError(Exception):
    """Bad flag combination, detected after argparse."""


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    input: Path | None
    scheme: str
    seed: int
    trials: int
    format: str
    output: Path | None
    emit_cluster: bool = False
    branches: str | None = None
    inputs: int = 1
    resources: bool = False
    n: int | None = None
    m: int | None = None
    entangled: bool = False
    timing: bool = False

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise UsageError("--trials must be at least 1")
        if self.inputs < 1:
            raise UsageError("--inputs must be at least 1")
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must fit in an unsigned 64-bit integer")

    @property
    def schemes(self) -> tuple[str, ...]:
        return SCHEMES if self.scheme == "all" else (self.scheme,)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onebit-mbqc",
        description="Compile circuits to teleportation and one-way measurement schemes and verify them.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser, default_scheme: str, formats: Sequence[str]) -> None:
        p.add_argument("input", nargs="?", type=Path, help="circuit file ('qubits <n>' header, one gate per line)")
        p.add_argument("--scheme", default=default_scheme, choices=SCHEMES + ("all",))
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", default=formats[0], choices=formats)
        p.add_argument("-o", "--output", type=Path, help="write to a file instead of stdout")
        p.add_argument("--n", type=int, help="wire count for generated circuits")
        p.add_argument("--m", type=int, help="cycle or CZ count for generated circuits")

    p = sub.add_parser("compile", help="dump a schedule or measurement pattern")
    common(p, "tg", ("text", "json", "dot", "ascii"))
    p.add_argument("--emit-cluster", action="store_true", help="also list the cluster lattice and its deletions")

    p = sub.add_parser("verify", help="run equivalence checks and print a report")
    common(p, "all", ("text", "json"))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--branches", metavar="primitive:NAME", help="enumerate every branch of one primitive")
    p.add_argument("--inputs", type=int, default=1, help="random input states for --branches")
    p.add_argument("--resources", action="store_true", help="print resource tallies against the closed forms")
    p.add_argument("--entangled", action="store_true", help="draw entangled rather than product inputs")
    p.add_argument("--timing", action="store_true", help="include wall time (breaks byte-determinism)")

    p = sub.add_parser("diagram", help="draw the substrate of a one-way pattern")
    common(p, "tg", ("ascii", "dot"))
    return parser


def _config(ns: argparse.Namespace) -> CliConfig:
    return CliConfig(
        subcommand=ns.subcommand,
        input=ns.input,
        scheme=ns.scheme,
        seed=ns.seed,
        trials=getattr(ns, "trials", 1),
        format=ns.format,
        output=ns.output,
        emit_cluster=getattr(ns, "emit_cluster", False),
        branches=getattr(ns, "branches", None),
        inputs=getattr(ns, "inputs", 1),
        resources=getattr(ns, "resources", False),
        n=ns.n,
        m=ns.m,
        entangled=getattr(ns, "entangled", False),
        timing=getattr(ns, "timing", False),
    )


def _load_circuit(cfg: CliConfig) -> Circuit:
    if cfg.input is not None:
        try:
            text = cfg.input.read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {cfg.input}: {exc.strerror}") from None
        return parse_circuit(text)
    if cfg.n is None or cfg.m is None:
        raise UsageError("give a circuit file, or --n and --m for a generated one")
    if cfg.n < 1 or cfg.m < 0:
        raise UsageError("--n must be positive and --m non-negative")
    cf = random_cycle_form(np.random.default_rng(cfg.seed), cfg.n, cfg.m)
    return cycles_to_circuit(cf) if cfg.m else Circuit(cfg.n, ())


# -- subcommands ---------------------------------------------------------------


def cmd_compile(cfg: CliConfig) -> tuple[str, int]:
    c = _load_circuit(cfg)
    blocks = []
    for scheme in cfg.schemes:
        if scheme.startswith("tqc"):
            if cfg.emit_cluster and cfg.scheme != "all":
                raise UsageError("--emit-cluster applies to one-way schemes only")
            schedule = (compile_full if scheme == "tqc-full" else compile_pseudo)(c)
            if cfg.format == "json":
                r = schedule.resources
                blocks.append(
                    json.dumps(
                        {
                            "scheme": scheme,
                            "dump": schedule.dump().splitlines(),
                            "resources": {
                                "ancillas": r.ancillas,
                                "two_qubit": r.two_qubit_meas,
                                "single_qubit": r.single_qubit_meas,
                                "depth": r.logical_depth,
                            },
                        },
                        sort_keys=True,
                        indent=2,
                    )
                    + "\n"
                )
            else:
                blocks.append(schedule.dump())
            continue
        compiled = compile_scheme(c, scheme)
        pattern, sub = compiled.program, compiled.substrate
        diagram = to_diagram(pattern)
        embeddable = sub.lattice_shape is not None
        if cfg.emit_cluster and not embeddable and cfg.scheme != "all":
            raise UsageError(f"{scheme} has no cluster embedding")
        cluster = _cluster_text(sub) if cfg.emit_cluster and embeddable else ""
        if cfg.format == "json":
            doc = {
                "scheme": scheme,
                "variant": sub.variant,
                "dump": pattern.dump().splitlines(),
                "physical_qubits": sub.physical_qubits,
                "cost_per_cycle": sub.cost_per_cycle,
                "lattice_shape": list(sub.lattice_shape) if sub.lattice_shape else None,
            }
            if cluster:
                doc["cluster"] = cluster.splitlines()
            blocks.append(json.dumps(doc, sort_keys=True, indent=2) + "\n")
            continue
        text = pattern.dump()
        if cfg.format in ("text", "dot"):
            text += emit_diagram(diagram, "dot")
        else:
            text += emit_diagram(diagram, "ascii")
        blocks.append(text + cluster)
    return "".join(blocks), EXIT_OK


def _cluster_text(sub) -> str:
    try:
        lattice, deletions = embed_in_cluster(sub)
    except PatternError as exc:
        raise UsageError(str(exc)) from None
    rows, cols = sub.lattice_shape
    lines = [f"# cluster {rows}x{cols}"]
    lines += [f"vertex {r},{c}" for r, c in lattice.order]
    lines += [f"delete {r},{c}" for r, c in sorted(deletions)]
    return "\n".join(lines) + "\n"


def cmd_verify(cfg: CliConfig) -> tuple[str, int]:
    if cfg.resources:
        return _resources(cfg)
    if cfg.branches:
        return _branches(cfg)
    c = _load_circuit(cfg)
    reports = [
        verify_random(c, s, cfg.trials, cfg.seed, entangled=cfg.entangled, timing=cfg.timing) for s in cfg.schemes
    ]
    if cfg.format == "json":
        text = json.dumps([r.as_dict() for r in reports], sort_keys=True, indent=2) + "\n"
    else:
        text = "\n".join(r.to_text() for r in reports)
    return text, EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _branches(cfg: CliConfig) -> tuple[str, int]:
    try:
        frag = fragment(cfg.branches)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    rng = np.random.default_rng(cfg.seed)
    states = [random_state(rng, frag.wires, entangled=cfg.entangled) for _ in range(cfg.inputs)]
    frames = [PauliFrame.identity(frag.wires)] * cfg.inputs
    report = verify_branches(frag, states, frames=frames)
    text = report.to_json() if cfg.format == "json" else report.to_text()
    return text, EXIT_OK if report.passed else EXIT_FAIL


def _resources(cfg: CliConfig) -> tuple[str, int]:
    if cfg.n is None or cfg.m is None:
        raise UsageError("--resources needs --n and --m")
    if cfg.n < 1 or cfg.m < 0 or (cfg.m and cfg.n < 2):
        raise UsageError("--resources needs n >= 1, m >= 0 and n >= 2 when m > 0")
    checks = resource_table(cfg.n, cfg.m)
    if cfg.format == "json":
        text = json.dumps([ch.as_dict() for ch in checks], sort_keys=True, indent=2) + "\n"
    else:
        lines = []
        for ch in checks:
            lines.append(ch.subject)
            for r in ch.rows:
                exp = "-" if r.expected is None else str(r.expected)
                lines.append(f"  {r.name:28s} {r.actual:6d} {exp:>6s} {'ok' if r.ok else 'MISMATCH'}")
        text = "\n".join(lines) + "\n"
    return text, EXIT_OK if all(ch.ok for ch in checks) else EXIT_FAIL


def cmd_diagram(cfg: CliConfig) -> tuple[str, int]:
    if cfg.scheme.startswith("tqc") or cfg.scheme == "all":
        raise UsageError("diagram needs a single one-way scheme")
    c = _load_circuit(cfg)
    compiled = compile_scheme(c, cfg.scheme)
    diagram: SubstrateDiagram = to_diagram(compiled.program)
    return emit_diagram(diagram, cfg.format), EXIT_OK


_COMMANDS = {"compile": cmd_compile, "verify": cmd_verify, "diagram": cmd_diagram}


def run(argv: Sequence[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    """Parse ``argv``, run the subcommand and return the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(ns)
        text, code = _COMMANDS[cfg.subcommand](cfg)
    except (UsageError, CircuitError, GraphError, PatternError, VerificationError, SimulatorError) as exc:
        print(f"onebit-mbqc: error: {exc}", file=stderr)
        return EXIT_USAGE
    if cfg.output is not None:
        cfg.output.write_text(text)
    else:
        stdout.write(text)
    return code


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))
