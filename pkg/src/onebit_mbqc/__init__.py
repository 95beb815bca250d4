"""Compile small quantum circuits into measurement-based schemes built from one-bit teleportation.

Two families are supported. Teleportation-based schedules use adaptive one-
and two-qubit measurements on arbitrary qubit pairs. One-way patterns use
single-qubit measurements on a graph state, either circuit-specific or carved
from a fixed substrate. Every schedule and pattern runs on a dense state-vector
simulator with Pauli-frame feedforward and is checked against direct circuit
evolution.
"""

from __future__ import annotations

from .circuit import Circuit, CircuitError, Cycle, CycleForm, Gate, normalize_to_cycles, parse_circuit
from .graph import GraphSpec, SubstrateDiagram, build_graph_state, cluster_lattice, delete_vertex, emit_diagram
from .owqc import (
    VARIANTS,
    MeasurementPattern,
    SubstrateScheme,
    compile_tg,
    compile_universal,
    embed_in_cluster,
    execute_pattern,
    execute_windowed,
)
from .pauli import OutcomeRecord, PauliFrame, frame_update
from .primitives import FRAGMENTS, Fragment
from .statevec import ForcedOutcomes, Register, Rng, StateVector, fidelity
from .tqc import TqcSchedule, compile_cz, compile_full, compile_pseudo, compile_single_qubit, execute
from .verify import SCHEMES, VerificationReport, assert_resources, verify_branches, verify_random

__all__ = [
    "Circuit",
    "CircuitError",
    "Cycle",
    "CycleForm",
    "Gate",
    "normalize_to_cycles",
    "parse_circuit",
    "GraphSpec",
    "SubstrateDiagram",
    "build_graph_state",
    "cluster_lattice",
    "delete_vertex",
    "emit_diagram",
    "VARIANTS",
    "MeasurementPattern",
    "SubstrateScheme",
    "compile_tg",
    "compile_universal",
    "embed_in_cluster",
    "execute_pattern",
    "execute_windowed",
    "OutcomeRecord",
    "PauliFrame",
    "frame_update",
    "FRAGMENTS",
    "Fragment",
    "ForcedOutcomes",
    "Register",
    "Rng",
    "StateVector",
    "fidelity",
    "TqcSchedule",
    "compile_cz",
    "compile_full",
    "compile_pseudo",
    "compile_single_qubit",
    "execute",
    "SCHEMES",
    "VerificationReport",
    "assert_resources",
    "verify_branches",
    "verify_random",
]
