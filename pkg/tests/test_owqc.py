from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from conftest import circuit_unitary
from onebit_mbqc.circuit import (
    CX_MATRIX,
    CZ_MATRIX,
    HADAMARD,
    Cycle,
    CycleForm,
    cycles_to_circuit,
    random_cycle_form,
    xrot_matrix,
    zrot_matrix,
)
from onebit_mbqc.graph import GraphSpec, build_graph_state, delete_vertex
from onebit_mbqc.owqc import (
    INTERSPERSED_ANGLE,
    VARIANTS,
    MeasurementPattern,
    PatternError,
    PatternStep,
    cancellation_cycles,
    compile_tg,
    compile_universal,
    embed_in_cluster,
    execute_pattern,
    execute_windowed,
    frame_expressions,
    physical_qubits,
    to_diagram,
)
from onebit_mbqc.pauli import PauliFrame
from onebit_mbqc.statevec import (
    MAX_QUBITS,
    ForcedOutcomes,
    Rng,
    SimulatorError,
    StateVector,
    ZeroProbabilityBranch,
    apply_matrix,
    fidelity,
    random_state,
)

I2 = np.eye(2)
S = np.diag([1, 1j])


def ideal(cf: CycleForm, psi: StateVector) -> StateVector:
    return StateVector(circuit_unitary(cycles_to_circuit(cf)) @ psi.amps)


def corrected(result) -> StateVector:
    return StateVector(result.frame.matrix().conj().T @ result.output.amps)


def all_branches(p: MeasurementPattern, psi: StateVector, runner=execute_windowed, frame=None):
    for bits in itertools.product((0, 1), repeat=len(p.steps)):
        try:
            yield runner(p, psi, frame, ForcedOutcomes(bits))
        except ZeroProbabilityBranch:
            continue


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> bool:
    overlap = np.vdot(b, a) / a.shape[0]
    return abs(abs(overlap) - 1) < tol and np.allclose(a, overlap * b, atol=tol)


def two_cycle_example() -> CycleForm:
    t = [0.3, 0.5, 0.2, -0.4, 0.7, 0.1, 0.9, 0.3]
    pair = frozenset({(0, 1)})
    return CycleForm(2, (Cycle((t[0], t[1]), (t[2], t[3]), pair), Cycle((t[4], t[5]), (t[6], t[7]), pair)))


# -- TG ----------------------------------------------------------------------


def test_tg_identity_single_cycle(rng):
    p = compile_tg(CycleForm(1, (Cycle((0.0,), (0.0,)),)))
    assert [s.kind for s in p.steps] == ["xrot", "zrot"]
    psi = random_state(rng, 1)
    r = execute_pattern(p, psi, rng=ForcedOutcomes([0, 0]))
    assert r.frame == PauliFrame.identity(1)
    assert fidelity(r.output, psi) == pytest.approx(1.0)


def test_tg_layout(rng):
    cf = random_cycle_form(rng, 3, 2)
    p = compile_tg(cf)
    assert len(p.graph) == 3 * (2 * 2 + 1)
    horizontal = {((w, c), (w, c + 1)) for w in range(3) for c in range(4)}
    vertical = {((i, 2 * j + 1), (k, 2 * j + 1)) for j, cyc in enumerate(cf.cycles) for i, k in cyc.cz}
    assert p.graph.edges == frozenset(horizontal | vertical)
    assert p.optional == frozenset(vertical)


def test_tg_example_labels():
    p = compile_tg(two_cycle_example())
    labels = dict(p.labels)
    assert [labels[(w, c)] for c in range(4) for w in range(2)] == [
        "M1", "M2", "N1", "N2", "M1'", "M2'", "N1'", "N2'"
    ]
    assert len(p.graph) == 2 * (2 * 2) + 2
    diagram = to_diagram(p)
    assert diagram.optional == frozenset({((0, 1), (1, 1)), ((0, 3), (1, 3))})


def test_tg_example_every_branch(rng):
    cf = two_cycle_example()
    p = compile_tg(cf)
    for _ in range(2):
        psi = random_state(rng, 2, entangled=True)
        want = ideal(cf, psi)
        total = 0.0
        for r in all_branches(p, psi):
            total += r.probability
            assert fidelity(corrected(r), want) >= 1 - 1e-9
        assert total == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("n, m", [(n, m) for n in (1, 2, 3) for m in (1, 2)])
def test_tg_exhaustive(n, m):
    rng = np.random.default_rng(100 * n + m)
    cf = random_cycle_form(rng, n, m)
    p = compile_tg(cf)
    for _ in range(5):
        psi = random_state(rng, n)
        want = ideal(cf, psi)
        worst = min(fidelity(corrected(r), want) for r in all_branches(p, psi))
        assert worst >= 1 - 1e-9


def test_tg_with_input_frame(rng):
    cf = random_cycle_form(rng, 2, 2)
    p = compile_tg(cf)
    for t in range(10):
        psi = random_state(rng, 2)
        frame = PauliFrame.from_bits(rng.integers(0, 2, 2), rng.integers(0, 2, 2))
        r = execute_windowed(p, StateVector(frame.matrix() @ psi.amps), frame, Rng(3, t))
        assert fidelity(corrected(r), ideal(cf, psi)) >= 1 - 1e-9


def test_windowed_matches_full_branch_by_branch(rng):
    p = compile_tg(two_cycle_example())
    psi = random_state(rng, 2, entangled=True)
    for bits in itertools.product((0, 1), repeat=len(p.steps)):
        a = execute_pattern(p, psi, rng=ForcedOutcomes(bits))
        b = execute_windowed(p, psi, rng=ForcedOutcomes(bits))
        assert a.record == b.record and a.frame == b.frame
        assert a.probability == pytest.approx(b.probability, abs=1e-12)
        assert fidelity(a.output, b.output) == pytest.approx(1.0, abs=1e-12)


def test_tg_window_does_not_grow_with_depth(rng):
    peaks = []
    for m in (2, 4, 6):
        p = compile_tg(random_cycle_form(rng, 3, m))
        peaks.append(execute_windowed(p, random_state(rng, 3), rng=Rng(0)).peak_qubits)
    assert len(set(peaks)) == 1 and peaks[0] <= MAX_QUBITS


def test_frame_expressions_match_execution(rng):
    p = compile_tg(random_cycle_form(rng, 3, 2))
    expr = frame_expressions(p)
    for t in range(20):
        r = execute_windowed(p, random_state(rng, 3), rng=Rng(9, t))
        assert expr.evaluate(r.record) == r.frame


def test_dependencies_point_backwards(rng):
    for variant in VARIANTS:
        _, p = compile_universal(random_cycle_form(rng, 3, 2), variant)
        position = {s.vertex: i for i, s in enumerate(p.steps)}
        for v, deps in frame_expressions(p).deps.items():
            assert all(position[u] < position[v] for u in deps)


def test_pattern_dump_format():
    p = compile_tg(CycleForm(1, (Cycle((0.25,), (-0.5,)),)))
    assert p.dump().splitlines() == [
        "# pattern TG wires=1 vertices=3 measurements=2",
        "meas 0,0 kind=xrot angle=0.25 dep=0:b",
        "meas 0,1 kind=zrot angle=-0.5 dep=0:a",
        "# outputs 0,2",
    ]


# -- universal substrates -------------------------------------------------------


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("n, m", [(2, 1), (3, 2)])
def test_variants_sampled(variant, n, m):
    rng = np.random.default_rng(7 * n + m)
    cf = random_cycle_form(rng, n, m)
    _, p = compile_universal(cf, variant)
    for t in range(15):
        psi = random_state(rng, n, entangled=True)
        r = execute_windowed(p, psi, rng=Rng(21, t))
        assert fidelity(corrected(r), ideal(cf, psi)) >= 1 - 1e-9


@pytest.mark.parametrize("variant", ["RemoteCZ_I", "RemoteCZ_II", "Cancellation", "Routing"])
def test_substrate_is_circuit_independent(variant, rng):
    _, a = compile_universal(random_cycle_form(rng, 3, 2), variant)
    _, b = compile_universal(random_cycle_form(rng, 3, 2), variant)
    assert a.graph.order == b.graph.order and a.graph.edges == b.graph.edges


@pytest.mark.parametrize("variant, cost", [("RemoteCZ_I", 6), ("RemoteCZ_II", 4)])
def test_cost_per_cycle(variant, cost, rng):
    scheme, _ = compile_universal(random_cycle_form(rng, 2, 1), variant)
    assert scheme.cost_per_cycle == cost


@pytest.mark.parametrize("variant", VARIANTS)
def test_physical_qubits_match_graph(variant, rng):
    scheme, p = compile_universal(random_cycle_form(rng, 3, 2), variant)
    assert scheme.physical_qubits == physical_qubits(variant, 3, 2)
    if variant in ("TG", "Cancellation", "Routing"):
        assert scheme.physical_qubits == len(p.graph)


@pytest.mark.parametrize("mode", ["enact", "delete"])
@pytest.mark.parametrize("variant", ["RemoteCZ_I", "RemoteCZ_II"])
def test_remote_modes_every_branch(variant, mode, rng):
    cz = frozenset({(0, 1)}) if mode == "enact" else frozenset()
    cf = CycleForm(2, (Cycle((0.4, -0.3), (1.1, 0.2), cz),))
    _, p = compile_universal(cf, variant)
    kinds = {s.kind for s in p.steps}
    assert ("mz" in kinds) == (mode == "delete")
    for _ in range(3):
        psi = random_state(rng, 2, entangled=True)
        want = ideal(cf, psi)
        for r in all_branches(p, psi):
            assert fidelity(corrected(r), want) >= 1 - 1e-9


def test_routing_five_wires_four_cycles(rng):
    cf = random_cycle_form(rng, 5, 4)
    scheme, p = compile_universal(cf, "Routing")
    assert p.n == 5 and scheme.physical_qubits == len(p.graph)
    psi = random_state(rng, 5)
    r = execute_windowed(p, psi, rng=Rng(2))
    assert fidelity(corrected(r), ideal(cf, psi)) >= 1 - 1e-9


@pytest.mark.parametrize("variant", VARIANTS)
def test_largest_size_fits_window(variant, rng):
    cf = random_cycle_form(rng, 4, 6)
    _, p = compile_universal(cf, variant)
    psi = random_state(rng, 4)
    r = execute_windowed(p, psi, rng=Rng(4))
    assert r.peak_qubits <= MAX_QUBITS
    assert fidelity(corrected(r), ideal(cf, psi)) >= 1 - 1e-9


def test_unknown_variant(rng):
    with pytest.raises(PatternError, match="unknown variant"):
        compile_universal(random_cycle_form(rng, 2, 1), "Teleporter")


# -- cancellation ----------------------------------------------------------------


def test_cancellation_pair_cancels():
    assert equal_up_to_phase(CZ_MATRIX @ np.kron(I2, xrot_matrix(0.0)) @ CZ_MATRIX, np.eye(4))


@pytest.mark.xfail(strict=True, reason="with X_t = exp(-i t X) the stated -pi/2 angle gives a local gate")
def test_cancellation_literal_half_turn():
    lhs = CZ_MATRIX @ np.kron(I2, xrot_matrix(-math.pi / 2)) @ CZ_MATRIX
    assert equal_up_to_phase(lhs, np.kron(I2, xrot_matrix(math.pi / 2)) @ CX_MATRIX)


def test_cancellation_quarter_turn_is_locally_cx():
    lam = CZ_MATRIX @ np.kron(I2, xrot_matrix(INTERSPERSED_ANGLE)) @ CZ_MATRIX
    assert equal_up_to_phase(lam, np.kron(zrot_matrix(-math.pi / 4), xrot_matrix(-math.pi / 4)) @ CX_MATRIX)
    assert equal_up_to_phase(CZ_MATRIX, np.kron(S, HADAMARD @ xrot_matrix(math.pi / 4)) @ lam @ np.kron(I2, HADAMARD))


def test_cancellation_cycles_structure(rng):
    cf = random_cycle_form(rng, 4, 3)
    out = cancellation_cycles(cf)
    assert out.m == 4 * (3 + 1) + 1
    for t, cyc in enumerate(out.cycles):
        if t >= 4 * 4:
            assert not cyc.cz
            continue
        first = 0 if t % 4 < 2 else 1
        assert cyc.cz == frozenset((i, i + 1) for i in range(first, 3, 2))
        if t % 2 == 1:
            for i, k in cyc.cz:
                assert cyc.x[k] in (0.0, INTERSPERSED_ANGLE)
    assert equal_up_to_phase(
        circuit_unitary(cycles_to_circuit(out)), circuit_unitary(cycles_to_circuit(cf)), tol=1e-9
    )


# -- cluster embedding -------------------------------------------------------------


def test_embedding_reproduces_substrate_graph(rng):
    for variant in ("RemoteCZ_I", "RemoteCZ_II"):
        for n, m in ((2, 1), (3, 2), (4, 3)):
            scheme, p = compile_universal(random_cycle_form(rng, n, m), variant)
            lattice, deletions = embed_in_cluster(scheme)
            g = lattice
            for v in sorted(deletions):
                g = g.without(v)
            assert g.order == p.graph.order and g.edges == p.graph.edges


@pytest.mark.parametrize("variant", ["RemoteCZ_I", "RemoteCZ_II"])
def test_embedding_state(variant, rng):
    scheme, p = compile_universal(random_cycle_form(rng, 2, 1), variant)
    lattice, deletions = embed_in_cluster(scheme)
    state, g, owed = build_graph_state(lattice), lattice, set()
    source = Rng(5)
    for v in sorted(deletions):
        d = delete_vertex(state, g, v, source)
        state, g = d.state, d.graph
        owed ^= set(d.corrections)
    for u in owed & set(g.order):
        state = apply_matrix(state, np.diag([1, -1]), [g.order.index(u)])
    assert fidelity(state, build_graph_state(p.graph)) >= 1 - 1e-10


def test_embedding_zero_cycles():
    scheme, _ = compile_universal(CycleForm(2, ()), "RemoteCZ_II")
    lattice, deletions = embed_in_cluster(scheme)
    assert deletions == frozenset() and lattice.order == ((0, 0), (2, 0))


@pytest.mark.parametrize("variant", ["TG", "Cancellation", "Routing"])
def test_embedding_unsupported(variant, rng):
    scheme, _ = compile_universal(random_cycle_form(rng, 2, 1), variant)
    with pytest.raises(PatternError):
        embed_in_cluster(scheme)


# -- validation --------------------------------------------------------------------


def test_pattern_step_validation():
    with pytest.raises(PatternError):
        PatternStep((0, 0), "mq")
    with pytest.raises(PatternError):
        PatternStep((0, 0), "xrot", angle=0.1)
    with pytest.raises(PatternError):
        PatternStep((0, 0), "mz", wire=0)


def test_pattern_validation():
    g = GraphSpec.from_edges([((0, 0), (0, 1)), ((0, 1), (0, 2))])
    types = (((0, 0), "M"), ((0, 1), "N"), ((0, 2), "M"))
    skip = PatternStep((0, 0), "xrot", 0.1, 0, (0, 2))
    with pytest.raises(PatternError, match="inconsistent"):
        MeasurementPattern(g, (skip, PatternStep((0, 1), "mz")), ((0, 0),), ((0, 2),), types)
    with pytest.raises(PatternError, match="measured"):
        MeasurementPattern(g, (), ((0, 0),), ((0, 2),), types)


def test_execution_errors(rng):
    p = compile_tg(random_cycle_form(rng, 2, 1))
    with pytest.raises(SimulatorError):
        execute_pattern(p, random_state(rng, 1), rng=Rng(0))
    with pytest.raises(SimulatorError):
        execute_pattern(p, random_state(rng, 2))
    big = compile_tg(random_cycle_form(rng, 4, 3))
    with pytest.raises(SimulatorError, match="cap"):
        execute_pattern(big, random_state(rng, 4), rng=Rng(0))
