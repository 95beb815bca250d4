from __future__ import annotations

import itertools

import numpy as np
import pytest

from onebit_mbqc.circuit import HADAMARD, Gate, gate_matrix
from onebit_mbqc.pauli import (
    PRIMITIVE_RULES,
    FrameError,
    OutcomeRecord,
    PauliFrame,
    adapted_angle,
    compose,
    conjugate_by_clifford,
    conjugate_through,
    frame_update,
    pauli_matrix,
)

CLIFFORD_GATES = [
    Gate("i", (0,)),
    Gate("x", (0,)),
    Gate("y", (1,)),
    Gate("z", (0,)),
    Gate("h", (0,)),
    Gate("h", (1,)),
    Gate("hp", (0,)),
    Gate("hp", (1,)),
    Gate.cz(0, 1),
    Gate.cx(0, 1),
    Gate.cx(1, 0),
    Gate("swap", (0, 1)),
]


def embed(g: Gate, n: int = 2) -> np.ndarray:
    """Gate matrix on ``n`` wires with wire 0 least significant (matching ``PauliFrame.matrix``)."""
    full = np.zeros((2**n, 2**n), dtype=complex)
    m = gate_matrix(g)
    k = len(g.qubits)
    for col in range(2**n):
        sub = 0
        for q in g.qubits:
            sub = (sub << 1) | ((col >> q) & 1)
        for row_sub in range(2**k):
            amp = m[row_sub, sub]
            if amp == 0:
                continue
            row = col
            for pos, q in enumerate(g.qubits):
                bit = (row_sub >> (k - 1 - pos)) & 1
                row = (row & ~(1 << q)) | (bit << q)
            full[row, col] += amp
    return full


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> bool:
    overlap = np.vdot(b, a) / a.shape[0]
    return abs(abs(overlap) - 1) < tol and np.allclose(a, overlap * b, atol=tol)


def single_generator_frames(n: int = 2):
    for w in range(n):
        for a, b in ((1, 0), (0, 1), (1, 1)):
            yield PauliFrame.identity(n).with_bits(w, a, b)


@pytest.mark.parametrize("g", CLIFFORD_GATES, ids=str)
def test_conjugation_matches_brute_force(g):
    u = embed(g)
    for frame in single_generator_frames():
        after = conjugate_through(frame, g)
        assert equal_up_to_phase(u @ frame.matrix() @ u.conj().T, after.matrix())


@pytest.mark.parametrize("g", [Gate.xrot(0, 0.3), Gate.zrot(0, 0.3)], ids=str)
def test_conjugation_rejects_rotations(g):
    with pytest.raises(FrameError):
        conjugate_through(PauliFrame.identity(1), g)


def test_conjugate_by_clifford_search():
    assert conjugate_by_clifford(HADAMARD, [1], [0]) == ((0,), (1,))
    with pytest.raises(FrameError):
        conjugate_by_clifford(np.diag([1, np.exp(0.3j)]), [1], [0])


def all_frames(n: int = 2):
    for bits in itertools.product((0, 1), repeat=2 * n):
        yield PauliFrame.from_bits(bits[:n], bits[n:])


def test_compose_group_laws():
    frames = list(all_frames())
    ident = PauliFrame.identity(2)
    for p in frames:
        assert compose(p, p) == ident
        assert compose(p, ident) == p
        for q in frames:
            assert compose(p, q) == compose(q, p)
            for r in frames:
                assert compose(compose(p, q), r) == compose(p, compose(q, r))


def test_compose_matches_matrix_product():
    for p in all_frames():
        for q in all_frames():
            assert equal_up_to_phase(p.matrix() @ q.matrix(), compose(p, q).matrix())


def test_compose_size_mismatch():
    with pytest.raises(FrameError):
        compose(PauliFrame.identity(1), PauliFrame.identity(2))


def test_frame_string_is_wire_ordered():
    assert str(PauliFrame.from_bits((0, 1, 0, 1), (0, 0, 1, 1))) == "a:0101 b:0011"


def test_frame_validation():
    with pytest.raises(FrameError):
        PauliFrame((0, 2), (0, 0), (0, 1))
    with pytest.raises(FrameError):
        PauliFrame((0,), (0, 0), (0,))


def test_pauli_matrix():
    assert np.allclose(pauli_matrix(1, 1), np.array([[0, -1], [1, 0]]))


def test_adapted_angle():
    assert adapted_angle(0, 0.4) == pytest.approx(0.4)
    assert adapted_angle(1, 0.4) == pytest.approx(-0.4)


def test_outcome_record_is_immutable():
    r = OutcomeRecord()
    r2 = r.add("0,1", 1)
    assert len(r) == 0 and r2.as_dict() == {"0,1": 1} and r2.bits() == (1,)


def test_z_teleport_example():
    f = frame_update(PauliFrame.identity(1), "zt", {"c": 1}, {"labels": ("anc",)})
    assert (f.a, f.b, f.labels) == ((0,), (1,), ("anc",))


def test_cz_coupled_teleport_example():
    f = frame_update(PauliFrame.from_bits((1, 0), (0, 0)), "1bittelepcz", {"c1": 0, "c2": 0}, {"k": 1})
    assert (f.a[0], f.b[0], f.a[1], f.b[1]) == (1, 0, 0, 1)


def test_xtcz_trivial():
    f = frame_update(PauliFrame.identity(2), "xtcz", {"d1": 0, "d2": 0})
    assert f == PauliFrame.identity(2)


def test_missing_outcome():
    with pytest.raises(FrameError, match="missing"):
        frame_update(PauliFrame.identity(1), "zt", {"d": 1})


def test_unknown_primitive_and_bad_wires():
    with pytest.raises(FrameError):
        frame_update(PauliFrame.identity(1), "nope", {})
    with pytest.raises(FrameError):
        frame_update(PauliFrame.identity(2), "cz", {}, {"wires": (0, 0)})


def test_wires_param_targets_other_wires():
    f = frame_update(PauliFrame.from_bits((0, 0, 1), (0, 0, 0)), "cz", {}, {"wires": (2, 0)})
    assert str(f) == "a:001 b:100"


# Closed forms written out independently of the rule table.
ONE_WIRE = {
    "zt": lambda a, b, o: (a, b ^ o["c"]),
    "xt": lambda a, b, o: (a ^ o["d"], b),
    "zrot": lambda a, b, o: (a, b ^ o["c"]),
    "xrot": lambda a, b, o: (a ^ o["d"], b),
    "uzt": lambda a, b, o: (0, o["c"]),
    "uxt": lambda a, b, o: (o["d"], 0),
    "uzttqc": lambda a, b, o: (o["k"], o["c"]),
    "uxttqc": lambda a, b, o: (o["d"], o["k"]),
    "teleportu": lambda a, b, o: (o["d"], o["c"]),
    "xt_routing": lambda a, b, o: (a ^ o["k"], b),
    "zt_routing": lambda a, b, o: (a ^ o["k"], b),
}
TWO_WIRE = {
    "cz": ({}, lambda a1, b1, a2, b2, o: (a1, b1 ^ a2, a2, b2 ^ a1)),
    "xtcz": ({}, lambda a1, b1, a2, b2, o: (a1 ^ o["d1"], b1 ^ a2 ^ o["d2"], a2 ^ o["d2"], b2 ^ a1 ^ o["d1"])),
    "xtcz2": ({}, lambda a1, b1, a2, b2, o: (a1 ^ o["d1"], b1 ^ a2 ^ o["d2"], a2 ^ o["d2"], b2 ^ a1 ^ o["d1"])),
    "xtcz3": ({}, lambda a1, b1, a2, b2, o: (a1, b1 ^ a2 ^ o["d2"], a2, b2 ^ a1 ^ o["d1"])),
    "xtcz4": ({}, lambda a1, b1, a2, b2, o: (a1, b1 ^ a2 ^ o["d2"], a2, b2 ^ a1 ^ o["d1"])),
    "xtcz5": ({}, lambda a1, b1, a2, b2, o: (a1, b1 ^ a2 ^ o["d2"], a2, b2 ^ a1 ^ o["d1"])),
    "xtcz4tqc": ({}, lambda a1, b1, a2, b2, o: (a1, b1 ^ a2 ^ o["d2"] ^ o["k1"], a2, b2 ^ a1 ^ o["d1"] ^ o["k2"])),
    "xtcz5tqc": ({}, lambda a1, b1, a2, b2, o: (a1, b1 ^ a2 ^ o["d2"], a2, b2 ^ a1 ^ o["d1"] ^ o["k2"])),
    "1bittelepcz-k0": ({"k": 0}, lambda a1, b1, a2, b2, o: (a1, b1 ^ o["c1"], a2, b2 ^ o["c2"])),
    "1bittelepcz-k1": ({"k": 1}, lambda a1, b1, a2, b2, o: (a1, b1 ^ a2 ^ o["c1"], a2, b2 ^ a1 ^ o["c2"])),
    "rcz-enact": ({"mode": "enact"}, lambda a1, b1, a2, b2, o: (a1, b1 ^ a2 ^ o["d2"], a2, b2 ^ a1 ^ o["d1"])),
    "rcz-delete": ({"mode": "delete"}, lambda a1, b1, a2, b2, o: (a1, b1 ^ o["s1"], a2, b2 ^ o["s2"])),
    "rcz2-enact": ({"mode": "enact"}, lambda a1, b1, a2, b2, o: (a1, b1 ^ a2, a2, b2 ^ a1)),
    "rcz2-delete": ({"mode": "delete"}, lambda a1, b1, a2, b2, o: (a1, b1 ^ o["s"], a2, b2 ^ o["s"])),
}
OUTCOME_NAMES = ("c", "d", "k", "d1", "d2", "k1", "k2", "c1", "c2", "s1", "s2", "s")


def outcome_maps():
    for bits in itertools.product((0, 1), repeat=len(OUTCOME_NAMES)):
        yield dict(zip(OUTCOME_NAMES, bits))


@pytest.mark.parametrize("rule", sorted(ONE_WIRE))
def test_one_wire_closed_forms(rule):
    for o in itertools.islice(outcome_maps(), 0, None, 97):
        for a, b in itertools.product((0, 1), repeat=2):
            f = frame_update(PauliFrame.from_bits((a,), (b,)), rule, o)
            assert (f.a[0], f.b[0]) == ONE_WIRE[rule](a, b, o)


@pytest.mark.parametrize("case", sorted(TWO_WIRE))
def test_two_wire_closed_forms(case):
    params, closed = TWO_WIRE[case]
    rule = case.split("-")[0]
    for o in itertools.islice(outcome_maps(), 0, None, 61):
        for a1, b1, a2, b2 in itertools.product((0, 1), repeat=4):
            f = frame_update(PauliFrame.from_bits((a1, a2), (b1, b2)), rule, o, params)
            assert (f.a[0], f.b[0], f.a[1], f.b[1]) == closed(a1, b1, a2, b2, o)


def test_every_rule_has_a_closed_form_test():
    covered = set(ONE_WIRE) | {k.split("-")[0] for k in TWO_WIRE} | {"teleportgc"}
    assert covered == set(PRIMITIVE_RULES)


def test_clifford_teleport_rule_conjugates():
    f = frame_update(PauliFrame.identity(1), "teleportgc", {"c": 1, "d": 0}, {"clifford": HADAMARD})
    assert (f.a, f.b) == ((1,), (0,))
    with pytest.raises(FrameError):
        frame_update(PauliFrame.identity(1), "teleportgc", {"c": 1, "d": 0})
