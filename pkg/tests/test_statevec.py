from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onebit_mbqc.circuit import HADAMARD, Gate, xrot_matrix
from onebit_mbqc.statevec import (
    MAX_QUBITS,
    ForcedOutcomes,
    ObservableSpec,
    Register,
    Rng,
    SimulatorError,
    StateVector,
    ZeroProbabilityBranch,
    apply,
    apply_matrix,
    discard,
    fidelity,
    measure,
    measure_forced,
    observable_matrix,
    prepare,
    product_state,
    random_state,
    zero_state,
)

PLUS = np.array([1, 1]) / math.sqrt(2)
ZERO = np.array([1, 0])
ONE = np.array([0, 1])


def close(a: StateVector, want) -> bool:
    return np.allclose(a.amps, np.asarray(want, dtype=complex), atol=1e-12)


@pytest.mark.parametrize(
    "kind, want",
    [
        ("zero", [1, 0]),
        ("plus", PLUS),
    ],
)
def test_prepare_single(kind, want):
    assert close(prepare(kind, [0], zero_state(1)), want)


def test_prepare_bell_and_czpp():
    assert close(prepare("bell", [0, 1], zero_state(2)), np.array([1, 0, 0, 1]) / math.sqrt(2))
    assert close(prepare("czpp", [0, 1], zero_state(2)), np.array([1, 1, 1, -1]) / 2)


def test_prepare_rejects_used_slot():
    with pytest.raises(SimulatorError, match="in use"):
        prepare("plus", [0], product_state([PLUS]))
    with pytest.raises(SimulatorError):
        prepare("ghz", [0], zero_state(1))


def test_apply_examples():
    assert close(apply(zero_state(1), Gate("h", (0,))), PLUS)
    pp = product_state([PLUS, PLUS])
    assert close(apply(pp, Gate.cz(0, 1)), np.array([1, 1, 1, -1]) / 2)
    assert close(apply(zero_state(1), Gate.xrot(0, math.pi / 2)), [0, -1j])


def test_apply_matrix_first_qubit_is_most_significant():
    # CX with control on qubit 1: |q1=1, q0=0> = index 2 goes to index 3.
    cx = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    s = StateVector(np.eye(4, dtype=complex)[2])
    assert close(apply_matrix(s, cx, [1, 0]), np.eye(4)[3])
    assert close(apply_matrix(s, cx, [0, 1]), np.eye(4)[2])


def test_apply_index_errors():
    with pytest.raises(SimulatorError):
        apply(zero_state(1), Gate("h", (1,)))
    with pytest.raises(SimulatorError):
        apply_matrix(zero_state(2), np.eye(4), [0, 0])


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_norm_preserved(seed, n):
    rng = np.random.default_rng(seed)
    s = random_state(rng, n, entangled=True)
    for _ in range(6):
        q = int(rng.integers(0, n))
        s = apply_matrix(s, xrot_matrix(rng.normal()) @ HADAMARD, [q])
        if n > 1:
            a, b = rng.choice(n, 2, replace=False)
            s = apply(s, Gate.cz(int(a), int(b)))
        assert abs(np.linalg.norm(s.amps) - 1) <= 1e-12


def test_measure_examples():
    bit, post, p = measure(zero_state(1), ObservableSpec.of((0, "Z")), Rng(0))
    assert (bit, p) == (0, pytest.approx(1.0)) and close(post, [1, 0])
    bit, _, p = measure(product_state([PLUS]), ObservableSpec.of((0, "X")), Rng(0))
    assert (bit, p) == (0, pytest.approx(1.0))
    bell = prepare("bell", [0, 1], zero_state(2))
    bit, _, p = measure(bell, ObservableSpec.of((0, "Z"), (1, "Z")), Rng(0))
    assert (bit, p) == (0, pytest.approx(1.0))


def test_measure_forced_examples():
    post, p = measure_forced(product_state([PLUS]), ObservableSpec.of((0, "Z")), 1)
    assert p == pytest.approx(0.5) and close(post, [0, 1])
    post, p = measure_forced(zero_state(1), ObservableSpec.of((0, "X")), 0)
    assert p == pytest.approx(0.5) and close(post, PLUS)
    with pytest.raises(ZeroProbabilityBranch):
        measure_forced(zero_state(1), ObservableSpec.of((0, "Z")), 1)


def random_observable(rng: np.random.Generator, n: int) -> ObservableSpec:
    k = int(rng.integers(1, n + 1))
    qubits = rng.choice(n, k, replace=False)
    spec = []
    for q in qubits:
        u = None
        if rng.random() < 0.5:
            z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            u, _ = np.linalg.qr(z)
        spec.append((int(q), str(rng.choice(["X", "Y", "Z"])), u))
    return ObservableSpec.of(*spec)


def test_branch_probabilities_sum_to_one(rng):
    for _ in range(100):
        n = int(rng.integers(1, 5))
        s = random_state(rng, n, entangled=True)
        obs = random_observable(rng, n)
        total = 0.0
        for bit in (0, 1):
            try:
                post, p = measure_forced(s, obs, bit)
            except ZeroProbabilityBranch:
                continue
            total += p
            assert abs(np.linalg.norm(post.amps) - 1) < 1e-12
        assert total == pytest.approx(1.0, abs=1e-12)


def test_observable_is_hermitian_involution(rng):
    for _ in range(30):
        m = observable_matrix(random_observable(rng, 3))
        assert np.allclose(m, m.conj().T, atol=1e-12)
        assert np.allclose(m @ m, np.eye(m.shape[0]), atol=1e-12)


def test_observable_validation():
    with pytest.raises(SimulatorError):
        ObservableSpec.of((0, "Z"), (0, "X"))
    with pytest.raises(SimulatorError):
        ObservableSpec.of((0, "W"))


@pytest.mark.parametrize("phi", [0.0, 0.7, math.pi, -2.1])
def test_fidelity_ignores_phase(phi):
    z = zero_state(1)
    assert fidelity(z, StateVector(np.exp(1j * phi) * z.amps)) == pytest.approx(1.0)


def test_fidelity_examples_and_errors():
    assert fidelity(zero_state(1), product_state([ONE])) == pytest.approx(0.0)
    with pytest.raises(SimulatorError):
        fidelity(zero_state(1), zero_state(2))


def test_state_vector_validation():
    with pytest.raises(SimulatorError):
        StateVector(np.ones(3))
    with pytest.raises(SimulatorError):
        StateVector(np.array([1.0, 1.0]))


def test_discard_product_and_entangled():
    s = product_state([PLUS, ONE, ZERO])
    assert fidelity(discard(s, 1), product_state([PLUS, ZERO])) == pytest.approx(1.0)
    assert fidelity(discard(s, [0, 2]), product_state([ONE])) == pytest.approx(1.0)
    with pytest.raises(SimulatorError, match="entangled"):
        discard(prepare("bell", [0, 1], zero_state(2)), 0)


def test_rng_is_reproducible():
    r1, r2 = Rng(5, 3), Rng(5, 3)
    seq1 = [r1.choose(0.5) for _ in range(64)]
    seq2 = [r2.choose(0.5) for _ in range(64)]
    other = Rng(5, 4)
    assert seq1 == seq2
    assert seq1 != [other.choose(0.5) for _ in range(64)]


def test_forced_outcomes_exhaust():
    src = ForcedOutcomes([0])
    assert src.choose(0.5) == 0
    with pytest.raises(SimulatorError, match="exhausted"):
        src.choose(0.5)


def test_register_labels_and_measure_out(rng):
    psi = random_state(rng, 2, entangled=True)
    reg = Register(psi, ["a", "b"])
    reg.add("anc", PLUS)
    bit, p = reg.measure_out("anc", None, ForcedOutcomes([1]))
    assert bit == 1 and reg.labels == ["a", "b"] and p == pytest.approx(0.5)
    assert fidelity(reg.state(), psi) == pytest.approx(1.0)
    assert reg.peak == 3


def test_register_state_permutation_and_errors(rng):
    psi = random_state(rng, 3)
    reg = Register(psi, ["x", "y", "z"])
    perm = reg.state(["z", "x", "y"])
    assert fidelity(perm, psi.permuted([2, 0, 1])) == pytest.approx(1.0)
    with pytest.raises(SimulatorError):
        reg.state(["x", "y"])
    with pytest.raises(SimulatorError):
        reg.add("x")
    with pytest.raises(SimulatorError):
        reg.apply(HADAMARD, ["w"])


def test_register_cap():
    reg = Register(zero_state(MAX_QUBITS), list(range(MAX_QUBITS)))
    with pytest.raises(SimulatorError, match="cap"):
        reg.add("extra")


def test_register_discard_group():
    reg = Register(product_state([ZERO, PLUS]), ["p", "q"])
    reg.prepare("bell", ["r", "s"])
    reg.discard("r", "s")
    assert reg.labels == ["p", "q"]
