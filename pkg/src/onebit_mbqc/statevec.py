"""Dense state-vector simulation with Pauli-observable measurements.

Amplitudes are stored little-endian in the qubit index: qubit 0 is the least
significant bit of the basis-state index. Measurement outcome ``j`` always
means eigenvalue ``(-1)**j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .circuit import HADAMARD, PAULI, Gate, gate_matrix

__all__ = [
    "MAX_QUBITS",
    "PROB_FLOOR",
    "SimulatorError",
    "ZeroProbabilityBranch",
    "StateVector",
    "Factor",
    "ObservableSpec",
    "Rng",
    "ForcedOutcomes",
    "zero_state",
    "product_state",
    "random_state",
    "apply_matrix",
    "apply",
    "prepare",
    "measure",
    "measure_forced",
    "observable_matrix",
    "fidelity",
    "discard",
    "Register",
]

MAX_QUBITS = 24
PROB_FLOOR = 1e-14


class SimulatorError(ValueError):
    """Invalid simulator request (bad index, cap exceeded, entangled discard...)."""


class ZeroProbabilityBranch(SimulatorError):
    """A forced or sampled outcome has probability below :data:`PROB_FLOOR`."""


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitudes of ``n`` qubits, shape ``(2**n,)``."""

    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        n = int(round(math.log2(amps.size))) if amps.size else -1
        if n < 0 or 2**n != amps.size:
            raise SimulatorError(f"amplitude count {amps.size} is not a power of two")
        if n > MAX_QUBITS:
            raise SimulatorError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit cap")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > 1e-10:
            raise SimulatorError(f"state norm {norm} is not 1")
        object.__setattr__(self, "amps", amps)

    @property
    def n(self) -> int:
        return self.amps.size.bit_length() - 1

    def tensor(self, high: StateVector) -> StateVector:
        """Return ``high ⊗ self``: ``self`` keeps qubits ``0..n-1``, ``high`` goes above."""
        return StateVector(np.kron(high.amps, self.amps))

    def permuted(self, order: Sequence[int]) -> StateVector:
        """New state whose qubit ``k`` is this state's qubit ``order[k]``."""
        n = self.n
        if sorted(order) != list(range(n)):
            raise SimulatorError(f"{order} is not a permutation of {n} qubits")
        t = self.amps.reshape((2,) * n)
        # tensor axis a holds qubit n-1-a
        axes = [n - 1 - order[n - 1 - a] for a in range(n)]
        return StateVector(np.transpose(t, axes).reshape(-1))


def zero_state(n: int) -> StateVector:
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1
    return StateVector(amps)


def product_state(vectors: Sequence[np.ndarray]) -> StateVector:
    """Tensor product with ``vectors[0]`` on qubit 0."""
    amps = np.ones(1, dtype=complex)
    for v in vectors:
        v = np.asarray(v, dtype=complex)
        amps = np.kron(v / np.linalg.norm(v), amps)
    return StateVector(amps)


def random_state(rng: np.random.Generator, n: int, entangled: bool = False) -> StateVector:
    """Haar-random product state of ``n`` qubits, or a Haar-random joint state."""
    if entangled:
        v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        return StateVector(v / np.linalg.norm(v))
    vecs = [rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(n)]
    return product_state(vecs)


def _check_qubits(n: int, qubits: Sequence[int]) -> None:
    if len(set(qubits)) != len(qubits):
        raise SimulatorError(f"repeated qubit in {tuple(qubits)}")
    for q in qubits:
        if not 0 <= q < n:
            raise SimulatorError(f"qubit {q} out of range for {n} qubits")


def _apply(amps: np.ndarray, n: int, matrix: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    k = len(qubits)
    t = amps.reshape((2,) * n)
    m = np.asarray(matrix, dtype=complex).reshape((2,) * (2 * k))
    axes = [n - 1 - q for q in qubits]
    out = np.tensordot(m, t, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes).reshape(-1)


def apply_matrix(state: StateVector, matrix: np.ndarray, qubits: Sequence[int]) -> StateVector:
    """Apply a ``2**k`` square matrix; ``qubits[0]`` is its most significant factor."""
    _check_qubits(state.n, qubits)
    return StateVector(_apply(state.amps, state.n, matrix, qubits))


def apply(state: StateVector, g: Gate) -> StateVector:
    return apply_matrix(state, gate_matrix(g), g.qubits)


def prepare(kind: str, at: Sequence[int], state: StateVector) -> StateVector:
    """Install ``zero``, ``plus``, ``bell`` (|00>+|11>)/√2 or ``czpp`` CZ|++> on fresh slots.

    A fresh slot is a qubit currently in |0> and unentangled with the rest.
    """
    arity = {"zero": 1, "plus": 1, "bell": 2, "czpp": 2}
    if kind not in arity:
        raise SimulatorError(f"unknown preparation {kind!r}")
    if len(at) != arity[kind]:
        raise SimulatorError(f"{kind} needs {arity[kind]} slot(s)")
    _check_qubits(state.n, at)
    t = state.amps.reshape((2,) * state.n)
    for q in at:
        excited = np.take(t, 1, axis=state.n - 1 - q)
        if np.linalg.norm(excited) > 1e-10:
            raise SimulatorError(f"slot {q} already in use")
    amps = state.amps
    if kind in ("plus", "bell", "czpp"):
        amps = _apply(amps, state.n, HADAMARD, [at[0]])
    if kind == "czpp":
        amps = _apply(amps, state.n, HADAMARD, [at[1]])
        amps = _apply(amps, state.n, gate_matrix(Gate.cz(0, 1)), at)
    if kind == "bell":
        amps = _apply(amps, state.n, gate_matrix(Gate.cx(0, 1)), at)
    return StateVector(amps)


@dataclass(frozen=True, eq=False)
class Factor:
    """One tensor factor ``conj† · P · conj`` of an observable."""

    qubit: Hashable
    pauli: str
    conj: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.pauli not in ("X", "Y", "Z"):
            raise SimulatorError(f"base Pauli must be X, Y or Z, got {self.pauli!r}")

    def matrix(self) -> np.ndarray:
        p = PAULI[self.pauli]
        if self.conj is None:
            return p
        u = np.asarray(self.conj, dtype=complex)
        return u.conj().T @ p @ u


@dataclass(frozen=True, eq=False)
class ObservableSpec:
    """A tensor product of (possibly conjugated) Pauli factors on distinct qubits."""

    factors: tuple[Factor, ...]

    def __post_init__(self) -> None:
        factors = tuple(self.factors)
        qubits = [f.qubit for f in factors]
        if not factors or len(set(qubits)) != len(qubits):
            raise SimulatorError("observable needs factors on distinct qubits")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, *spec: tuple) -> ObservableSpec:
        """Shorthand: ``ObservableSpec.of((0, "Z"), (1, "X", u))``."""
        return cls(tuple(Factor(*s) for s in spec))

    @property
    def qubits(self) -> tuple:
        return tuple(f.qubit for f in self.factors)


def observable_matrix(obs: ObservableSpec) -> np.ndarray:
    """Dense matrix of ``obs`` with the first factor most significant."""
    m = np.ones((1, 1), dtype=complex)
    for f in obs.factors:
        m = np.kron(m, f.matrix())
    return m


class Rng:
    """Seeded outcome source; the ``s``-th draw of trial ``t`` depends only on (seed, t, s)."""

    def __init__(self, seed: int, trial: int = 0) -> None:
        self.seed = int(seed)
        self.trial = int(trial)
        self.counter = 0
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, self.trial])))

    def random(self) -> float:
        self.counter += 1
        return float(self._gen.random())

    def choose(self, p0: float) -> int:
        """Sample an outcome bit given the probability of outcome 0."""
        return 0 if self.random() < p0 else 1


class ForcedOutcomes:
    """Outcome source that replays a fixed bit sequence."""

    def __init__(self, bits: Iterable[int]) -> None:
        self.bits = tuple(int(b) for b in bits)
        self.counter = 0

    def choose(self, p0: float) -> int:
        if self.counter >= len(self.bits):
            raise SimulatorError("forced outcome sequence exhausted")
        bit = self.bits[self.counter]
        self.counter += 1
        if (p0 if bit == 0 else 1 - p0) < PROB_FLOOR:
            raise ZeroProbabilityBranch(f"forced outcome {bit} has probability 0")
        return bit


def _branch(amps: np.ndarray, n: int, obs: ObservableSpec) -> tuple[np.ndarray, np.ndarray, float]:
    o_psi = amps
    for f in obs.factors:
        o_psi = _apply(o_psi, n, f.matrix(), [f.qubit])
    plus = (amps + o_psi) / 2
    minus = (amps - o_psi) / 2
    p0 = float(np.vdot(plus, plus).real)
    return plus, minus, p0


def measure(state: StateVector, obs: ObservableSpec, rng) -> tuple[int, StateVector, float]:
    """Projectively measure ``obs``; ``rng`` is any object with ``choose(p0) -> bit``."""
    _check_qubits(state.n, obs.qubits)
    plus, minus, p0 = _branch(state.amps, state.n, obs)
    bit = rng.choose(p0)
    post, prob = (plus, p0) if bit == 0 else (minus, 1 - p0)
    if prob < PROB_FLOOR:
        raise ZeroProbabilityBranch(f"outcome {bit} has probability {prob}")
    return bit, StateVector(post / math.sqrt(prob)), prob


def measure_forced(state: StateVector, obs: ObservableSpec, branch: int) -> tuple[StateVector, float]:
    _, post, prob = measure(state, obs, ForcedOutcomes([branch]))
    return post, prob


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|``; global phases are ignored."""
    if a.n != b.n:
        raise SimulatorError(f"size mismatch: {a.n} vs {b.n} qubits")
    return float(abs(np.vdot(a.amps, b.amps)))


def _split(amps: np.ndarray, n: int, q: int) -> np.ndarray:
    """View as (2, 2**(n-1)) with qubit ``q`` as the row index."""
    t = amps.reshape((2,) * n)
    return np.moveaxis(t, n - 1 - q, 0).reshape(2, -1)


def _split_group(amps: np.ndarray, n: int, qubits: Sequence[int]) -> np.ndarray:
    """View as (2**k, 2**(n-k)) with ``qubits`` (first most significant) as row index."""
    t = amps.reshape((2,) * n)
    axes = [n - 1 - q for q in qubits]
    return np.moveaxis(t, axes, list(range(len(axes)))).reshape(2 ** len(axes), -1)


def discard(state: StateVector, qubit: int | Sequence[int], tol: float = 1e-10) -> StateVector:
    """Remove a qubit, or a group of qubits, in a product state with the rest.

    Raises
    ------
    SimulatorError
        If the removed part is still entangled (mixedness above ``tol``).
    """
    qubits = [qubit] if isinstance(qubit, (int, np.integer)) else list(qubit)
    _check_qubits(state.n, qubits)
    return StateVector(_discard(state.amps, state.n, qubits, tol))


def _discard(amps: np.ndarray, n: int, qubits: Sequence[int], tol: float = 1e-10) -> np.ndarray:
    m = _split_group(amps, n, qubits)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size > 1 and s[1] ** 2 > tol:
        raise SimulatorError(f"qubits {list(qubits)} are entangled with the rest")
    rest = u[:, 0].conj() @ m
    return rest / np.linalg.norm(rest)


class Register:
    """A working state whose qubits are addressed by arbitrary hashable labels.

    Qubit positions shift when qubits are removed, so executors use labels.
    Not thread-safe; each execution owns its register.
    """

    def __init__(self, state: StateVector | None = None, labels: Sequence[Hashable] = ()) -> None:
        if state is None:
            state = StateVector(np.ones(1, dtype=complex))
        if len(labels) != state.n:
            raise SimulatorError("one label per qubit required")
        self.amps = state.amps.copy()
        self.labels: list[Hashable] = list(labels)
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        self.peak = len(self.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def _pos(self, label: Hashable) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise SimulatorError(f"no live qubit labelled {label!r}") from None

    def add(self, label: Hashable, vector: np.ndarray | None = None) -> None:
        """Append a qubit in ``vector`` (default |0>) as the new most significant qubit."""
        if label in self.index:
            raise SimulatorError(f"label {label!r} already live")
        if self.n + 1 > MAX_QUBITS:
            raise SimulatorError(f"live qubits would exceed the {MAX_QUBITS}-qubit cap")
        v = np.array([1, 0], dtype=complex) if vector is None else np.asarray(vector, dtype=complex)
        self.amps = np.kron(v / np.linalg.norm(v), self.amps)
        self.index[label] = self.n
        self.labels.append(label)
        self.peak = max(self.peak, self.n)

    def prepare(self, kind: str, labels: Sequence[Hashable]) -> None:
        for lab in labels:
            self.add(lab)
        state = prepare(kind, [self._pos(lab) for lab in labels], StateVector(self.amps))
        self.amps = state.amps

    def apply(self, matrix: np.ndarray, labels: Sequence[Hashable]) -> None:
        self.amps = _apply(self.amps, self.n, matrix, [self._pos(lab) for lab in labels])

    def measure(self, obs: ObservableSpec, source) -> tuple[int, float]:
        positional = ObservableSpec(
            tuple(Factor(self._pos(f.qubit), f.pauli, f.conj) for f in obs.factors)
        )
        bit, post, prob = measure(StateVector(self.amps), positional, source)
        self.amps = post.amps
        return bit, prob

    def measure_out(self, label: Hashable, conj: np.ndarray | None, source) -> tuple[int, float]:
        """Measure ``conj† Z conj`` on one qubit and remove it in the same step."""
        q = self._pos(label)
        m = _split(self.amps, self.n, q)
        rows = m if conj is None else np.asarray(conj, dtype=complex) @ m
        p0 = float(np.vdot(rows[0], rows[0]).real)
        bit = source.choose(p0)
        prob = p0 if bit == 0 else 1 - p0
        if prob < PROB_FLOOR:
            raise ZeroProbabilityBranch(f"outcome {bit} has probability {prob}")
        self._drop(q, rows[bit] / math.sqrt(prob))
        return bit, prob

    def discard(self, *labels: Hashable) -> None:
        """Remove qubits that jointly form a product factor of the state."""
        positions = [self._pos(lab) for lab in labels]
        amps = _discard(self.amps, self.n, positions)
        for lab in labels:
            self._forget(lab)
        self.amps = amps

    def _drop(self, q: int, amps: np.ndarray) -> None:
        self._forget(self.labels[q])
        self.amps = amps.reshape(-1)

    def _forget(self, label: Hashable) -> None:
        q = self.index.pop(label)
        self.labels.pop(q)
        for i in range(q, len(self.labels)):
            self.index[self.labels[i]] = i

    def state(self, labels: Sequence[Hashable] | None = None) -> StateVector:
        """Current state with qubit ``k`` taken from ``labels[k]``."""
        full = StateVector(self.amps)
        if labels is None:
            return full
        if len(labels) != self.n or set(labels) != set(self.labels):
            raise SimulatorError(f"labels {list(labels)} do not cover live qubits {self.labels}")
        return full.permuted([self._pos(lab) for lab in labels])
