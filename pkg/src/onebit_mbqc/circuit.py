"""Circuit intermediate representation, gate matrices and cycle normalization.

Qubit 0 is the least significant bit of a basis-state index. Two-qubit gate
matrices are written in the basis ``|q_first q_second>`` with the first listed
qubit as the more significant factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

import numpy as np

__all__ = [
    "ANGLE_TOL",
    "Gate",
    "Circuit",
    "Cycle",
    "CycleForm",
    "CircuitError",
    "EulerAngles",
    "canonical_angle",
    "xrot_matrix",
    "zrot_matrix",
    "gate_matrix",
    "parse_circuit",
    "format_circuit",
    "euler_decompose",
    "euler_matrix",
    "elementary_gates",
    "normalize_to_cycles",
    "cycles_to_circuit",
    "is_unitary",
    "random_cycle_form",
    "PAULI",
    "HADAMARD",
    "HPRIME",
    "CZ_MATRIX",
    "CX_MATRIX",
    "SWAP_MATRIX",
]

ANGLE_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
PAULI = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = (PAULI["X"] + PAULI["Z"]) / math.sqrt(2)
HPRIME = (PAULI["Z"] + PAULI["Y"]) / math.sqrt(2)
CZ_MATRIX = np.diag([1, 1, 1, -1]).astype(complex)
CX_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

_SINGLE_KINDS = ("i", "x", "y", "z", "h", "hp")
_ROTATION_KINDS = ("xrot", "zrot")
_TWO_KINDS = ("cz", "cx", "swap")
GATE_KINDS = _SINGLE_KINDS + _ROTATION_KINDS + _TWO_KINDS


class CircuitError(ValueError):
    """Raised for malformed circuits, gates or circuit files."""


def canonical_angle(theta: float) -> float:
    """Map an angle into (-pi, pi].

    ``e^{-i(theta + 2 pi) P} = e^{-i theta P}`` exactly, so this never changes
    the rotation matrix.
    """
    theta = float(theta)
    if not math.isfinite(theta):
        raise CircuitError(f"angle must be finite, got {theta!r}")
    wrapped = math.remainder(theta, 2 * math.pi)
    if wrapped <= -math.pi + ANGLE_TOL:
        wrapped = math.pi
    return wrapped


def xrot_matrix(theta: float) -> np.ndarray:
    """``X_theta = exp(-i theta X)``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def zrot_matrix(theta: float) -> np.ndarray:
    """``Z_theta = exp(-i theta Z)``."""
    return np.diag([np.exp(-1j * theta), np.exp(1j * theta)])


def is_unitary(u: np.ndarray, tol: float = 1e-12) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.allclose(u @ u.conj().T, np.eye(u.shape[0]), atol=tol, rtol=0))


@dataclass(frozen=True)
class Gate:
    """One gate of a circuit.

    Parameters
    ----------
    kind
        Lower-case mnemonic, one of ``i x y z h hp xrot zrot cz cx swap``.
    qubits
        Target qubit indices; for ``cx`` the order is (control, target).
    angle
        Rotation angle in radians for ``xrot``/``zrot``, canonicalized into
        (-pi, pi]; ``None`` for every other kind.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self) -> None:
        kind = self.kind.lower()
        if kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        arity = 2 if kind in _TWO_KINDS else 1
        if len(qubits) != arity:
            raise CircuitError(f"{kind} takes {arity} qubit(s), got {len(qubits)}")
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"{kind} qubits must be distinct, got {qubits}")
        if any(q < 0 for q in qubits):
            raise CircuitError(f"negative qubit index in {qubits}")
        if kind in _ROTATION_KINDS:
            if self.angle is None:
                raise CircuitError(f"{kind} needs an angle")
            object.__setattr__(self, "angle", canonical_angle(self.angle))
        elif self.angle is not None:
            raise CircuitError(f"{kind} takes no angle")

    @property
    def is_single(self) -> bool:
        return len(self.qubits) == 1

    def __str__(self) -> str:
        args = " ".join(str(q) for q in self.qubits)
        if self.angle is not None:
            return f"{self.kind} {args} {self.angle!r}"
        return f"{self.kind} {args}"

    # Convenience constructors.
    @classmethod
    def xrot(cls, q: int, theta: float) -> Gate:
        return cls("xrot", (q,), theta)

    @classmethod
    def zrot(cls, q: int, theta: float) -> Gate:
        return cls("zrot", (q,), theta)

    @classmethod
    def cz(cls, i: int, j: int) -> Gate:
        return cls("cz", (i, j))

    @classmethod
    def cx(cls, control: int, target: int) -> Gate:
        return cls("cx", (control, target))


_FIXED_MATRICES = {
    "i": I2,
    "x": PAULI["X"],
    "y": PAULI["Y"],
    "z": PAULI["Z"],
    "h": HADAMARD,
    "hp": HPRIME,
    "cz": CZ_MATRIX,
    "cx": CX_MATRIX,
    "swap": SWAP_MATRIX,
}


def gate_matrix(g: Gate) -> np.ndarray:
    """Return the unitary of ``g`` (2x2 or 4x4, first listed qubit most significant)."""
    if g.kind == "xrot":
        return xrot_matrix(g.angle)
    if g.kind == "zrot":
        return zrot_matrix(g.angle)
    return _FIXED_MATRICES[g.kind].copy()


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list over ``width`` qubits."""

    width: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        if self.width < 0:
            raise CircuitError("width must be non-negative")
        gates = tuple(self.gates)
        for g in gates:
            if not isinstance(g, Gate):
                raise CircuitError(f"not a Gate: {g!r}")
            if max(g.qubits) >= self.width:
                raise CircuitError(
                    f"gate {g} uses qubit {max(g.qubits)} outside width {self.width}"
                )
        object.__setattr__(self, "gates", gates)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def cz_count(self) -> int:
        return sum(g.kind == "cz" for g in self.gates)


def parse_circuit(text: str) -> Circuit:
    """Parse the line-based circuit format.

    The first meaningful line is ``qubits <n>``; every following line holds one
    gate such as ``h 0``, ``xrot 1 0.25`` or ``cx 0 1``. ``#`` starts a comment.

    Raises
    ------
    CircuitError
        With the offending line number for any malformed line.
    """
    width: int | None = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0].lower()
        try:
            if width is None:
                if head != "qubits" or len(words) != 2:
                    raise CircuitError("expected header 'qubits <n>'")
                width = int(words[1])
                if width < 0:
                    raise CircuitError("qubit count must be non-negative")
                continue
            if head == "qubits":
                raise CircuitError("duplicate 'qubits' header")
            if head not in GATE_KINDS:
                raise CircuitError(f"unknown gate mnemonic {words[0]!r}")
            if head in _ROTATION_KINDS:
                if len(words) != 3:
                    raise CircuitError(f"{head} expects '<qubit> <radians>'")
                gate = Gate(head, (int(words[1]),), float(words[2]))
            else:
                arity = 2 if head in _TWO_KINDS else 1
                if len(words) != arity + 1:
                    raise CircuitError(f"{head} expects {arity} qubit index(es)")
                gate = Gate(head, tuple(int(w) for w in words[1:]))
            if max(gate.qubits) >= width:
                raise CircuitError(
                    f"qubit index {max(gate.qubits)} out of range for width {width}"
                )
            gates.append(gate)
        except (CircuitError, ValueError) as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
    if width is None:
        raise CircuitError("missing 'qubits <n>' header")
    return Circuit(width, tuple(gates))


def format_circuit(c: Circuit) -> str:
    """Inverse of :func:`parse_circuit` (angles written with ``repr``)."""
    lines = [f"qubits {c.width}"]
    lines.extend(str(g) for g in c.gates)
    return "\n".join(lines) + "\n"


class EulerAngles(NamedTuple):
    """``u = phase * Z_theta3 @ X_theta2 @ Z_theta1``."""

    theta1: float
    theta2: float
    theta3: float
    phase: complex


def euler_matrix(theta1: float, theta2: float, theta3: float) -> np.ndarray:
    return zrot_matrix(theta3) @ xrot_matrix(theta2) @ zrot_matrix(theta1)


def _half_turn(theta: float) -> float:
    """Reduce modulo pi into (-pi/2, pi/2]; ``Z_{t+pi} = -Z_t`` so only the phase moves."""
    r = math.remainder(theta, math.pi)
    if r <= -math.pi / 2 + ANGLE_TOL:
        r += math.pi
    return r


def euler_decompose(u: np.ndarray, tol: float = 1e-10) -> EulerAngles:
    """Write a 2x2 unitary as ``phase * Z_theta3 X_theta2 Z_theta1``.

    The branch is canonical: ``theta2`` lies in [0, pi/2], ``theta1`` and
    ``theta3`` in (-pi/2, pi/2], and whenever the split between the two Z
    angles is free, ``theta1 = 0``.

    Examples
    --------
    >>> t1, t2, t3, phase = euler_decompose(HADAMARD)
    >>> [round(t / math.pi, 6) for t in (t1, t2, t3)], complex(np.round(phase, 6))
    ([0.25, 0.25, 0.25], 1j)
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u, 1e-9):
        raise CircuitError("euler_decompose needs a 2x2 unitary")
    v = u / np.sqrt(np.linalg.det(u))
    cos_b = min(1.0, abs(v[0, 0]))
    theta2 = math.atan2(abs(v[0, 1]), abs(v[0, 0]))
    total = -np.angle(v[0, 0])  # theta1 + theta3
    diff = np.angle(1j * v[0, 1])  # theta1 - theta3
    if math.sin(theta2) < tol:
        theta2, theta1, theta3 = 0.0, 0.0, total
    elif cos_b < tol:
        theta2, theta1, theta3 = math.pi / 2, 0.0, -diff
    else:
        theta1, theta3 = (total + diff) / 2, (total - diff) / 2
    theta1, theta3 = _half_turn(theta1), _half_turn(theta3)
    if abs(theta1) < ANGLE_TOL:
        theta1 = 0.0
    if abs(theta3) < ANGLE_TOL:
        theta3 = 0.0
    m = euler_matrix(theta1, theta2, theta3)
    phase = np.trace(m.conj().T @ u) / 2
    phase /= abs(phase)
    return EulerAngles(theta1, theta2, theta3, complex(phase))


@dataclass(frozen=True)
class Cycle:
    """X rotations, then Z rotations together with a layer of nearest-neighbour CZ."""

    x: tuple[float, ...]
    z: tuple[float, ...]
    cz: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self) -> None:
        if len(self.x) != len(self.z):
            raise CircuitError("x and z layers must have the same width")
        object.__setattr__(self, "x", tuple(canonical_angle(t) for t in self.x))
        object.__setattr__(self, "z", tuple(canonical_angle(t) for t in self.z))
        pairs = frozenset((int(i), int(j)) for i, j in self.cz)
        used: set[int] = set()
        for i, j in pairs:
            if j != i + 1:
                raise CircuitError(f"cz pair {(i, j)} is not nearest-neighbour (i, i+1)")
            if i < 0 or j >= len(self.x):
                raise CircuitError(f"cz pair {(i, j)} outside width {len(self.x)}")
            if i in used or j in used:
                raise CircuitError(f"cz pairs overlap in layer {sorted(pairs)}")
            used.update((i, j))
        object.__setattr__(self, "cz", pairs)

    @property
    def width(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class CycleForm:
    """A circuit written as alternating single-qubit rotations and CZ layers."""

    width: int
    cycles: tuple[Cycle, ...] = field(default=())

    def __post_init__(self) -> None:
        cycles = tuple(self.cycles)
        for cyc in cycles:
            if cyc.width != self.width:
                raise CircuitError("cycle width does not match form width")
        object.__setattr__(self, "cycles", cycles)

    @property
    def m(self) -> int:
        return len(self.cycles)


def cycles_to_circuit(cf: CycleForm) -> Circuit:
    """Replay a cycle form as a plain gate list (zero angles are skipped)."""
    gates: list[Gate] = []
    for cyc in cf.cycles:
        gates.extend(Gate.xrot(q, t) for q, t in enumerate(cyc.x) if t != 0.0)
        gates.extend(Gate.zrot(q, t) for q, t in enumerate(cyc.z) if t != 0.0)
        gates.extend(Gate.cz(i, j) for i, j in sorted(cyc.cz))
    return Circuit(cf.width, tuple(gates))


def _adjacent_swap(k: int) -> list[Gate]:
    # swap = CX(k,k+1) CX(k+1,k) CX(k,k+1), each CX(c,t) = H_t CZ H_t
    out: list[Gate] = []
    for c, t in ((k, k + 1), (k + 1, k), (k, k + 1)):
        out += [Gate("h", (t,)), Gate.cz(c, t), Gate("h", (t,))]
    return out


def elementary_gates(c: Circuit, nearest_neighbor: bool = True) -> list[Gate]:
    """Rewrite ``c`` into single-qubit gates and CZ only.

    ``cx`` becomes ``H CZ H`` on the target and ``swap`` becomes three CX. With
    ``nearest_neighbor`` set, long-range CZ and swaps are routed through chains
    of adjacent swaps so that every CZ acts on a pair ``(i, i+1)``.
    """
    out: list[Gate] = []
    for g in c.gates:
        if g.is_single:
            out.append(g)
        elif g.kind == "cx":
            ctrl, tgt = g.qubits
            out += _cz_elementary(ctrl, tgt, nearest_neighbor, h_on=tgt)
        elif g.kind == "cz":
            out += _cz_elementary(*g.qubits, nearest_neighbor)
        elif g.kind == "swap":
            lo, hi = sorted(g.qubits)
            if nearest_neighbor:
                chain = list(range(lo, hi)) + list(range(hi - 2, lo - 1, -1))
                for k in chain:
                    out += _adjacent_swap(k)
            else:
                for ctrl, tgt in ((lo, hi), (hi, lo), (lo, hi)):
                    out += [Gate("h", (tgt,)), Gate.cz(ctrl, tgt), Gate("h", (tgt,))]
        else:  # pragma: no cover - Gate validates kinds
            raise CircuitError(f"unsupported gate {g}")
    return out


def _cz_elementary(i: int, j: int, nearest_neighbor: bool, h_on: int | None = None) -> list[Gate]:
    lo, hi = sorted((i, j))
    wrap = [Gate("h", (h_on,))] if h_on is not None else []
    if not nearest_neighbor or hi == lo + 1:
        return wrap + [Gate.cz(lo, hi)] + wrap
    # Move lo next to hi, act, and move it back; an H on the moving qubit
    # travels with it, so apply it before and after the whole chain.
    there: list[Gate] = []
    for k in range(lo, hi - 1):
        there += _adjacent_swap(k)
    back: list[Gate] = []
    for k in range(hi - 2, lo - 1, -1):
        back += _adjacent_swap(k)
    return wrap + there + [Gate.cz(hi - 1, hi)] + back + wrap


def _is_diagonal(u: np.ndarray, tol: float = 1e-12) -> bool:
    return abs(u[0, 1]) < tol and abs(u[1, 0]) < tol


def _layered(c: Circuit) -> tuple[list[list[np.ndarray]], list[frozenset[tuple[int, int]]]]:
    """Group an elementary stream into single-qubit gaps separated by CZ layers."""
    n = c.width
    gaps: list[list[np.ndarray]] = []
    layers: list[set[tuple[int, int]]] = []
    pending = [I2.copy() for _ in range(n)]
    dirty = [False] * n
    for g in elementary_gates(c, nearest_neighbor=True):
        if g.is_single:
            (q,) = g.qubits
            pending[q] = gate_matrix(g) @ pending[q]
            dirty[q] = True
            continue
        pair = tuple(sorted(g.qubits))
        busy = {q for p in layers[-1] for q in p} if layers else set()
        if layers and not dirty[pair[0]] and not dirty[pair[1]] and not busy & set(pair):
            layers[-1].add(pair)
        else:
            gaps.append(pending)
            pending = [I2.copy() for _ in range(n)]
            dirty = [False] * n
            layers.append({pair})
    gaps.append(pending)
    return gaps, [frozenset(layer) for layer in layers]


def normalize_to_cycles(c: Circuit) -> CycleForm:
    """Rewrite a circuit as alternating X-rotation and (Z-rotation + CZ) cycles.

    Each single-qubit gap ``U`` between CZ layers is split as ``Z X Z`` by
    :func:`euler_decompose`; the trailing Z of one gap and the leading Z of the
    next commute with the CZ layer between them and merge into one angle.
    Purely diagonal gaps after the first CZ layer fold entirely into the
    preceding cycle's Z layer.
    """
    n = c.width
    gaps, layers = _layered(c)
    angles: list[list[tuple[float, float, float]]] = []
    for j, gap in enumerate(gaps):
        row = []
        for u in gap:
            if j > 0 and _is_diagonal(u):
                row.append((canonical_angle(np.angle(u[1, 1] / u[0, 0]) / 2), 0.0, 0.0))
            else:
                t1, t2, t3, _ = euler_decompose(u)
                row.append((t1, t2, t3))
        angles.append(row)

    def nonzero(vals: Iterable[float]) -> bool:
        return any(abs(v) > ANGLE_TOL for v in vals)

    zeros = (0.0,) * n
    cycles: list[Cycle] = []
    first = [a for a, _, _ in angles[0]]
    if nonzero(first):
        cycles.append(Cycle(zeros, tuple(first)))
    for j, layer in enumerate(layers, start=1):
        prev, cur = angles[j - 1], angles[j]
        x = tuple(prev[q][1] for q in range(n))
        z = tuple(prev[q][2] + cur[q][0] for q in range(n))
        cycles.append(Cycle(x, z, layer))
    last = angles[-1]
    tail_x = tuple(last[q][1] for q in range(n))
    tail_z = tuple(last[q][2] for q in range(n))
    if nonzero(tail_x) or nonzero(tail_z):
        cycles.append(Cycle(tail_x, tail_z))
    return CycleForm(n, tuple(cycles))


def random_cycle_form(
    rng: np.random.Generator, n: int, m: int, cz_probability: float = 0.5
) -> CycleForm:
    """Draw a cycle form with X angles in (0, pi/2) and Z angles in (-pi/2, pi/2).

    Those ranges match the canonical Euler branch. For ``n >= 2`` every cycle
    carries at least one CZ, so no two cycles merge and normalizing the
    replayed circuit gives back exactly ``m`` cycles.
    """
    cycles = []
    for _ in range(m):
        x = tuple(rng.uniform(0.05, math.pi / 2 - 0.05, size=n))
        z = tuple(rng.uniform(-math.pi / 2 + 0.05, math.pi / 2 - 0.05, size=n))
        pairs = []
        i = 0
        while i < n - 1:
            if rng.random() < cz_probability:
                pairs.append((i, i + 1))
                i += 1
            i += 1
        if n >= 2 and not pairs:
            i = int(rng.integers(0, n - 1))
            pairs.append((i, i + 1))
        cycles.append(Cycle(x, z, frozenset(pairs)))
    return CycleForm(n, tuple(cycles))

