"""Pauli-frame bookkeeping: byproduct bits, Clifford conjugation and update rules.

A frame holds, for each logical wire, the exponents ``(a, b)`` of the known
byproduct ``X^a Z^b`` together with the physical label currently carrying the
wire. Global phases are never tracked.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .circuit import PAULI, Gate, canonical_angle

__all__ = [
    "FrameError",
    "PauliFrame",
    "OutcomeRecord",
    "pauli_matrix",
    "compose",
    "conjugate_through",
    "conjugate_by_clifford",
    "adapted_angle",
    "frame_update",
    "PRIMITIVE_RULES",
]


class FrameError(ValueError):
    """Invalid frame operation (size mismatch, missing outcome, non-Clifford gate)."""


def pauli_matrix(a: int, b: int) -> np.ndarray:
    """``X^a Z^b`` as a 2x2 matrix."""
    m = PAULI["Z"] if b else PAULI["I"]
    return PAULI["X"] @ m if a else m.copy()


@dataclass(frozen=True)
class PauliFrame:
    """Per-wire byproduct exponents and the physical label carrying each wire."""

    a: tuple[int, ...]
    b: tuple[int, ...]
    labels: tuple[Hashable, ...]

    def __post_init__(self) -> None:
        a = tuple(int(x) for x in self.a)
        b = tuple(int(x) for x in self.b)
        if not (len(a) == len(b) == len(self.labels)):
            raise FrameError("a, b and labels must have one entry per wire")
        if any(x not in (0, 1) for x in a + b):
            raise FrameError("frame bits must be 0 or 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def identity(cls, n: int, labels: Sequence[Hashable] | None = None) -> PauliFrame:
        return cls((0,) * n, (0,) * n, tuple(range(n)) if labels is None else tuple(labels))

    @classmethod
    def from_bits(cls, a: Sequence[int], b: Sequence[int], labels: Sequence[Hashable] | None = None) -> PauliFrame:
        return cls(tuple(a), tuple(b), tuple(range(len(a))) if labels is None else tuple(labels))

    @property
    def n(self) -> int:
        return len(self.a)

    def bits(self, wire: int) -> tuple[int, int]:
        return self.a[wire], self.b[wire]

    def with_bits(self, wire: int, a: int | None = None, b: int | None = None) -> PauliFrame:
        new_a, new_b = list(self.a), list(self.b)
        if a is not None:
            new_a[wire] = a & 1
        if b is not None:
            new_b[wire] = b & 1
        return replace(self, a=tuple(new_a), b=tuple(new_b))

    def flip(self, wire: int, a: int = 0, b: int = 0) -> PauliFrame:
        """XOR ``a``/``b`` into the wire's exponents."""
        return self.with_bits(wire, self.a[wire] ^ (a & 1), self.b[wire] ^ (b & 1))

    def relabel(self, wire: int, label: Hashable) -> PauliFrame:
        labels = list(self.labels)
        labels[wire] = label
        return replace(self, labels=tuple(labels))

    def wire_matrix(self, wire: int) -> np.ndarray:
        return pauli_matrix(self.a[wire], self.b[wire])

    def matrix(self) -> np.ndarray:
        """Full byproduct operator with wire 0 as the least significant factor."""
        m = np.ones((1, 1), dtype=complex)
        for w in range(self.n):
            m = np.kron(self.wire_matrix(w), m)
        return m

    def __str__(self) -> str:
        return "a:" + "".join(map(str, self.a)) + " b:" + "".join(map(str, self.b))


@dataclass(frozen=True)
class OutcomeRecord:
    """Ordered measurement outcomes as ``(step id, bit)`` pairs."""

    entries: tuple[tuple[str, int], ...] = ()

    def add(self, step_id: str, bit: int) -> OutcomeRecord:
        return OutcomeRecord(self.entries + ((step_id, int(bit)),))

    def as_dict(self) -> dict[str, int]:
        return dict(self.entries)

    def bits(self) -> tuple[int, ...]:
        return tuple(b for _, b in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def compose(p: PauliFrame, q: PauliFrame) -> PauliFrame:
    """Product of two frames (bitwise XOR); labels are taken from ``p``."""
    if p.n != q.n:
        raise FrameError(f"frame size mismatch: {p.n} vs {q.n}")
    return replace(
        p,
        a=tuple(x ^ y for x, y in zip(p.a, q.a)),
        b=tuple(x ^ y for x, y in zip(p.b, q.b)),
    )


def _is_pauli_up_to_phase(m: np.ndarray, p: np.ndarray, tol: float = 1e-9) -> bool:
    overlap = np.vdot(p, m) / (p.shape[0])
    return abs(abs(overlap) - 1) < tol and np.allclose(m, overlap * p, atol=tol)


def conjugate_by_clifford(u: np.ndarray, a: Sequence[int], b: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Exponents ``(a', b')`` with ``u X^a Z^b u† ∝ X^a' Z^b'`` for 1- or 2-qubit ``u``.

    Factor ``k`` of the bit tuples is the ``k``-th most significant qubit of ``u``.
    Found by searching the Pauli group, so any Clifford works.
    """
    u = np.asarray(u, dtype=complex)
    k = len(a)
    if u.shape != (2**k, 2**k):
        raise FrameError("unitary size does not match the number of frame bits")

    def build(aa: Sequence[int], bb: Sequence[int]) -> np.ndarray:
        m = np.ones((1, 1), dtype=complex)
        for x, z in zip(aa, bb):
            m = np.kron(m, pauli_matrix(x, z))
        return m

    target = u @ build(a, b) @ u.conj().T
    for bits in itertools.product((0, 1), repeat=2 * k):
        aa, bb = bits[:k], bits[k:]
        if _is_pauli_up_to_phase(target, build(aa, bb)):
            return tuple(aa), tuple(bb)
    raise FrameError("unitary is not Clifford")


def conjugate_through(frame: PauliFrame, g: Gate) -> PauliFrame:
    """Return ``frame'`` with ``g · P_frame = P_frame' · g`` up to phase.

    ``g.qubits`` index logical wires. Supported: Paulis, H, H', CZ, CX, swap.
    """
    a, b = list(frame.a), list(frame.b)
    q = g.qubits
    if max(q) >= frame.n:
        raise FrameError(f"gate {g} outside frame of {frame.n} wires")
    if g.kind in ("i", "x", "y", "z"):
        pass
    elif g.kind == "h":
        (w,) = q
        a[w], b[w] = b[w], a[w]
    elif g.kind == "hp":
        # H' X H' = -X and H' Z H' = Y, so X^a Z^b -> X^(a+b) Z^b
        (w,) = q
        a[w] ^= b[w]
    elif g.kind == "cz":
        i, j = q
        b[i] ^= a[j]
        b[j] ^= a[i]
    elif g.kind == "cx":
        i, j = q
        a[j] ^= a[i]
        b[i] ^= b[j]
    elif g.kind == "swap":
        i, j = q
        a[i], a[j] = a[j], a[i]
        b[i], b[j] = b[j], b[i]
    else:
        raise FrameError(f"{g.kind} is not a Clifford gate")
    return replace(frame, a=tuple(a), b=tuple(b))


def adapted_angle(bit: int, theta: float) -> float:
    """``(-1)**bit * theta``, the sign flip that makes ``X^a Z_{±θ} X^a = Z_θ``."""
    return canonical_angle(-theta if bit & 1 else theta)


# ---------------------------------------------------------------------------
# Update rules. Each rule maps old per-wire bits and the outcome bits to new
# per-wire bits. ``w`` lists the logical wires touched (in primitive order).


def _need(outcomes: Mapping[str, int], *names: str) -> list[int]:
    missing = [n for n in names if n not in outcomes]
    if missing:
        raise FrameError(f"missing outcome bit(s) {missing}")
    return [int(outcomes[n]) & 1 for n in names]


Bits = list[list[int]]  # [[a, b] per touched wire]
Rule = Callable[[Bits, Mapping[str, int], Mapping], Bits]


def _one(fn: Callable[[int, int, Mapping[str, int], Mapping], tuple[int, int]]) -> Rule:
    def rule(bits: Bits, o: Mapping[str, int], params: Mapping) -> Bits:
        (a, b), = bits
        return [list(fn(a, b, o, params))]

    rule.arity = 1
    return rule


def _clifford_teleport(a: int, b: int, o: Mapping[str, int], params: Mapping) -> tuple[int, int]:
    c, d = _need(o, "c", "d")
    u = params.get("clifford")
    if u is None:
        raise FrameError("teleport_clifford needs params['clifford']")
    (na,), (nb,) = conjugate_by_clifford(u, [a ^ d], [b ^ c])
    return na, nb


def _two(fn: Callable[[int, int, int, int, Mapping[str, int], Mapping], tuple[int, int, int, int]]) -> Rule:
    def rule(bits: Bits, o: Mapping[str, int], params: Mapping) -> Bits:
        (a1, b1), (a2, b2) = bits
        r = fn(a1, b1, a2, b2, o, params)
        return [[r[0], r[1]], [r[2], r[3]]]

    rule.arity = 2
    return rule


def _xtcz_outputs(a1, b1, a2, b2, o, params):
    d1, d2 = _need(o, "d1", "d2")
    return a1 ^ d1, b1 ^ a2 ^ d2, a2 ^ d2, b2 ^ a1 ^ d1


def _xtcz_in_place(a1, b1, a2, b2, o, params):
    d1, d2 = _need(o, "d1", "d2")
    return a1, b1 ^ a2 ^ d2, a2, b2 ^ a1 ^ d1


def _xtcz4tqc(a1, b1, a2, b2, o, params):
    d1, d2, k1, k2 = _need(o, "d1", "d2", "k1", "k2")
    return a1, b1 ^ a2 ^ d2 ^ k1, a2, b2 ^ a1 ^ d1 ^ k2


def _xtcz5tqc(a1, b1, a2, b2, o, params):
    d1, d2, k2 = _need(o, "d1", "d2", "k2")
    return a1, b1 ^ a2 ^ d2, a2, b2 ^ a1 ^ d1 ^ k2


def _cz_coupled_z(a1, b1, a2, b2, o, params):
    c1, c2 = _need(o, "c1", "c2")
    k = int(params.get("k", 1)) & 1
    return a1, b1 ^ (a2 & k) ^ c1, a2, b2 ^ (a1 & k) ^ c2


def _cz(a1, b1, a2, b2, o, params):
    return a1, b1 ^ a2, a2, b2 ^ a1


def _remote_cz(a1, b1, a2, b2, o, params):
    if params.get("mode", "enact") == "delete":
        s1, s2 = _need(o, "s1", "s2")
        return a1, b1 ^ s1, a2, b2 ^ s2
    d1, d2 = _need(o, "d1", "d2")
    return a1, b1 ^ a2 ^ d2, a2, b2 ^ a1 ^ d1


def _remote_cz_y(a1, b1, a2, b2, o, params):
    if params.get("mode", "enact") == "delete":
        (s,) = _need(o, "s")
        return a1, b1 ^ s, a2, b2 ^ s
    _need(o, "d")  # d only selects the residual Z rotation, not a Pauli
    return a1, b1 ^ a2, a2, b2 ^ a1


PRIMITIVE_RULES: dict[str, Rule] = {
    "zt": _one(lambda a, b, o, p: (a, b ^ _need(o, "c")[0])),
    "xt": _one(lambda a, b, o, p: (a ^ _need(o, "d")[0], b)),
    "zrot": _one(lambda a, b, o, p: (a, b ^ _need(o, "c")[0])),
    "xrot": _one(lambda a, b, o, p: (a ^ _need(o, "d")[0], b)),
    "uzt": _one(lambda a, b, o, p: (0, _need(o, "c")[0])),
    "uxt": _one(lambda a, b, o, p: (_need(o, "d")[0], 0)),
    "uzttqc": _one(lambda a, b, o, p: tuple(_need(o, "k", "c"))),
    "uxttqc": _one(lambda a, b, o, p: tuple(_need(o, "d", "k"))),
    "teleportu": _one(lambda a, b, o, p: tuple(_need(o, "d", "c"))),
    "teleportgc": _one(_clifford_teleport),
    "xt_routing": _one(lambda a, b, o, p: (a ^ _need(o, "k")[0], b)),
    "zt_routing": _one(lambda a, b, o, p: (a ^ _need(o, "k")[0], b)),
    "cz": _two(_cz),
    "1bittelepcz": _two(_cz_coupled_z),
    "xtcz": _two(_xtcz_outputs),
    "xtcz2": _two(_xtcz_outputs),
    "xtcz3": _two(_xtcz_in_place),
    "xtcz4": _two(_xtcz_in_place),
    "xtcz5": _two(_xtcz_in_place),
    "xtcz4tqc": _two(_xtcz4tqc),
    "xtcz5tqc": _two(_xtcz5tqc),
    "rcz": _two(_remote_cz),
    "rcz2": _two(_remote_cz_y),
}


def frame_update(
    frame: PauliFrame,
    primitive: str,
    outcomes: Mapping[str, int] | OutcomeRecord,
    params: Mapping | None = None,
) -> PauliFrame:
    """Apply the closed-form byproduct update of one simulation primitive.

    Parameters
    ----------
    frame
        Frame before the primitive.
    primitive
        Key of :data:`PRIMITIVE_RULES`, e.g. ``"zt"``, ``"xtcz4tqc"``.
    outcomes
        Outcome bits by name (``c``, ``d``, ``k``, ``d1``, ``k2`` ...).
    params
        ``wires``: logical wires in primitive order (default ``(0,)`` or
        ``(0, 1)``); ``labels``: new physical label per touched wire, for
        primitives whose output lives on fresh qubits; plus rule-specific
        entries such as ``k`` or ``mode``.

    Examples
    --------
    >>> f = frame_update(PauliFrame.identity(1), "zt", {"c": 1})
    >>> str(f)
    'a:0 b:1'
    """
    params = dict(params or {})
    try:
        rule = PRIMITIVE_RULES[primitive]
    except KeyError:
        raise FrameError(f"unknown primitive {primitive!r}") from None
    if isinstance(outcomes, OutcomeRecord):
        outcomes = outcomes.as_dict()
    arity = rule.arity
    wires = tuple(params.get("wires", range(arity)))
    if len(wires) != arity or len(set(wires)) != arity:
        raise FrameError(f"{primitive} acts on {arity} distinct wire(s), got {wires}")
    new_bits = rule([[frame.a[w], frame.b[w]] for w in wires], outcomes, params)
    result = frame
    for w, (a, b) in zip(wires, new_bits):
        result = result.with_bits(w, a, b)
    labels = params.get("labels")
    if labels is not None:
        for w, lab in zip(wires, labels):
            result = result.relabel(w, lab)
    return result
