"""Explicit register circuits for the teleportation primitives and the circuit identities.

Each :class:`Fragment` is a small circuit acting on one or two data wires
carrying a known Pauli frame. Running it under a forced outcome branch gives a
physical output that should equal ``P' · U · ψ`` where ``P'`` comes from the
closed-form frame rules of :mod:`onebit_mbqc.pauli` and ``U`` is the ideal gate.
The verifier enumerates the branches; this module only builds the circuits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .circuit import CX_MATRIX, CZ_MATRIX, HADAMARD, HPRIME, PAULI, xrot_matrix, zrot_matrix
from .pauli import PauliFrame, frame_update, pauli_matrix
from .statevec import ObservableSpec, Register, StateVector, apply_matrix
from .tqc import compile_cz, compile_single_qubit, execute

__all__ = [
    "Fragment",
    "FragmentRun",
    "FRAGMENTS",
    "CountingSource",
    "fragment",
    "fragment_names",
    "remote_cz_residual",
    "MATRIX_IDENTITIES",
    "identity_distance",
    "BranchIdentity",
    "BRANCH_IDENTITIES",
    "upside_down_cx",
]

I2 = PAULI["I"]
X, Z = PAULI["X"], PAULI["Z"]
# A fixed non-Clifford unitary for the U-dependent fragments.
DEFAULT_U = xrot_matrix(0.37) @ zrot_matrix(-1.21) @ xrot_matrix(0.58)
DEFAULT_THETA = 0.7
DEFAULT_THETAS = (0.7, -0.45)


def _kron(*ms: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


def upside_down_cx() -> np.ndarray:
    """CX with the second qubit as control and the first as target."""
    swap = np.eye(4, dtype=complex)[[0, 2, 1, 3]]
    return swap @ CX_MATRIX @ swap


@dataclass(frozen=True)
class FragmentRun:
    """One executed branch: outcome bits by name, wire-ordered output and its probability."""

    outcomes: dict[str, int]
    output: StateVector
    probability: float


Builder = Callable[[Register, PauliFrame, object], tuple[dict[str, int], "tuple | StateVector"]]


@dataclass(frozen=True, eq=False)
class Fragment:
    """A primitive circuit together with its predicted frame and ideal gate.

    Parameters
    ----------
    name
        Catalog key.
    wires
        Number of data wires (1 or 2).
    outcome_count
        Number of binary outcomes, i.e. ``log2`` of the branch count.
    build
        ``build(reg, frame, source)`` acts on a register holding the data
        wires under labels ``("in", w)`` and returns the outcome bits by name
        together with the output labels in wire order (or the output state
        itself for fragments delegated to the schedule executor).
    rules
        Frame rules ``(rule, params)`` applied in order to predict the output frame.
    ideal
        ``ideal(frame, outcomes)`` gives the gate enacted up to the predicted
        frame, wire 0 as the most significant tensor factor. Most fragments
        ignore both arguments.
    """

    name: str
    wires: int
    outcome_count: int
    build: Builder
    rules: tuple[tuple[str, Mapping], ...]
    ideal: Callable[[PauliFrame, Mapping[str, int]], np.ndarray]
    summary: str = ""
    delegated: bool = field(default=False)

    def run(self, physical: StateVector, frame: PauliFrame, source) -> FragmentRun:
        """Execute on ``physical`` (the input with ``frame`` already applied)."""
        if physical.n != self.wires or frame.n != self.wires:
            raise ValueError(f"{self.name} acts on {self.wires} wire(s)")
        reg = Register(physical, [("in", w) for w in range(self.wires)])
        counting = CountingSource(source)
        outcomes, output = self.build(reg, frame, counting)
        if not isinstance(output, StateVector):
            output = reg.state(list(output))
        return FragmentRun(dict(outcomes), output, counting.probability)

    def predicted_frame(self, frame: PauliFrame, outcomes: Mapping[str, int]) -> PauliFrame:
        for rule, params in self.rules:
            frame = frame_update(frame, rule, outcomes, params)
        return frame

    def expected_output(self, psi: StateVector, frame: PauliFrame, outcomes: Mapping[str, int]) -> StateVector:
        """``P' · U · ψ`` with ``ψ`` the error-free input."""
        out = apply_matrix(psi, self.ideal(frame, outcomes), list(range(self.wires)))
        predicted = self.predicted_frame(frame, outcomes)
        for w in range(self.wires):
            out = apply_matrix(out, predicted.wire_matrix(w), [w])
        return out


class CountingSource:
    """Outcome source wrapper that accumulates the branch probability."""

    def __init__(self, source) -> None:
        self.source = source
        self.probability = 1.0

    def choose(self, p0: float) -> int:
        bit = self.source.choose(p0)
        self.probability *= p0 if bit == 0 else 1 - p0
        return bit


# -- register helpers --------------------------------------------------------


def _m(reg: Register, label, source, basis: np.ndarray | None = None) -> int:
    """Measure ``basis† Z basis`` on ``label`` and remove it."""
    return reg.measure_out(label, basis, source)[0]


def _m_obs(reg: Register, obs: ObservableSpec, source) -> int:
    return reg.measure(obs, source)[0]


def _plus(reg: Register, label) -> None:
    reg.add(label, np.array([1, 1]) / math.sqrt(2))


def _zero(reg: Register, label) -> None:
    reg.add(label)


def _cx(reg: Register, control, target) -> None:
    reg.apply(CX_MATRIX, [control, target])


def _cz(reg: Register, u, v) -> None:
    reg.apply(CZ_MATRIX, [u, v])


IN0, IN1 = ("in", 0), ("in", 1)


# -- one-wire teleportations -------------------------------------------------


def _zt_body(reg: Register, source, src=IN0, dst=("anc", 0)) -> int:
    _zero(reg, dst)
    _cx(reg, src, dst)
    reg.apply(HADAMARD, [src])
    return _m(reg, src, source)


def _xt_body(reg: Register, source, src=IN0, dst=("anc", 0)) -> int:
    _plus(reg, dst)
    _cx(reg, dst, src)
    return _m(reg, src, source)


def _build_zt(reg, frame, source):
    return {"c": _zt_body(reg, source)}, (("anc", 0),)


def _build_xt(reg, frame, source):
    return {"d": _xt_body(reg, source)}, (("anc", 0),)


def _undo_frame(frame: PauliFrame, wire: int) -> np.ndarray:
    """``Z^b X^a``, the inverse of the wire's byproduct up to phase."""
    return pauli_matrix(frame.a[wire], frame.b[wire]).conj().T


def _build_uzt(u: np.ndarray) -> Builder:
    def build(reg, frame, source):
        reg.apply(u @ _undo_frame(frame, 0), [IN0])
        return {"c": _zt_body(reg, source)}, (("anc", 0),)

    return build


def _build_uxt(u: np.ndarray) -> Builder:
    def build(reg, frame, source):
        reg.apply(u @ _undo_frame(frame, 0), [IN0])
        return {"d": _xt_body(reg, source)}, (("anc", 0),)

    return build


def _build_zrot(theta: float) -> Builder:
    def build(reg, frame, source):
        _zero(reg, ("anc", 0))
        _cx(reg, IN0, ("anc", 0))
        reg.apply(zrot_matrix(-theta if frame.a[0] else theta), [IN0])
        reg.apply(HADAMARD, [IN0])
        return {"c": _m(reg, IN0, source)}, (("anc", 0),)

    return build


def _build_xrot(theta: float) -> Builder:
    def build(reg, frame, source):
        _plus(reg, ("anc", 0))
        _cx(reg, ("anc", 0), IN0)
        reg.apply(xrot_matrix(-theta if frame.b[0] else theta), [IN0])
        return {"d": _m(reg, IN0, source)}, (("anc", 0),)

    return build


# -- two-wire primitives -----------------------------------------------------


def _build_cz_teleport(k: int, thetas: Sequence[float]) -> Builder:
    def build(reg, frame, source):
        if k:
            _cz(reg, IN0, IN1)
        out = {}
        for w, theta in enumerate(thetas):
            anc = ("anc", w)
            _zero(reg, anc)
            _cx(reg, ("in", w), anc)
            reg.apply(zrot_matrix(-theta if frame.a[w] else theta), [("in", w)])
            reg.apply(HADAMARD, [("in", w)])
            out[f"c{w + 1}"] = _m(reg, ("in", w), source)
        return out, (("anc", 0), ("anc", 1))

    return build


def _build_xtcz(reg, frame, source):
    d1 = _xt_body(reg, source, IN0, ("anc", 0))
    d2 = _xt_body(reg, source, IN1, ("anc", 1))
    _cz(reg, ("anc", 0), ("anc", 1))
    return {"d1": d1, "d2": d2}, (("anc", 0), ("anc", 1))


def _czpp(reg: Register, u, v) -> None:
    _plus(reg, u)
    _plus(reg, v)
    _cz(reg, u, v)


def _build_xtcz2(reg, frame, source):
    _czpp(reg, ("anc", 0), ("anc", 1))
    out = {}
    for w in range(2):
        _cx(reg, ("anc", w), ("in", w))
        out[f"d{w + 1}"] = _m(reg, ("in", w), source)
    return out, (("anc", 0), ("anc", 1))


def _build_xtcz3(reg, frame, source):
    _czpp(reg, ("anc", 0), ("anc", 1))
    out = {}
    for w in range(2):
        _cx(reg, ("in", w), ("anc", w))
        out[f"d{w + 1}"] = _m(reg, ("anc", w), source)
    return out, (IN0, IN1)


def _build_xtcz4(reg, frame, source):
    _czpp(reg, ("anc", 0), ("anc", 1))
    out = {}
    for w in range(2):
        _cz(reg, ("in", w), ("anc", w))
        out[f"d{w + 1}"] = _m(reg, ("anc", w), source, HADAMARD)
    return out, (IN0, IN1)


def _build_xtcz5(reg, frame, source):
    anc = ("anc", 0)
    _plus(reg, anc)
    d1 = _m_obs(reg, ObservableSpec.of((IN0, "Z"), (anc, "Z")), source)
    _cz(reg, IN1, anc)
    d2 = _m(reg, anc, source, HADAMARD)
    return {"d1": d1, "d2": d2}, (IN0, IN1)


def _build_remote_cz(mode: str) -> Builder:
    """Path ``in0 - q2 - q3 - in1`` of |+> ancillas, measured in X (enact) or Z (delete)."""

    def build(reg, frame, source):
        q2, q3 = ("anc", 0), ("anc", 1)
        _czpp(reg, q2, q3)
        _cz(reg, IN0, q2)
        _cz(reg, q3, IN1)
        if mode == "enact":
            return {"d1": _m(reg, q2, source, HADAMARD), "d2": _m(reg, q3, source, HADAMARD)}, (IN0, IN1)
        return {"s1": _m(reg, q2, source), "s2": _m(reg, q3, source)}, (IN0, IN1)

    return build


def _build_remote_cz_y(mode: str) -> Builder:
    """Single |+> ancilla joined to both wires, measured in Y (enact) or Z (delete)."""

    def build(reg, frame, source):
        anc = ("anc", 0)
        _plus(reg, anc)
        _cz(reg, IN0, anc)
        _cz(reg, anc, IN1)
        if mode == "enact":
            return {"d": _m(reg, anc, source, HPRIME)}, (IN0, IN1)
        return {"s": _m(reg, anc, source)}, (IN0, IN1)

    return build


def remote_cz_residual(d: int) -> np.ndarray:
    """Single-qubit Z rotation left on each wire by the Y-measured remote CZ."""
    return zrot_matrix(-math.pi / 4 if d else math.pi / 4)


def _remote_cz_y_ideal(frame: PauliFrame, o: Mapping[str, int]) -> np.ndarray:
    # X^a Z_r X^a = Z_{-r}: the residual seen through the input frame flips sign.
    r = math.pi / 4 * (-1) ** o["d"]
    rots = [zrot_matrix(-r if frame.a[w] else r) for w in range(2)]
    return _kron(*rots) @ CZ_MATRIX


# -- routing -----------------------------------------------------------------


def _build_xt_routing(target: int) -> Builder:
    """Two |+> candidates both controlling X on the data; the unselected one is Z-measured."""

    def build(reg, frame, source):
        cands = (("anc", 0), ("anc", 1))
        for c in cands:
            _plus(reg, c)
            _cx(reg, c, IN0)
        k = _m(reg, cands[1 - target], source)
        d = _m(reg, IN0, source)
        return {"k": k, "d": d}, (cands[target],)

    return build


def _build_zt_routing(reg, frame, source):
    """Control line holding |k> (prepared by a Z measurement of |+>) also drives the destination."""
    ctrl, dst = ("ctrl", 0), ("anc", 0)
    _plus(reg, ctrl)
    k = _m_obs(reg, ObservableSpec.of((ctrl, "Z")), source)
    _zero(reg, dst)
    _cx(reg, IN0, dst)
    _cx(reg, ctrl, dst)
    reg.apply(HADAMARD, [IN0])
    c = _m(reg, IN0, source)
    reg.discard(ctrl)
    return {"k": k, "c": c}, (dst,)


# -- TQC primitives, run through the schedule executor -----------------------


def _strip(slot: str) -> str:
    return slot.split("#", 1)[0]


def _build_schedule(schedule) -> Builder:
    def build(reg, frame, source):
        labels = [("in", w) for w in range(schedule.n)]
        physical = reg.state(labels)
        result = execute(schedule, physical, frame, source)
        return {_strip(s): b for s, b in result.record.entries}, result.output

    return build


def _const(u: np.ndarray) -> Callable[[PauliFrame, Mapping[str, int]], np.ndarray]:
    return lambda frame, outcomes: u


def _catalog() -> dict[str, Fragment]:
    u, theta, thetas = DEFAULT_U, DEFAULT_THETA, DEFAULT_THETAS
    ident = _const(I2)
    ident2 = _const(np.eye(4, dtype=complex))
    cz = _const(CZ_MATRIX)
    frags = [
        Fragment("zt", 1, 1, _build_zt, (("zt", {}),), ident, "Z-teleportation, output Z^c ψ"),
        Fragment("xt", 1, 1, _build_xt, (("xt", {}),), ident, "X-teleportation, output X^d ψ"),
        Fragment("uzt", 1, 1, _build_uzt(u), (("uzt", {}),), _const(u), "frame-undoing U then Z-teleport"),
        Fragment("uxt", 1, 1, _build_uxt(u), (("uxt", {}),), _const(u), "frame-undoing U then X-teleport"),
        Fragment("zrot", 1, 1, _build_zrot(theta), (("zrot", {}),), _const(zrot_matrix(theta)), "adaptive Z rotation"),
        Fragment("xrot", 1, 1, _build_xrot(theta), (("xrot", {}),), _const(xrot_matrix(theta)), "adaptive X rotation"),
        Fragment(
            "1bittelepcz-k0", 2, 2, _build_cz_teleport(0, thetas), (("1bittelepcz", {"k": 0}),),
            _const(_kron(zrot_matrix(thetas[0]), zrot_matrix(thetas[1]))), "Z rotations without the CZ",
        ),
        Fragment(
            "1bittelepcz-k1", 2, 2, _build_cz_teleport(1, thetas), (("1bittelepcz", {"k": 1}),),
            _const(_kron(zrot_matrix(thetas[0]), zrot_matrix(thetas[1])) @ CZ_MATRIX), "CZ then Z rotations",
        ),
        Fragment("xtcz", 2, 2, _build_xtcz, (("xtcz", {}),), cz, "two X-teleports then CZ"),
        Fragment("xtcz2", 2, 2, _build_xtcz2, (("xtcz2", {}),), cz, "X-teleport into a CZ-linked pair"),
        Fragment("xtcz3", 2, 2, _build_xtcz3, (("xtcz3", {}),), cz, "in-place CZ via parity transfer"),
        Fragment("xtcz4", 2, 2, _build_xtcz4, (("xtcz4", {}),), cz, "in-place CZ via a four-vertex path"),
        Fragment("xtcz5", 2, 2, _build_xtcz5, (("xtcz5", {}),), cz, "CZ with one ancilla"),
        Fragment(
            "rcz-enact", 2, 2, _build_remote_cz("enact"), (("rcz", {"mode": "enact"}),), cz,
            "two-ancilla remote CZ, X measurements",
        ),
        Fragment(
            "rcz-delete", 2, 2, _build_remote_cz("delete"), (("rcz", {"mode": "delete"}),), ident2,
            "two-ancilla remote CZ skipped by Z measurements",
        ),
        Fragment(
            "rcz2-enact", 2, 1, _build_remote_cz_y("enact"), (("rcz2", {"mode": "enact"}),), _remote_cz_y_ideal,
            "one-ancilla remote CZ, Y measurement",
        ),
        Fragment(
            "rcz2-delete", 2, 1, _build_remote_cz_y("delete"), (("rcz2", {"mode": "delete"}),), ident2,
            "one-ancilla remote CZ skipped by a Z measurement",
        ),
        Fragment(
            "xt-routing-0", 1, 2, _build_xt_routing(0), (("xt_routing", {}), ("xt", {})), ident,
            "route to the first candidate",
        ),
        Fragment(
            "xt-routing-1", 1, 2, _build_xt_routing(1), (("xt_routing", {}), ("xt", {})), ident,
            "route to the second candidate",
        ),
        Fragment(
            "zt-routing", 1, 2, _build_zt_routing, (("zt_routing", {}), ("zt", {})), ident,
            "Z-teleport with an extra control line",
        ),
        Fragment(
            "uzttqc", 1, 2, _build_schedule(compile_single_qubit(u, "z_teleport")), (("uzttqc", {}),), _const(u),
            "U via a two-qubit and a single-qubit measurement", delegated=True,
        ),
        Fragment(
            "uxttqc", 1, 2, _build_schedule(compile_single_qubit(u, "x_teleport")), (("uxttqc", {}),), _const(u),
            "X-basis counterpart", delegated=True,
        ),
        Fragment(
            "xtcz4tqc", 2, 4, _build_schedule(compile_cz("two_ancilla")), (("xtcz4tqc", {}),), cz,
            "CZ with two ancillas and measurements only", delegated=True,
        ),
        Fragment(
            "xtcz5tqc", 2, 3, _build_schedule(compile_cz("one_ancilla")), (("xtcz5tqc", {}),), cz,
            "CZ with one ancilla and measurements only", delegated=True,
        ),
    ]
    return {f.name: f for f in frags}


FRAGMENTS: dict[str, Fragment] = _catalog()


def fragment_names() -> tuple[str, ...]:
    return tuple(FRAGMENTS)


def fragment(name: str) -> Fragment:
    """Look up a fragment; ``xtcz4`` style names and ``primitive:xtcz4`` both work."""
    key = name.split(":", 1)[1] if name.startswith("primitive:") else name
    try:
        return FRAGMENTS[key]
    except KeyError:
        raise KeyError(f"unknown fragment {name!r}; choose from {', '.join(FRAGMENTS)}") from None


# -- identities ----------------------------------------------------------------


def _identities() -> dict[str, tuple[np.ndarray, np.ndarray]]:
    h, cx, cz = HADAMARD, CX_MATRIX, CZ_MATRIX
    return {
        "hadamard-x": (h @ X @ h, Z),
        "hadamard-z": (h @ Z @ h, X),
        "cz-to-cx": (_kron(I2, h) @ cz @ _kron(I2, h), cx),
        "cx-reversal": (_kron(h, h) @ cx @ _kron(h, h), upside_down_cx()),
        "cz-x-propagation": (cz @ _kron(X, I2) @ cz, _kron(X, Z)),
        "cz-z-commutes": (cz @ _kron(Z, I2) @ cz, _kron(Z, I2)),
        "cx-control-x": (cx @ _kron(X, I2) @ cx, _kron(X, X)),
        "cx-target-x": (cx @ _kron(I2, X) @ cx, _kron(I2, X)),
        "cx-control-z": (cx @ _kron(Z, I2) @ cx, _kron(Z, I2)),
        "cx-target-z": (cx @ _kron(I2, Z) @ cx, _kron(Z, Z)),
    }


MATRIX_IDENTITIES: dict[str, tuple[np.ndarray, np.ndarray]] = _identities()


def identity_distance(lhs: np.ndarray, rhs: np.ndarray) -> float:
    """Largest entry of ``|lhs - rhs|``; the identities hold exactly, phases included."""
    return float(np.max(np.abs(np.asarray(lhs) - np.asarray(rhs))))


@dataclass(frozen=True, eq=False)
class BranchIdentity:
    """Two measurement circuits claimed equivalent branch by branch.

    ``left`` and ``right`` map ``(state, source)`` to ``(outcomes, post_state)``;
    wrap the source to collect branch probabilities.
    The right side may produce extra outcomes; branches are matched on the
    ``key`` outcomes, and the right side's extra outcomes must each leave the
    same post-state with probabilities that add up.
    """

    name: str
    width: int
    left: Callable[[StateVector, object], tuple[tuple[int, ...], StateVector]]
    right: Callable[[StateVector, object], tuple[tuple[int, ...], StateVector]]
    left_bits: int
    right_bits: int
    key: int


def _reg(state: StateVector) -> Register:
    return Register(state, [("q", i) for i in range(state.n)])


Q0, Q1 = ("q", 0), ("q", 1)


def _zz_standard_left(state, source):
    reg = _reg(state)
    anc = ("anc", 0)
    _plus(reg, anc)
    _cz(reg, anc, Q0)
    _cz(reg, anc, Q1)
    j = _m(reg, anc, source, HADAMARD)
    return (j,), reg.state([Q0, Q1])


def _zz_standard_right(state, source):
    reg = _reg(state)
    j = _m_obs(reg, ObservableSpec.of((Q0, "Z"), (Q1, "Z")), source)
    return (j,), reg.state([Q0, Q1])


def _parity_left(state, source):
    # Control q0, target q1; the target is measured and q0 survives.
    reg = _reg(state)
    _cx(reg, Q0, Q1)
    j = _m(reg, Q1, source)
    return (j,), reg.state([Q0])


def _parity_right(state, source):
    reg = _reg(state)
    _cx(reg, Q1, Q0)
    j = _m(reg, Q0, source)
    if j:
        reg.apply(X, [Q1])
    return (j,), reg.state([Q1])


def _conjugated_pair(u: np.ndarray, v: np.ndarray):
    def left(state, source):
        reg = _reg(state)
        reg.apply(u, [Q0])
        reg.apply(v, [Q1])
        _cz(reg, Q0, Q1)
        reg.apply(v.conj().T, [Q1])
        j = _m(reg, Q0, source, HADAMARD)
        return (j,), reg.state([Q1])

    def right(state, source):
        reg = _reg(state)
        j = _m_obs(reg, ObservableSpec.of((Q0, "X", u), (Q1, "Z", v)), source)
        k = _m(reg, Q0, source, u)
        if k:
            reg.apply(v.conj().T @ Z @ v, [Q1])
        return (j, k), reg.state([Q1])

    return left, right


def _branch_identities() -> dict[str, BranchIdentity]:
    u = DEFAULT_U
    v = xrot_matrix(-0.81) @ zrot_matrix(0.33)
    left, right = _conjugated_pair(u, v)
    items = [
        BranchIdentity("zz-parity-by-ancilla", 2, _zz_standard_left, _zz_standard_right, 1, 1, 1),
        BranchIdentity("parity-target-swap", 2, _parity_left, _parity_right, 1, 1, 1),
        BranchIdentity("conjugated-pair-measurement", 2, left, right, 1, 2, 1),
    ]
    return {b.name: b for b in items}


BRANCH_IDENTITIES: dict[str, BranchIdentity] = _branch_identities()
