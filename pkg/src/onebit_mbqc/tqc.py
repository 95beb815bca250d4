"""Teleportation-based compilation: circuits to adaptive two-qubit-measurement schedules.

A schedule is a list of steps on physical labels. Logical wire ``w`` starts on
label ``w``; ancillas get fresh integer labels. Measurement observables are
templates: a factor may carry an adaptive conjugator ``U`` for wire ``w``,
resolved at run time to ``U · E_w†`` where ``E_w`` is the wire's known error
(its Pauli frame, times any pending pseudo-simulation correction).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .circuit import HADAMARD, HPRIME, I2, PAULI, Circuit, CircuitError, elementary_gates, euler_decompose, gate_matrix, is_unitary
from .pauli import FrameError, OutcomeRecord, PauliFrame, conjugate_by_clifford, frame_update, pauli_matrix
from .statevec import Factor, ObservableSpec, Register, SimulatorError, StateVector

__all__ = [
    "Adaptive",
    "FrameUpdate",
    "TqcStep",
    "ResourceCount",
    "TqcSchedule",
    "TqcResult",
    "SINGLE_QUBIT_STYLES",
    "CZ_STYLES",
    "compile_single_qubit",
    "compile_cz",
    "compile_full",
    "compile_pseudo",
    "composite_form",
    "execute",
    "tally",
    "expected_full",
    "expected_pseudo",
    "unitary_name",
]

SINGLE_QUBIT_STYLES = ("z_teleport", "x_teleport", "rotated_bell", "clifford_bell")
CZ_STYLES = ("two_ancilla", "one_ancilla")
_TWO_QUBIT_PREPS = {"bell", "bellu", "czpp"}


def unitary_name(u: np.ndarray) -> str:
    """Short symbolic name: ``I`` or ``zxz(t1,t2,t3)`` from the Euler angles."""
    if np.allclose(u / u[0, 0] if abs(u[0, 0]) > 1e-9 else u, I2, atol=1e-12):
        return "I"
    t1, t2, t3, _ = euler_decompose(u)
    return f"zxz({t1:.6g},{t2:.6g},{t3:.6g})"


@dataclass(frozen=True, eq=False)
class Adaptive:
    """Conjugator template ``unitary · E_wire†`` resolved from the live frame."""

    wire: int
    unitary: np.ndarray = field(default_factory=lambda: I2.copy())

    def resolve(self, frame: PauliFrame, pending: Sequence[np.ndarray]) -> np.ndarray:
        error = frame.wire_matrix(self.wire) @ pending[self.wire]
        return self.unitary @ error.conj().T

    def __str__(self) -> str:
        return f"U'[w{self.wire}]"


@dataclass(frozen=True, eq=False)
class FrameUpdate:
    """Classical processing after a step.

    ``rule`` names a :data:`~onebit_mbqc.pauli.PRIMITIVE_RULES` entry fed with
    outcome bits ``outcomes`` (rule name -> slot). ``pending`` lists
    ``(wire, V, slots)`` pushes of ``V† Z^x V`` with ``x`` the XOR of the slots.
    """

    rule: str | None = None
    wires: tuple[int, ...] = ()
    outcomes: Mapping[str, str] = field(default_factory=dict)
    labels: tuple[Hashable, ...] | None = None
    params: Mapping = field(default_factory=dict)
    pending: tuple[tuple[int, np.ndarray, tuple[str, ...]], ...] = ()


@dataclass(frozen=True, eq=False)
class TqcStep:
    """One step: ancilla preparation or a one/two-qubit measurement.

    Parameters
    ----------
    kind
        ``prep``, ``m2`` or ``m1``.
    labels
        Physical labels touched.
    prep
        Preparation kind for ``prep`` steps (``zero``, ``plus``, ``bell``,
        ``bellu`` = (I⊗U)|Φ00>, ``czpp`` = CZ|++>).
    factors
        Observable template as ``(label, pauli, Adaptive | None)``.
    slot
        Unique outcome slot name.
    discard
        Labels removed from the register after the step.
    wires
        Logical wires involved, for dumps and depth analysis.
    update
        Classical processing run after the measurement.
    """

    kind: str
    labels: tuple[Hashable, ...]
    prep: str | None = None
    prep_unitary: np.ndarray | None = None
    factors: tuple[tuple[Hashable, str, Adaptive | None], ...] = ()
    slot: str | None = None
    discard: tuple[Hashable, ...] = ()
    wires: tuple[int, ...] = ()
    update: FrameUpdate | None = None
    note: str = ""


@dataclass(frozen=True)
class ResourceCount:
    ancillas: int
    two_qubit_meas: int
    single_qubit_meas: int
    logical_depth: int = 0

    def counts(self) -> tuple[int, int, int]:
        return self.ancillas, self.two_qubit_meas, self.single_qubit_meas


def tally(steps: Sequence[TqcStep]) -> ResourceCount:
    """Count resources; preparations count as the measurement that realizes them."""
    ancillas = two = single = 0
    for s in steps:
        if s.kind == "prep":
            ancillas += len(s.labels)
            if s.prep in _TWO_QUBIT_PREPS:
                two += 1
            else:
                single += 1
        elif s.kind == "m2":
            two += 1
        elif s.kind == "m1":
            single += 1
    return ResourceCount(ancillas, two, single, _depth(steps))


def _depth(steps: Sequence[TqcStep]) -> int:
    """ASAP layering by qubit occupancy plus classical feed-forward dependencies."""
    busy: dict[Hashable, int] = {}
    frame_ready: dict[int, int] = {}
    depth = 0
    for s in steps:
        t = max((busy.get(lab, 0) for lab in s.labels), default=0)
        for _, _, conj in s.factors:
            if conj is not None:
                t = max(t, frame_ready.get(conj.wire, 0))
        t += 1
        for lab in s.labels:
            busy[lab] = t
        if s.update is not None:
            for w in s.update.wires + tuple(p[0] for p in s.update.pending):
                frame_ready[w] = max(frame_ready.get(w, 0), t)
        depth = max(depth, t)
    return depth


@dataclass(frozen=True, eq=False)
class TqcSchedule:
    """Ordered TQC steps with their wire map and resource count.

    ``final_unitaries`` holds, per wire, the trailing single-qubit unitary that
    was not simulated because it belongs to the read-out basis; it is ``None``
    when read-out measurements are part of the schedule.
    """

    n: int
    steps: tuple[TqcStep, ...]
    final_unitaries: tuple[np.ndarray, ...] | None = None
    readout: bool = False
    name: str = ""
    resources: ResourceCount = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "resources", tally(self.steps))

    @property
    def initial_labels(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    @property
    def measurement_count(self) -> int:
        return sum(s.kind in ("m1", "m2") for s in self.steps)

    def dump(self) -> str:
        """Text form: one step per line, resource footer last."""
        lines = [f"# tqc schedule {self.name} wires={self.n}"]
        for s in self.steps:
            if s.kind == "prep":
                extra = f" U={unitary_name(s.prep_unitary)}" if s.prep_unitary is not None else ""
                lines.append(f"prep {' '.join(f'q{l}' for l in s.labels)} {s.prep}{extra}")
                continue
            parts, notes = [], []
            for lab, pauli, conj in s.factors:
                if conj is None:
                    parts.append(pauli)
                else:
                    parts.append(f"(U' {pauli} U')")
                    notes.append(f"U=w{conj.wire}:{unitary_name(conj.unitary)}")
            template = "o".join(parts)
            qubits = " ".join(f"q{l}" for l, _, _ in s.factors)
            tail = f" : {' '.join(notes)}" if notes else ""
            lines.append(f"{s.kind} {qubits} {template}{tail} -> {s.slot}")
        r = self.resources
        lines.append(
            f"# resources ancillas={r.ancillas} two_qubit={r.two_qubit_meas} "
            f"single_qubit={r.single_qubit_meas} depth={r.logical_depth}"
        )
        return "\n".join(lines) + "\n"


class _Builder:
    """Allocates labels and slot names while emitting steps."""

    def __init__(self, n: int) -> None:
        self.n = n
        self.labels = list(range(n))
        self.next_label = n
        self.next_slot = 0
        self.steps: list[TqcStep] = []

    def fresh(self) -> int:
        self.next_label += 1
        return self.next_label - 1

    def slot(self, name: str) -> str:
        self.next_slot += 1
        return f"{name}#{self.next_slot}"

    def prep(self, kind: str, labels: Sequence[int], wires: Sequence[int], unitary: np.ndarray | None = None) -> None:
        self.steps.append(TqcStep("prep", tuple(labels), prep=kind, prep_unitary=unitary, wires=tuple(wires)))

    def measure(self, factors, name: str, wires: Sequence[int], discard: Sequence = (), update=None) -> str:
        slot = self.slot(name)
        kind = "m2" if len(factors) == 2 else "m1"
        labels = tuple(f[0] for f in factors)
        self.steps.append(
            TqcStep(kind, labels, factors=tuple(factors), slot=slot, discard=tuple(discard), wires=tuple(wires), update=update)
        )
        return slot

    def attach(self, update: FrameUpdate) -> None:
        """Attach an update to the most recent step."""
        last = self.steps[-1]
        self.steps[-1] = TqcStep(
            last.kind, last.labels, last.prep, last.prep_unitary, last.factors, last.slot, last.discard, last.wires, update
        )

    # -- primitives ---------------------------------------------------------

    def single_qubit(self, wire: int, u: np.ndarray, style: str) -> None:
        q = self.labels[wire]
        adapt = Adaptive(wire, np.asarray(u, dtype=complex))
        if style == "z_teleport":
            r = self.fresh()
            self.prep("zero", [r], [wire])
            c = self.measure([(q, "X", adapt), (r, "X", None)], "c", [wire])
            k = self.measure([(q, "Z", adapt)], "k", [wire], discard=[q])
            self.attach(FrameUpdate("uzttqc", (wire,), {"c": c, "k": k}, (r,)))
        elif style == "x_teleport":
            r = self.fresh()
            self.prep("plus", [r], [wire])
            d = self.measure([(q, "Z", adapt), (r, "Z", None)], "d", [wire])
            k = self.measure([(q, "X", adapt)], "k", [wire], discard=[q])
            self.attach(FrameUpdate("uxttqc", (wire,), {"d": d, "k": k}, (r,)))
        elif style == "rotated_bell":
            r1, r2 = self.fresh(), self.fresh()
            self.prep("bell", [r1, r2], [wire])
            c = self.measure([(q, "X", adapt), (r1, "X", None)], "c", [wire])
            d = self.measure([(q, "Z", adapt), (r1, "Z", None)], "d", [wire], discard=[q, r1])
            self.attach(FrameUpdate("teleportu", (wire,), {"c": c, "d": d}, (r2,)))
        elif style == "clifford_bell":
            try:
                conjugate_by_clifford(u, [1], [0])
                conjugate_by_clifford(u, [0], [1])
            except FrameError:
                raise CircuitError("clifford_bell style needs a Clifford unitary") from None
            r1, r2 = self.fresh(), self.fresh()
            self.prep("bellu", [r1, r2], [wire], unitary=np.asarray(u, dtype=complex))
            c = self.measure([(q, "X", None), (r1, "X", None)], "c", [wire])
            d = self.measure([(q, "Z", None), (r1, "Z", None)], "d", [wire], discard=[q, r1])
            self.attach(
                FrameUpdate("teleportgc", (wire,), {"c": c, "d": d}, (r2,), params={"clifford": np.asarray(u, dtype=complex)})
            )
        else:
            raise CircuitError(f"unknown single-qubit style {style!r}")
        self.labels[wire] = self.steps[-1].update.labels[0]

    def cz(self, w1: int, w2: int, style: str) -> None:
        if w1 == w2:
            raise CircuitError("CZ needs two distinct wires")
        q1, q2 = self.labels[w1], self.labels[w2]
        if style == "two_ancilla":
            r1, r2 = self.fresh(), self.fresh()
            self.prep("czpp", [r1, r2], [w1, w2])
            d1 = self.measure([(q1, "Z", None), (r1, "X", None)], "d1", [w1])
            d2 = self.measure([(r2, "X", None), (q2, "Z", None)], "d2", [w2])
            k1 = self.measure([(r1, "Z", None)], "k1", [w1], discard=[r1])
            k2 = self.measure([(r2, "Z", None)], "k2", [w2], discard=[r2])
            self.attach(FrameUpdate("xtcz4tqc", (w1, w2), {"d1": d1, "d2": d2, "k1": k1, "k2": k2}))
        elif style == "one_ancilla":
            r = self.fresh()
            self.prep("plus", [r], [w1, w2])
            d1 = self.measure([(q1, "Z", None), (r, "Z", None)], "d1", [w1])
            d2 = self.measure([(r, "X", None), (q2, "Z", None)], "d2", [w2])
            k2 = self.measure([(r, "Z", None)], "k2", [w2], discard=[r])
            self.attach(FrameUpdate("xtcz5tqc", (w1, w2), {"d1": d1, "d2": d2, "k2": k2}))
        else:
            raise CircuitError(f"unknown CZ style {style!r}")

    def pseudo_cz(self, w1: int, w2: int, u: np.ndarray, v: np.ndarray) -> None:
        """Pseudo-simulate ``(u†⊗v†) CZ (u⊗v)``, deferring ``u†Z u`` / ``v†Z v`` corrections."""
        q1, q2 = self.labels[w1], self.labels[w2]
        r = self.fresh()
        self.prep("plus", [r], [w1, w2])
        d1 = self.measure([(q1, "Z", Adaptive(w1, u)), (r, "Z", None)], "d1", [w1])
        d2 = self.measure([(r, "X", None), (q2, "Z", Adaptive(w2, v))], "d2", [w2])
        k2 = self.measure([(r, "Z", None)], "k2", [w2], discard=[r])
        self.attach(FrameUpdate(None, (), {}, pending=((w1, u, (d2,)), (w2, v, (d1, k2)))))

    def readout(self, wire: int, u: np.ndarray) -> None:
        q = self.labels[wire]
        self.measure([(q, "Z", Adaptive(wire, u))], "m", [wire], discard=[q])


def compile_single_qubit(u: np.ndarray, style: str = "z_teleport") -> TqcSchedule:
    """Schedule simulating a single-qubit unitary on wire 0.

    Examples
    --------
    >>> s = compile_single_qubit(np.eye(2), "z_teleport")
    >>> s.resources.counts()
    (1, 1, 2)
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u, 1e-10):
        raise CircuitError("compile_single_qubit needs a 2x2 unitary")
    b = _Builder(1)
    b.single_qubit(0, u, style)
    return TqcSchedule(1, b.steps, final_unitaries=(I2.copy(),), name=style)


def compile_cz(style: str = "one_ancilla") -> TqcSchedule:
    """Two-wire schedule enacting CZ with the two- or one-ancilla primitive."""
    b = _Builder(2)
    b.cz(0, 1, style)
    return TqcSchedule(2, b.steps, final_unitaries=(I2.copy(), I2.copy()), name=f"cz-{style}")


def compile_full(
    c: Circuit, czstyle: str = "one_ancilla", style: str = "z_teleport", readout: bool = True
) -> TqcSchedule:
    """Full simulation: each CZ preceded by single-qubit simulations of both wires.

    Single-qubit gates accumulate per wire; before every CZ the accumulated
    unitary of each of its two wires is simulated (even when it is the
    identity), so a circuit with ``m`` CZ on ``n`` wires costs exactly
    ``3m`` ancillas, ``4m`` two-qubit and ``6m + n`` single-qubit measurements
    with the default styles. Trailing unitaries fold into the read-out basis;
    with ``readout=False`` they are returned in ``final_unitaries`` instead.
    """
    if czstyle not in CZ_STYLES:
        raise CircuitError(f"unknown CZ style {czstyle!r}")
    if style not in SINGLE_QUBIT_STYLES:
        raise CircuitError(f"unknown single-qubit style {style!r}")
    b = _Builder(c.width)
    pending = [I2.copy() for _ in range(c.width)]
    for g in elementary_gates(c, nearest_neighbor=False):
        if g.is_single:
            (q,) = g.qubits
            pending[q] = gate_matrix(g) @ pending[q]
            continue
        for w in g.qubits:
            b.single_qubit(w, pending[w], style)
            pending[w] = I2.copy()
        b.cz(*g.qubits, czstyle)
    if readout:
        for w in range(c.width):
            b.readout(w, pending[w])
        return TqcSchedule(c.width, b.steps, None, True, name=f"full-{style}-{czstyle}")
    return TqcSchedule(c.width, b.steps, tuple(pending), False, name=f"full-{style}-{czstyle}")


def composite_form(c: Circuit) -> tuple[list[tuple[int, int, np.ndarray, np.ndarray]], list[np.ndarray]]:
    """Rewrite ``c`` as composite gates ``(U†⊗V†) CZ (U⊗V)`` and final unitaries.

    ``U`` and ``V`` are the cumulative single-qubit unitaries of the two wires
    up to that CZ, so ``U_c = (⊗_w T_w) · W_m ⋯ W_1`` with ``T_w`` the final
    cumulative unitary of wire ``w``.
    """
    cumulative = [I2.copy() for _ in range(c.width)]
    gates: list[tuple[int, int, np.ndarray, np.ndarray]] = []
    for g in elementary_gates(c, nearest_neighbor=False):
        if g.is_single:
            (q,) = g.qubits
            cumulative[q] = gate_matrix(g) @ cumulative[q]
        else:
            p, q = g.qubits
            gates.append((p, q, cumulative[p].copy(), cumulative[q].copy()))
    return gates, cumulative


def compile_pseudo(c: Circuit, readout: bool = True) -> TqcSchedule:
    """Pseudo-simulation: one ancilla and two two-qubit measurements per composite gate.

    Each composite gate is simulated up to left factors ``U†Z U`` / ``V†Z V``.
    These are queued per wire and absorbed into the conjugators of the next
    measurement on that wire, or into the final read-out basis.
    """
    gates, final = composite_form(c)
    b = _Builder(c.width)
    for p, q, u, v in gates:
        b.pseudo_cz(p, q, u, v)
    if readout:
        for w in range(c.width):
            b.readout(w, final[w])
        return TqcSchedule(c.width, b.steps, None, True, name="pseudo")
    return TqcSchedule(c.width, b.steps, tuple(final), False, name="pseudo")


def expected_full(n: int, m: int) -> tuple[int, int, int]:
    return 3 * m, 4 * m, 6 * m + n


def expected_pseudo(n: int, m: int) -> tuple[int, int, int]:
    return m, 2 * m, 2 * m + n


@dataclass(frozen=True, eq=False)
class TqcResult:
    """Outcome of one schedule execution.

    ``output`` is ordered by logical wire; ``pending`` holds each wire's
    deferred correction so the full known error on wire ``w`` is
    ``frame.wire_matrix(w) @ pending[w]``.
    """

    output: StateVector
    frame: PauliFrame
    record: OutcomeRecord
    pending: tuple[np.ndarray, ...]
    probability: float
    peak_qubits: int

    def known_error(self, wire: int) -> np.ndarray:
        return self.frame.wire_matrix(wire) @ self.pending[wire]


def _anticommutes(err: tuple[int, int], pauli: str) -> int:
    x, z = err
    px, pz = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}[pauli]
    return (x * pz + z * px) & 1


def execute(
    s: TqcSchedule,
    input: StateVector,
    frame: PauliFrame | None = None,
    rng=None,
    prep_errors: Mapping[Hashable, tuple[int, int]] | None = None,
) -> TqcResult:
    """Run a schedule.

    Parameters
    ----------
    s
        Compiled schedule.
    input
        Physical input state, wire ``w`` on qubit ``w`` (known errors included).
    frame
        Known Pauli error on the input; defaults to none.
    rng
        Outcome source with ``choose(p0)``: :class:`~onebit_mbqc.statevec.Rng`
        or :class:`~onebit_mbqc.statevec.ForcedOutcomes`.
    prep_errors
        Optional known Pauli ``(x, z)`` injected on an ancilla label right after
        its preparation. Outcomes of plain-Pauli factors on that label are
        corrected, and the error joins the frame if the ancilla becomes a carrier.
    """
    if input.n != s.n:
        raise SimulatorError(f"input has {input.n} qubits, schedule has {s.n} wires")
    if rng is None:
        raise SimulatorError("execute needs an outcome source")
    frame = PauliFrame.identity(s.n) if frame is None else frame
    if frame.n != s.n:
        raise FrameError("frame width does not match schedule")
    frame = PauliFrame(frame.a, frame.b, s.initial_labels)
    reg = Register(input, s.initial_labels)
    pending = [I2.copy() for _ in range(s.n)]
    errors = dict()
    prep_errors = dict(prep_errors or {})
    outcomes: dict[str, int] = {}
    record = OutcomeRecord()
    probability = 1.0
    for step in s.steps:
        if step.kind == "prep":
            kind = "bell" if step.prep == "bellu" else step.prep
            reg.prepare(kind, step.labels)
            if step.prep == "bellu":
                reg.apply(step.prep_unitary, [step.labels[1]])
            for lab in step.labels:
                if lab in prep_errors:
                    x, z = prep_errors[lab]
                    reg.apply(pauli_matrix(x, z), [lab])
                    errors[lab] = (x & 1, z & 1)
            continue
        factors, flip = [], 0
        for lab, pauli, conj in step.factors:
            if lab in errors:
                if conj is not None:
                    raise SimulatorError("prep errors are only tracked on plain Pauli factors")
                flip ^= _anticommutes(errors[lab], pauli)
            u = None if conj is None else conj.resolve(frame, pending)
            factors.append(Factor(lab, pauli, u))
        if step.kind == "m1" and step.discard == (step.labels[0],):
            lab, pauli, u = factors[0].qubit, factors[0].pauli, factors[0].conj
            basis = _basis_change(pauli, u)
            raw, prob = reg.measure_out(lab, basis, rng)
        else:
            raw, prob = reg.measure(ObservableSpec(tuple(factors)), rng)
            if step.discard:
                reg.discard(*step.discard)
        for lab in step.discard:
            errors.pop(lab, None)
        bit = raw ^ flip
        probability *= prob
        outcomes[step.slot] = bit
        record = record.add(step.slot, bit)
        if step.update is not None:
            frame, pending = _apply_update(step.update, frame, pending, outcomes, errors)
    output = reg.state(list(frame.labels))
    return TqcResult(output, frame, record, tuple(pending), probability, reg.peak)


def _basis_change(pauli: str, u: np.ndarray | None) -> np.ndarray:
    """Unitary ``B`` with ``B† Z B`` equal to the factor's observable."""
    rotate = {"Z": I2, "X": HADAMARD, "Y": HPRIME}[pauli]
    return rotate if u is None else rotate @ u


def _apply_update(
    update: FrameUpdate,
    frame: PauliFrame,
    pending: list[np.ndarray],
    outcomes: Mapping[str, int],
    errors: dict,
) -> tuple[PauliFrame, list[np.ndarray]]:
    pending = list(pending)
    for wire, v, slots in update.pending:
        x = 0
        for sl in slots:
            x ^= outcomes[sl]
        if x:
            pending[wire] = pending[wire] @ (v.conj().T @ PAULI["Z"] @ v)
    if update.rule is not None:
        bits = {name: outcomes[sl] for name, sl in update.outcomes.items()}
        params = dict(update.params)
        params["wires"] = update.wires
        if update.labels is not None:
            params["labels"] = update.labels
        frame = frame_update(frame, update.rule, bits, params)
        for w, lab in zip(update.wires, update.labels or ()):
            if lab in errors:
                x, z = errors.pop(lab)
                frame = frame.flip(w, x, z)
    return frame, pending
