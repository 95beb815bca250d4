"""One-way compilation: measurement patterns on graph states.

Every logical wire travels along a path of graph vertices. Vertices alternate
between two storage forms: an *M-type* vertex holds ``H`` applied to the wire's
state and is measured to perform an X rotation, an *N-type* vertex holds the
state itself and is measured to perform a Z rotation. Graph edges between
N-type vertices of neighbouring wires enact CZ gates. Ancilla vertices are
either measured to stitch a CZ between two data vertices or Z-measured to
delete them from the graph.

The byproduct of every measurement is tracked as a Pauli frame ``X^a Z^b`` per
wire, and later measurement angles are adapted to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .circuit import (
    HADAMARD,
    HPRIME,
    Cycle,
    CycleForm,
    CZ_MATRIX,
    euler_decompose,
    xrot_matrix,
    zrot_matrix,
)
from .graph import Coord, GraphSpec, SubstrateDiagram
from .pauli import FrameError, OutcomeRecord, PauliFrame
from .statevec import MAX_QUBITS, Register, SimulatorError, StateVector

__all__ = [
    "VARIANTS",
    "STEP_KINDS",
    "PatternError",
    "PatternStep",
    "MeasurementPattern",
    "SubstrateScheme",
    "PatternResult",
    "compile_tg",
    "compile_universal",
    "cancellation_cycles",
    "embed_in_cluster",
    "execute_pattern",
    "execute_windowed",
    "FrameExpressions",
    "frame_expressions",
    "physical_qubits",
    "to_diagram",
]

VARIANTS = ("TG", "RemoteCZ_I", "RemoteCZ_II", "Cancellation", "Routing")
STEP_KINDS = ("xrot", "zrot", "mz", "mx", "my")
INTERSPERSED_ANGLE = -math.pi / 4
_EMBEDDABLE = ("RemoteCZ_I", "RemoteCZ_II")
_S_GATE = np.diag([1, 1j])


class PatternError(ValueError):
    """Malformed pattern or unsupported compilation request."""


@dataclass(frozen=True)
class PatternStep:
    """One single-qubit measurement.

    Attributes
    ----------
    vertex
        Measured vertex.
    kind
        ``xrot`` (M-type data vertex, angle sign from the wire's ``b``),
        ``zrot`` (N-type data vertex, sign from ``a``), ``mz`` (deletion),
        ``mx`` or ``my`` (ancilla).
    angle
        Rotation angle for ``xrot``/``zrot``.
    wire
        Logical wire carried by the vertex, for data steps.
    output
        Vertex that receives the wire's data.
    couplings
        ``(partner wire, partner vertex)`` pairs: a CZ edge between this vertex
        and the partner's vertex adds the partner's ``a`` to this wire's ``b``.
    offsets
        Ancillas measured with ``my`` whose outcome ``d`` leaves a residual
        ``Z`` rotation by ``(-1)^d pi/4`` to be removed from this step's angle.
    zfeed
        Vertices that pick up ``Z^outcome`` from this measurement.
    """

    vertex: Coord
    kind: str
    angle: float | None = None
    wire: int | None = None
    output: Coord | None = None
    couplings: tuple[tuple[int, Coord], ...] = ()
    offsets: tuple[Coord, ...] = ()
    zfeed: tuple[Coord, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in STEP_KINDS:
            raise PatternError(f"unknown step kind {self.kind!r}")
        data = self.kind in ("xrot", "zrot")
        if data and (self.angle is None or self.wire is None or self.output is None):
            raise PatternError(f"{self.kind} step needs angle, wire and output")
        if not data and (self.wire is not None or self.couplings or self.offsets):
            raise PatternError(f"{self.kind} step cannot carry wire data")

    @property
    def step_id(self) -> str:
        return f"{self.vertex[0]},{self.vertex[1]}"

    @property
    def dep(self) -> str | None:
        """Frame bit that sets the angle sign, ``'a'`` or ``'b'``."""
        return {"xrot": "b", "zrot": "a"}.get(self.kind)

    def dump(self) -> str:
        angle = "-" if self.angle is None else f"{self.angle:.12g}"
        dep = "-" if self.dep is None else f"{self.wire}:{self.dep}"
        line = f"meas {self.step_id} kind={self.kind} angle={angle} dep={dep}"
        if self.offsets:
            line += " offset=" + ";".join(f"{r},{c}" for r, c in self.offsets)
        return line


@dataclass(frozen=True)
class MeasurementPattern:
    """A graph, an ordered list of measurements, and the wire entry/exit vertices.

    ``vtypes`` marks each data vertex ``'M'`` or ``'N'``; inputs and outputs
    are M-type.
    """

    graph: GraphSpec
    steps: tuple[PatternStep, ...]
    inputs: tuple[Coord, ...]
    outputs: tuple[Coord, ...]
    vtypes: tuple[tuple[Coord, str], ...]
    name: str = ""
    labels: tuple[tuple[Coord, str], ...] = ()
    optional: frozenset[tuple[Coord, Coord]] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "vtypes", tuple(sorted(self.vtypes)))
        self._validate()

    @property
    def n(self) -> int:
        return len(self.inputs)

    @cached_property
    def vertex_types(self) -> dict[Coord, str]:
        return dict(self.vtypes)

    def _validate(self) -> None:
        g = self.graph
        measured = [s.vertex for s in self.steps]
        if len(set(measured)) != len(measured):
            raise PatternError("a vertex is measured twice")
        if set(measured) & set(self.outputs):
            raise PatternError("output vertices must stay unmeasured")
        if set(measured) | set(self.outputs) != set(g.order):
            raise PatternError("every non-output vertex must be measured")
        types = self.vertex_types
        if any(types.get(v) != "M" for v in self.inputs + self.outputs):
            raise PatternError("inputs and outputs must be M-type vertices")
        carrier = list(self.inputs)
        done: set[Coord] = set()
        for s in self.steps:
            if s.wire is not None:
                if carrier[s.wire] != s.vertex:
                    raise PatternError(f"step at {s.vertex} does not hold wire {s.wire}")
                want = "M" if s.kind == "xrot" else "N"
                if types.get(s.vertex) != want or s.output not in g.neighbors(s.vertex):
                    raise PatternError(f"step at {s.vertex} has an inconsistent data path")
                if s.output in done:
                    raise PatternError(f"step at {s.vertex} outputs to a measured vertex")
                carrier[s.wire] = s.output
            for v in s.offsets:
                if v not in done:
                    raise PatternError(f"offset ancilla {v} is measured after {s.vertex}")
            done.add(s.vertex)
        if tuple(carrier) != self.outputs:
            raise PatternError("wires do not end on the output vertices")

    @cached_property
    def trajectories(self) -> tuple[tuple[Coord, ...], ...]:
        """Vertices visited by each wire, input first."""
        paths = [[v] for v in self.inputs]
        for s in self.steps:
            if s.wire is not None:
                paths[s.wire].append(s.output)
        return tuple(tuple(p) for p in paths)

    def dump(self) -> str:
        head = f"# pattern {self.name} wires={self.n} vertices={len(self.graph)} measurements={len(self.steps)}"
        outs = "# outputs " + " ".join(f"{r},{c}" for r, c in self.outputs)
        return "\n".join([head, *(s.dump() for s in self.steps), outs]) + "\n"


@dataclass(frozen=True)
class SubstrateScheme:
    """Which substrate a pattern lives on and what it costs.

    ``cost_per_cycle`` is the number of physical qubits per logical qubit per
    circuit cycle of the scheme's resource state: the cluster lattice for the
    embeddable variants, the graph itself otherwise. ``lattice_shape`` and
    ``deletions`` describe the cluster embedding when one exists.
    """

    variant: str
    n: int
    m: int
    cost_per_cycle: int
    physical_qubits: int
    lattice_shape: tuple[int, int] | None = None
    deletions: frozenset[Coord] | None = None
    interspersed_angle: float | None = None


def _finish(
    graph: GraphSpec,
    steps: list[PatternStep],
    inputs: Sequence[Coord],
    outputs: Sequence[Coord],
    vtypes: Mapping[Coord, str],
    name: str,
    labels: Mapping[Coord, str],
    optional: Sequence[tuple[Coord, Coord]] = (),
) -> MeasurementPattern:
    """Attach deletion feeds (Z to every neighbour still unmeasured) and build the pattern."""
    measured: set[Coord] = set()
    final = []
    for s in steps:
        if s.kind == "mz":
            feed = tuple(sorted(u for u in graph.neighbors(s.vertex) if u not in measured))
            s = PatternStep(s.vertex, "mz", zfeed=feed)
        measured.add(s.vertex)
        final.append(s)
    return MeasurementPattern(
        graph,
        tuple(final),
        tuple(inputs),
        tuple(outputs),
        tuple(vtypes.items()),
        name,
        tuple(labels.items()),
        frozenset(optional),
    )


def _primes(j: int) -> str:
    return "'" * j


# -- TG: circuit-dependent graph ---------------------------------------------


def compile_tg(cf: CycleForm) -> MeasurementPattern:
    """Pattern on a circuit-dependent graph: one row per wire, two columns per cycle.

    Row ``w`` holds vertices ``(w, 0) ... (w, 2m)``; column ``2j`` performs the
    X rotations of cycle ``j`` and column ``2j + 1`` its Z rotations. A
    vertical edge in column ``2j + 1`` enacts each CZ of the cycle.

    Examples
    --------
    >>> from onebit_mbqc.circuit import Cycle, CycleForm
    >>> p = compile_tg(CycleForm(1, (Cycle((0.0,), (0.0,)),)))
    >>> [s.kind for s in p.steps]
    ['xrot', 'zrot']
    """
    n, m = cf.width, cf.m
    verts = [((w, c), "data") for w in range(n) for c in range(2 * m + 1)]
    edges = [((w, c), (w, c + 1)) for w in range(n) for c in range(2 * m)]
    optional = []
    steps: list[PatternStep] = []
    labels: dict[Coord, str] = {}
    for j, cyc in enumerate(cf.cycles):
        mc, nc = 2 * j, 2 * j + 1
        partner = {}
        for i, k in sorted(cyc.cz):
            optional.append(((i, nc), (k, nc)))
            partner[i], partner[k] = k, i
        for w in range(n):
            steps.append(PatternStep((w, mc), "xrot", cyc.x[w], w, (w, nc)))
            labels[(w, mc)] = f"M{w + 1}{_primes(j)}"
        for w in range(n):
            couple = ((partner[w], (partner[w], nc)),) if w in partner else ()
            steps.append(PatternStep((w, nc), "zrot", cyc.z[w], w, (w, nc + 1), couple))
            labels[(w, nc)] = f"N{w + 1}{_primes(j)}"
    for w in range(n):
        labels[(w, 2 * m)] = f"out{w + 1}"
    graph = GraphSpec(tuple(verts), frozenset(edges + optional))
    vtypes = {(w, c): "MN"[c % 2] for w in range(n) for c in range(2 * m + 1)}
    return _finish(
        graph,
        steps,
        [(w, 0) for w in range(n)],
        [(w, 2 * m) for w in range(n)],
        vtypes,
        "TG",
        labels,
        optional,
    )


# -- remote-CZ substrates -----------------------------------------------------


def _remote(cf: CycleForm, two_ancillas: bool) -> MeasurementPattern:
    """Fixed substrate with an ancilla chain between every neighbouring pair in every N column."""
    n, m = cf.width, cf.m
    stride = 3 if two_ancillas else 2
    verts: list[tuple[Coord, str]] = []
    edges: list[tuple[Coord, Coord]] = []
    vtypes: dict[Coord, str] = {}
    labels: dict[Coord, str] = {}
    for w in range(n):
        for c in range(2 * m + 1):
            verts.append(((stride * w, c), "data"))
            vtypes[(stride * w, c)] = "MN"[c % 2]
            if c < 2 * m:
                edges.append(((stride * w, c), (stride * w, c + 1)))
    for j in range(m):
        c = 2 * j + 1
        for w in range(n - 1):
            chain = [(stride * w + k, c) for k in range(stride + 1)]
            verts.extend((v, "ancilla-x" if two_ancillas else "ancilla-z") for v in chain[1:-1])
            edges.extend(zip(chain, chain[1:]))
    graph = GraphSpec(tuple(verts), frozenset(edges))

    steps: list[PatternStep] = []
    for j, cyc in enumerate(cf.cycles):
        mc, nc = 2 * j, 2 * j + 1
        deletions, ancillas = [], []
        couple: dict[int, list] = {w: [] for w in range(n)}
        offset: dict[int, list] = {w: [] for w in range(n)}
        for w in range(n - 1):
            top, bottom = (stride * w, nc), (stride * (w + 1), nc)
            middle = [(stride * w + k, nc) for k in range(1, stride)]
            if (w, w + 1) not in cyc.cz:
                deletions.extend(PatternStep(v, "mz") for v in middle)
                for v in middle:
                    labels[v] = "Z"
                continue
            couple[w].append((w + 1, bottom))
            couple[w + 1].append((w, top))
            if two_ancillas:
                near, far = middle
                ancillas.append(PatternStep(near, "mx", zfeed=(bottom,)))
                ancillas.append(PatternStep(far, "mx", zfeed=(top,)))
                labels[near] = labels[far] = "X"
            else:
                (mid,) = middle
                ancillas.append(PatternStep(mid, "my"))
                offset[w].append(mid)
                offset[w + 1].append(mid)
                labels[mid] = "Y"
        steps.extend(deletions)
        for w in range(n):
            v = (stride * w, mc)
            steps.append(PatternStep(v, "xrot", cyc.x[w], w, (stride * w, nc)))
            labels[v] = f"M{w + 1}{_primes(j)}"
        steps.extend(ancillas)
        for w in range(n):
            v = (stride * w, nc)
            steps.append(
                PatternStep(v, "zrot", cyc.z[w], w, (stride * w, nc + 1), tuple(couple[w]), tuple(offset[w]))
            )
            labels[v] = f"N{w + 1}{_primes(j)}"
    for w in range(n):
        labels[(stride * w, 2 * m)] = f"out{w + 1}"
    return _finish(
        graph,
        steps,
        [(stride * w, 0) for w in range(n)],
        [(stride * w, 2 * m) for w in range(n)],
        vtypes,
        "RemoteCZ_I" if two_ancillas else "RemoteCZ_II",
        labels,
    )


# -- cancellation substrate ---------------------------------------------------


def _fixed_layer(n: int, t: int, subunits: int) -> frozenset[tuple[int, int]]:
    if t >= 4 * subunits:
        return frozenset()
    first = 0 if t % 4 < 2 else 1
    return frozenset((i, i + 1) for i in range(first, n - 1, 2))


def cancellation_cycles(cf: CycleForm) -> CycleForm:
    """Rewrite ``cf`` onto fixed CZ layers where CZ pairs either cancel or add up.

    The result has ``4 (m + 1) + 1`` cycles. Cycles ``4k, 4k + 1`` carry CZ on
    pairs ``(i, i+1)`` with ``i`` even, cycles ``4k + 2, 4k + 3`` on pairs with
    ``i`` odd. Between the two CZ of a pair, the target's X angle is 0 (the
    pair cancels) or ``INTERSPERSED_ANGLE`` (the pair acts as an entangling
    gate locally equivalent to CNOT). Circuit rotations and the local
    corrections of each enacted pair are merged and re-expressed as Euler
    angles in the free slots.
    """
    n, m = cf.width, cf.m
    subunits = m + 1
    total = 4 * subunits + 1
    x = [[0.0] * n for _ in range(total)]
    z = [[0.0] * n for _ in range(total)]

    def place(q: int, gap: int, u: np.ndarray) -> None:
        first, middle, last, _ = euler_decompose(u)
        z[2 * gap - 1][q] = first
        x[2 * gap][q] = middle
        z[2 * gap][q] = last

    pending = [np.eye(2, dtype=complex) for _ in range(n)]
    free = [1] * n
    for cyc in cf.cycles:
        for q in range(n):
            pending[q] = zrot_matrix(cyc.z[q]) @ xrot_matrix(cyc.x[q]) @ pending[q]
        for i, k in sorted(cyc.cz):
            event = max(free[i], free[k])
            if event % 2 != i % 2:
                event += 1
            if event > 2 * subunits - 1:
                raise PatternError("cancellation schedule overflow")
            place(i, event, pending[i])
            place(k, event, HADAMARD @ pending[k])
            x[2 * event + 1][k] = INTERSPERSED_ANGLE
            pending[i] = _S_GATE
            pending[k] = HADAMARD @ xrot_matrix(math.pi / 4)
            free[i] = free[k] = event + 1
    for q in range(n):
        place(q, 2 * subunits, pending[q])
    cycles = tuple(Cycle(tuple(x[t]), tuple(z[t]), _fixed_layer(n, t, subunits)) for t in range(total))
    return CycleForm(n, cycles)


def _cancellation(cf: CycleForm) -> MeasurementPattern:
    p = compile_tg(cancellation_cycles(cf))
    labels = dict(p.labels)
    for s in p.steps:
        if s.kind == "xrot" and (s.vertex[1] // 2) % 2 == 1:
            labels[s.vertex] = "X*"
    return MeasurementPattern(
        p.graph, p.steps, p.inputs, p.outputs, p.vtypes, "Cancellation", tuple(labels.items())
    )


# -- routing substrate --------------------------------------------------------


def _routing(cf: CycleForm) -> MeasurementPattern:
    """Diamond chains: each diamond routes a wire through its interaction or bypass vertex.

    Wire ``w`` uses rows ``3w .. 3w + 2``. Diamond ``j`` has its entry at
    ``(3w + 1, 2j)``, upper vertex ``(3w, 2j + 1)`` and lower vertex
    ``(3w + 2, 2j + 1)``. In diamonds of parity ``p`` the lower vertex of wire
    ``w`` (``w % 2 == p``) is linked to the upper vertex of wire ``w + 1``.
    Circuit cycle ``j`` runs on diamonds ``2j`` (rotations and CZ on pairs with
    even ``w``) and ``2j + 1`` (CZ on pairs with odd ``w``).
    """
    n, m = cf.width, cf.m
    diamonds = 2 * m
    verts: list[tuple[Coord, str]] = []
    edges: list[tuple[Coord, Coord]] = []
    vtypes: dict[Coord, str] = {}
    for w in range(n):
        for j in range(diamonds + 1):
            centre = (3 * w + 1, 2 * j)
            verts.append((centre, "data"))
            vtypes[centre] = "M"
            if j == diamonds:
                continue
            for v in ((3 * w, 2 * j + 1), (3 * w + 2, 2 * j + 1)):
                verts.append((v, "routing"))
                vtypes[v] = "N"
                edges.extend([(centre, v), (v, (3 * w + 1, 2 * j + 2))])
    for j in range(diamonds):
        edges.extend(((3 * w + 2, 2 * j + 1), (3 * w + 3, 2 * j + 1)) for w in range(j % 2, n - 1, 2))
    graph = GraphSpec(tuple(verts), frozenset(edges))

    def link(w: int, j: int) -> tuple[Coord | None, int | None]:
        """Interaction vertex of wire ``w`` in diamond ``j`` and its partner wire."""
        if w % 2 == j % 2 and w + 1 < n:
            return (3 * w + 2, 2 * j + 1), w + 1
        if (w - 1) % 2 == j % 2 and w >= 1:
            return (3 * w, 2 * j + 1), w - 1
        return None, None

    steps: list[PatternStep] = []
    labels: dict[Coord, str] = {}
    for j in range(diamonds):
        cyc = cf.cycles[j // 2]
        rotate = j % 2 == 0
        pairs = {p for p in cyc.cz if p[0] % 2 == j % 2}
        chosen: dict[int, Coord] = {}
        for w in range(n):
            hub, partner = link(w, j)
            upper, lower = (3 * w, 2 * j + 1), (3 * w + 2, 2 * j + 1)
            active = hub is not None and (min(w, partner), max(w, partner)) in pairs
            if active:
                chosen[w] = hub
            else:
                chosen[w] = upper if hub == lower else lower if hub == upper else upper
            skipped = lower if chosen[w] == upper else upper
            steps.append(PatternStep(skipped, "mz"))
            labels[skipped] = "Z"
        for w in range(n):
            centre = (3 * w + 1, 2 * j)
            steps.append(PatternStep(centre, "xrot", cyc.x[w] if rotate else 0.0, w, chosen[w]))
            labels[centre] = f"M{w + 1}{_primes(j)}"
        for w in range(n):
            hub, partner = link(w, j)
            couple = ()
            if hub is not None and chosen[w] == hub and chosen[partner] == link(partner, j)[0]:
                couple = ((partner, chosen[partner]),)
            v = chosen[w]
            steps.append(PatternStep(v, "zrot", cyc.z[w] if rotate else 0.0, w, (3 * w + 1, 2 * j + 2), couple))
            labels[v] = f"N{w + 1}{_primes(j)}"
    for w in range(n):
        labels[(3 * w + 1, 2 * diamonds)] = f"out{w + 1}"
    return _finish(
        graph,
        steps,
        [(3 * w + 1, 0) for w in range(n)],
        [(3 * w + 1, 2 * diamonds) for w in range(n)],
        vtypes,
        "Routing",
        labels,
    )


# -- universal front end ------------------------------------------------------

_BUILDERS = {
    "TG": compile_tg,
    "RemoteCZ_I": lambda cf: _remote(cf, True),
    "RemoteCZ_II": lambda cf: _remote(cf, False),
    "Cancellation": _cancellation,
    "Routing": _routing,
}


def _lattice_spec(variant: str, n: int, m: int) -> tuple[tuple[int, int], frozenset[Coord]]:
    stride = 3 if variant == "RemoteCZ_I" else 2
    rows, cols = stride * (n - 1) + 1, 2 * m + 1
    if m == 0:
        return (rows, 1), frozenset()
    deletions = frozenset(
        (stride * w + k, c) for w in range(n - 1) for k in range(1, stride) for c in range(0, cols, 2)
    )
    return (rows, cols), deletions


def physical_qubits(variant: str, n: int, m: int) -> int:
    """Size of the variant's resource state for ``n`` wires and ``m`` cycles."""
    if variant not in VARIANTS:
        raise PatternError(f"unknown variant {variant!r}")
    if variant in _EMBEDDABLE:
        (rows, cols), _ = _lattice_spec(variant, n, m)
        return rows * cols
    blank = Cycle((0.0,) * n, (0.0,) * n)
    return len(_BUILDERS[variant](CycleForm(n, (blank,) * m)).graph)


def _cost_per_cycle(variant: str) -> int:
    """Mixed second difference of the resource size in ``n`` and ``m``.

    This is the number of extra physical qubits one more logical qubit costs
    per extra cycle, read off the constructions themselves.
    """
    q = lambda n, m: physical_qubits(variant, n, m)  # noqa: E731
    return q(3, 2) - q(3, 1) - q(2, 2) + q(2, 1)


def compile_universal(cf: CycleForm, variant: str) -> tuple[SubstrateScheme, MeasurementPattern]:
    """Compile onto a circuit-independent substrate (or the TG graph for ``variant='TG'``).

    Raises
    ------
    PatternError
        Unknown variant.
    """
    if variant not in VARIANTS:
        raise PatternError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    pattern = _BUILDERS[variant](cf)
    shape = deletions = None
    if variant in _EMBEDDABLE:
        shape, deletions = _lattice_spec(variant, cf.width, cf.m)
    scheme = SubstrateScheme(
        variant,
        cf.width,
        cf.m,
        _cost_per_cycle(variant),
        physical_qubits(variant, cf.width, cf.m),
        shape,
        deletions,
        INTERSPERSED_ANGLE if variant == "Cancellation" else None,
    )
    return scheme, pattern


def embed_in_cluster(s: SubstrateScheme) -> tuple[GraphSpec, frozenset[Coord]]:
    """Square-lattice window and the vertices to Z-measure to obtain the substrate.

    Raises
    ------
    PatternError
        The variant has no cluster embedding.
    """
    if s.variant not in _EMBEDDABLE:
        raise PatternError(f"no cluster embedding for {s.variant}")
    (rows, cols), deletions = _lattice_spec(s.variant, s.n, s.m)
    if s.m == 0:
        stride = 3 if s.variant == "RemoteCZ_I" else 2
        inputs = tuple(((stride * w, 0), "data") for w in range(s.n))
        return GraphSpec(inputs), deletions
    verts = [((r, c), "data" if (r % (3 if s.variant == "RemoteCZ_I" else 2)) == 0 else "delete-candidate")
             for r in range(rows) for c in range(cols)]
    edges = [((r, c), (r, c + 1)) for r in range(rows) for c in range(cols - 1)]
    edges += [((r, c), (r + 1, c)) for r in range(rows - 1) for c in range(cols)]
    return GraphSpec(tuple(verts), frozenset(edges)), deletions


# -- execution ----------------------------------------------------------------


class PatternResult(NamedTuple):
    """Output of a pattern run; ``output`` equals ``frame.matrix() @ U @ input``."""

    output: StateVector
    frame: PauliFrame
    record: OutcomeRecord
    probability: float
    peak_qubits: int


class _Tracker:
    """Frame bookkeeping shared by numeric execution and symbolic analysis.

    Values are ints (bits) or frozensets of vertices (XOR expressions); both
    support ``^`` and are falsy at zero.
    """

    def __init__(self, p: MeasurementPattern, a, b, zero) -> None:
        self.p = p
        self.zero = zero
        self.a, self.b = list(a), list(b)
        self.carrier = list(p.inputs)
        self.holder = {v: w for w, v in enumerate(p.inputs)}
        self.pending: dict[Coord, object] = {}
        self.departed: dict[Coord, object] = {}

    def z(self, u: Coord, val) -> None:
        if not val:
            return
        w = self.holder.get(u)
        if w is None:
            self.pending[u] = self.pending.get(u, self.zero) ^ val
        elif self.p.vertex_types[u] == "M":
            self.a[w] ^= val
        else:
            self.b[w] ^= val

    def take_pending(self, v: Coord):
        return self.pending.pop(v, self.zero)

    def partner_a(self, wire: int, vertex: Coord):
        if self.carrier[wire] == vertex:
            return self.a[wire]
        if vertex in self.departed:
            return self.departed[vertex]
        raise PatternError(f"coupling to {vertex} before wire {wire} reached it")

    def advance(self, s: PatternStep, outcome) -> None:
        """Apply the frame effect of step ``s`` given its (true) outcome."""
        if s.kind in ("mz", "mx", "my"):
            for u in s.zfeed:
                self.z(u, outcome)
            return
        w = s.wire
        if s.kind == "xrot":
            self.a[w] ^= outcome
        else:
            self.b[w] ^= outcome
            for pw, pv in s.couplings:
                self.b[w] ^= self.partner_a(pw, pv)
        self.departed[s.vertex] = self.a[w]
        del self.holder[s.vertex]
        self.carrier[w] = s.output
        self.holder[s.output] = w
        self.z(s.output, self.take_pending(s.output))


def _check_frame(p: MeasurementPattern, frame: PauliFrame | None) -> PauliFrame:
    if frame is None:
        return PauliFrame.identity(p.n)
    if frame.n != p.n:
        raise FrameError("frame width does not match pattern")
    return frame


def _conjugator(s: PatternStep, t: _Tracker, outcomes: Mapping[Coord, int]) -> np.ndarray | None:
    if s.kind == "mz":
        return None
    if s.kind == "mx":
        return HADAMARD
    if s.kind == "my":
        return HPRIME
    w = s.wire
    if s.kind == "xrot":
        phi = -s.angle if t.b[w] else s.angle
    else:
        phi = -s.angle if t.a[w] else s.angle
        for anc in s.offsets:
            phi -= -math.pi / 4 if outcomes[anc] else math.pi / 4
    return HADAMARD @ zrot_matrix(phi)


def _run(p: MeasurementPattern, input: StateVector, frame, rng, windowed: bool) -> PatternResult:
    if input.n != p.n:
        raise SimulatorError(f"input has {input.n} qubits, pattern has {p.n} wires")
    if rng is None:
        raise SimulatorError("execution needs an outcome source")
    frame = _check_frame(p, frame)
    if not windowed and len(p.graph) > MAX_QUBITS:
        raise SimulatorError(f"pattern has {len(p.graph)} vertices, over the {MAX_QUBITS}-qubit cap")
    reg = Register(input, list(p.inputs))
    for v in p.inputs:
        reg.apply(HADAMARD, [v])
    live: set[Coord] = set(p.inputs)
    for u, v in p.graph.edges:
        if u in live and v in live:
            reg.apply(CZ_MATRIX, [u, v])

    def activate(v: Coord) -> None:
        if v in live:
            return
        reg.add(v, np.array([1, 1]))
        live.add(v)
        for u in p.graph.neighbors(v):
            if u in live and u in reg.index:
                reg.apply(CZ_MATRIX, [u, v])

    if not windowed:
        for v in p.graph.order:
            activate(v)
    t = _Tracker(p, frame.a, frame.b, 0)
    outcomes: dict[Coord, int] = {}
    record = OutcomeRecord()
    probability = 1.0
    for s in p.steps:
        if windowed:
            activate(s.vertex)
            for u in p.graph.neighbors(s.vertex):
                activate(u)
        conj = _conjugator(s, t, outcomes)
        raw, prob = reg.measure_out(s.vertex, conj, rng)
        bit = raw ^ t.take_pending(s.vertex) if s.kind in ("mx", "my") else raw
        probability *= prob
        outcomes[s.vertex] = bit
        record = record.add(s.step_id, bit)
        t.advance(s, bit)
    for v in p.outputs:
        activate(v)
    for v in p.outputs:
        reg.apply(HADAMARD, [v])
    out = reg.state(list(p.outputs))
    return PatternResult(out, PauliFrame.from_bits(t.a, t.b), record, probability, reg.peak)


def execute_pattern(p: MeasurementPattern, input: StateVector, frame: PauliFrame | None = None, rng=None) -> PatternResult:
    """Prepare the whole graph state, then measure in pattern order.

    Parameters
    ----------
    p
        Compiled pattern.
    input
        Physical input, wire ``w`` on qubit ``w`` (known errors included).
    frame
        Known Pauli error on the input.
    rng
        Outcome source with ``choose(p0)``.
    """
    return _run(p, input, frame, rng, windowed=False)


def execute_windowed(p: MeasurementPattern, input: StateVector, frame: PauliFrame | None = None, rng=None) -> PatternResult:
    """Like :func:`execute_pattern`, but a vertex is created (``|+>`` and its CZ
    edges to live vertices) only once it or a neighbour is about to be measured.
    """
    return _run(p, input, frame, rng, windowed=True)


class FrameExpressions(NamedTuple):
    """Symbolic frame data of a pattern.

    ``deps`` maps every measured vertex to the earlier outcomes whose XOR sets
    its angle sign, plus the ancillas feeding its angle offsets. ``final``
    lists ``(a_w, b_w)`` per wire as sets of vertices whose outcomes XOR to
    the final frame bit, for an identity input frame.
    """

    deps: dict[Coord, frozenset[Coord]]
    final: list[tuple[frozenset[Coord], frozenset[Coord]]]

    def evaluate(self, record: OutcomeRecord) -> PauliFrame:
        bits = record.as_dict()
        value = lambda expr: sum(bits[f"{r},{c}"] for r, c in expr) & 1  # noqa: E731
        return PauliFrame.from_bits([value(a) for a, _ in self.final], [value(b) for _, b in self.final])


def frame_expressions(p: MeasurementPattern) -> FrameExpressions:
    """Run the frame bookkeeping with outcomes kept as symbols."""
    zero = frozenset()
    t = _Tracker(p, [zero] * p.n, [zero] * p.n, zero)
    deps: dict[Coord, frozenset[Coord]] = {}
    for s in p.steps:
        if s.kind == "xrot":
            deps[s.vertex] = t.b[s.wire]
        elif s.kind == "zrot":
            deps[s.vertex] = t.a[s.wire] | frozenset(s.offsets)
        else:
            deps[s.vertex] = zero
        t.take_pending(s.vertex)
        t.advance(s, frozenset({s.vertex}))
    return FrameExpressions(deps, list(zip(t.a, t.b)))


def to_diagram(p: MeasurementPattern) -> SubstrateDiagram:
    """Substrate diagram: every vertex labelled with its measurement, edges styled."""
    deps = frame_expressions(p).deps
    labels = dict(p.labels)
    for v in p.graph.order:
        labels.setdefault(v, "?")
    return SubstrateDiagram.from_graph(p.graph, labels, p.optional, {v: d for v, d in deps.items() if d})
