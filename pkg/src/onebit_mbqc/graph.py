"""Graph states, cluster lattices, the deletion principle and substrate diagrams."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .statevec import MAX_QUBITS, ForcedOutcomes, Register, SimulatorError, StateVector

__all__ = [
    "Coord",
    "ROLES",
    "GraphError",
    "GraphSpec",
    "Deletion",
    "SubstrateDiagram",
    "build_graph_state",
    "cluster_lattice",
    "delete_vertex",
    "emit_diagram",
]

Coord = tuple[int, int]
ROLES = ("data", "ancilla-x", "ancilla-z", "routing", "delete-candidate")


class GraphError(ValueError):
    """Invalid graph or diagram."""


def _edge(u: Coord, v: Coord) -> tuple[Coord, Coord]:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class GraphSpec:
    """Vertices addressed by (row, col) with a role tag, and undirected edges.

    Examples
    --------
    >>> g = GraphSpec.from_edges([((0, 0), (0, 1))])
    >>> g.order, g.neighbors((0, 0))
    (((0, 0), (0, 1)), frozenset({(0, 1)}))
    """

    vertices: tuple[tuple[Coord, str], ...]
    edges: frozenset[tuple[Coord, Coord]] = frozenset()

    def __post_init__(self) -> None:
        verts = tuple(sorted((tuple(v), role) for v, role in self.vertices))
        ids = [v for v, _ in verts]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate vertex id")
        for _, role in verts:
            if role not in ROLES:
                raise GraphError(f"unknown role {role!r}")
        known = set(ids)
        edges = set()
        for u, v in self.edges:
            u, v = tuple(u), tuple(v)
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if u not in known or v not in known:
                raise GraphError(f"edge {(u, v)} references a missing vertex")
            edges.add(_edge(u, v))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", frozenset(edges))

    @classmethod
    def from_edges(
        cls, edges: Iterable[tuple[Coord, Coord]], vertices: Iterable[Coord] = (), role: str = "data"
    ) -> GraphSpec:
        edges = [tuple(e) for e in edges]
        ids = set(vertices) | {v for e in edges for v in e}
        return cls(tuple((v, role) for v in ids), frozenset(edges))

    @cached_property
    def order(self) -> tuple[Coord, ...]:
        """Vertex ids in sorted order; qubit ``k`` of a graph state is ``order[k]``."""
        return tuple(v for v, _ in self.vertices)

    @cached_property
    def roles(self) -> dict[Coord, str]:
        return dict(self.vertices)

    @cached_property
    def _adjacency(self) -> dict[Coord, frozenset[Coord]]:
        adj: dict[Coord, set[Coord]] = {v: set() for v in self.order}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {v: frozenset(n) for v, n in adj.items()}

    def __contains__(self, v: object) -> bool:
        return v in self.roles

    def __len__(self) -> int:
        return len(self.vertices)

    def neighbors(self, v: Coord) -> frozenset[Coord]:
        if v not in self.roles:
            raise GraphError(f"vertex {v} absent")
        return self._adjacency[v]

    def without(self, v: Coord) -> GraphSpec:
        if v not in self.roles:
            raise GraphError(f"vertex {v} absent")
        return GraphSpec(
            tuple(item for item in self.vertices if item[0] != v),
            frozenset(e for e in self.edges if v not in e),
        )

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen, stack = {self.order[0]}, [self.order[0]]
        while stack:
            for w in self._adjacency[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)


def build_graph_state(g: GraphSpec, edge_order: Sequence[tuple[Coord, Coord]] | None = None) -> StateVector:
    """``prod_{edges} CZ |+>^V`` with qubit ``k`` on ``g.order[k]``.

    The CZ gates commute, so ``edge_order`` only matters for testing that claim.
    """
    n = len(g)
    if n > MAX_QUBITS:
        raise SimulatorError(f"{n} vertices exceed the {MAX_QUBITS}-qubit cap")
    index = {v: k for k, v in enumerate(g.order)}
    amps = np.full(2**n, 2 ** (-n / 2), dtype=complex)
    basis = np.arange(2**n)
    edges = sorted(g.edges) if edge_order is None else [_edge(*e) for e in edge_order]
    if set(edges) != set(g.edges) or len(edges) != len(g.edges):
        raise GraphError("edge_order must list every edge once")
    for u, v in edges:
        both = ((basis >> index[u]) & 1) & ((basis >> index[v]) & 1)
        amps = amps * np.where(both, -1, 1)
    return StateVector(amps)


def cluster_lattice(rows: int, cols: int, role: str = "data") -> GraphSpec:
    """Square lattice with 4-neighbour adjacency; vertex ``(r, c)``."""
    if rows < 1 or cols < 1:
        raise GraphError("lattice needs at least one row and one column")
    verts = [((r, c), role) for r in range(rows) for c in range(cols)]
    edges = [((r, c), (r, c + 1)) for r in range(rows) for c in range(cols - 1)]
    edges += [((r, c), (r + 1, c)) for r in range(rows - 1) for c in range(cols)]
    return GraphSpec(tuple(verts), frozenset(edges))


class Deletion(NamedTuple):
    """Result of Z-measuring a graph vertex.

    ``corrections`` are the vertices owed a ``Z`` (the neighbours when the
    outcome is 1); they are tracked classically rather than applied.
    """

    outcome: int
    state: StateVector
    graph: GraphSpec
    corrections: frozenset[Coord]
    probability: float


def delete_vertex(state: StateVector, g: GraphSpec, v: Coord, rng) -> Deletion:
    """Measure vertex ``v`` in the Z basis and drop it.

    ``rng`` is an outcome source (``choose(p0)``) or a forced branch bit.
    """
    if v not in g:
        raise GraphError(f"vertex {v} absent")
    if state.n != len(g):
        raise GraphError("state size does not match graph")
    source = ForcedOutcomes([rng]) if isinstance(rng, (int, np.integer)) else rng
    reg = Register(state, g.order)
    bit, prob = reg.measure_out(v, None, source)
    rest = g.without(v)
    fixes = g.neighbors(v) if bit else frozenset()
    return Deletion(bit, reg.state(rest.order), rest, fixes, prob)


@dataclass(frozen=True)
class SubstrateDiagram:
    """Labelled vertices on a grid, edges with a style, and adaptivity dependencies.

    ``optional`` edges are drawn dashed (DOT) or with ``:`` (ASCII); they mark
    circuit-dependent CZ links.
    """

    labels: tuple[tuple[Coord, str], ...]
    edges: frozenset[tuple[Coord, Coord]] = frozenset()
    optional: frozenset[tuple[Coord, Coord]] = frozenset()
    dependencies: tuple[tuple[Coord, frozenset[Coord]], ...] = ()

    def __post_init__(self) -> None:
        labels = tuple(sorted((tuple(v), str(lab)) for v, lab in self.labels))
        ids = [v for v, _ in labels]
        if len(set(ids)) != len(ids):
            raise GraphError("each vertex must be labelled exactly once")
        known = set(ids)
        edges = frozenset(_edge(tuple(u), tuple(v)) for u, v in self.edges)
        optional = frozenset(_edge(tuple(u), tuple(v)) for u, v in self.optional)
        if not optional <= edges:
            raise GraphError("optional edges must be edges")
        if any(u not in known or w not in known for u, w in edges):
            raise GraphError("edge references an unlabelled vertex")
        deps = tuple(sorted((tuple(v), frozenset(d)) for v, d in self.dependencies))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "optional", optional)
        object.__setattr__(self, "dependencies", deps)
        self._check_acyclic()

    @classmethod
    def from_graph(
        cls,
        g: GraphSpec,
        labels: Mapping[Coord, str],
        optional: Iterable[tuple[Coord, Coord]] = (),
        dependencies: Mapping[Coord, Iterable[Coord]] | None = None,
    ) -> SubstrateDiagram:
        missing = set(g.order) - set(labels)
        if missing:
            raise GraphError(f"unlabelled vertices {sorted(missing)}")
        deps = tuple((v, frozenset(d)) for v, d in (dependencies or {}).items())
        return cls(tuple(labels.items()), g.edges, frozenset(optional), deps)

    def _check_acyclic(self) -> None:
        graph = dict(self.dependencies)
        state: dict[Coord, int] = {}

        def visit(v: Coord) -> None:
            state[v] = 1
            for w in graph.get(v, ()):
                mark = state.get(w, 0)
                if mark == 1:
                    raise GraphError(f"dependency cycle through {w}")
                if mark == 0:
                    visit(w)
            state[v] = 2

        for v in graph:
            if state.get(v, 0) == 0:
                visit(v)


def emit_diagram(d: SubstrateDiagram, format: str = "ascii") -> str:
    """Render a substrate diagram as ASCII art or a DOT graph.

    Examples
    --------
    >>> d = SubstrateDiagram((((0, 0), "M1"), ((0, 1), "N1")), frozenset({((0, 0), (0, 1))}))
    >>> emit_diagram(d, "ascii")
    'M1 — N1\\n'
    """
    if format == "dot":
        return _emit_dot(d)
    if format == "ascii":
        return _emit_ascii(d)
    raise GraphError(f"unknown diagram format {format!r}")


def _emit_dot(d: SubstrateDiagram) -> str:
    lines = ["graph G {", "  node [shape=circle];"]
    for (r, c), lab in d.labels:
        text = lab.replace('"', '\\"')
        lines.append(f'  "{r},{c}" [label="{text}", pos="{c},{-r}!"];')
    for u, v in sorted(d.edges):
        style = "dashed" if (u, v) in d.optional else "solid"
        lines.append(f'  "{u[0]},{u[1]}" -- "{v[0]},{v[1]}" [style={style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _emit_ascii(d: SubstrateDiagram) -> str:
    if not d.labels:
        return ""
    labels = dict(d.labels)
    rows = range(min(r for r, _ in labels), max(r for r, _ in labels) + 1)
    cols = range(min(c for _, c in labels), max(c for _, c in labels) + 1)
    width = {c: max((len(labels[(r, c)]) for r in rows if (r, c) in labels), default=1) for c in cols}
    gap = 3
    start, x = {}, 0
    for c in cols:
        start[c] = x
        x += width[c] + gap
    total = x - gap
    center = {c: start[c] + (width[c] - 1) // 2 for c in cols}
    gap_mid = {c: start[c] + width[c] + gap // 2 for c in cols}
    out: list[str] = []
    for r in rows:
        line = [" "] * total
        for c in cols:
            if (r, c) in labels:
                text = labels[(r, c)]
                line[start[c] : start[c] + len(text)] = text
            if (r, c + 1) in labels and _edge((r, c), (r, c + 1)) in d.edges:
                line[gap_mid[c]] = "—"
        out.append("".join(line).rstrip())
        if r + 1 in rows:
            link = [" "] * total
            for c in cols:
                e = _edge((r, c), (r + 1, c))
                if e in d.edges:
                    link[center[c]] = ":" if e in d.optional else "|"
                if c + 1 in cols:
                    down = _edge((r, c), (r + 1, c + 1)) in d.edges
                    up = _edge((r, c + 1), (r + 1, c)) in d.edges
                    if down or up:
                        link[gap_mid[c]] = "X" if down and up else ("\\" if down else "/")
            text = "".join(link).rstrip()
            out.append(text)
    return "\n".join(out).rstrip("\n") + "\n"
