"""Clock reduction: active clocks, clock classes, the clock graph and renaming."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .. import dbm
from ..dbm import INF, Dbm
from ..ta import Constraint, Edge, TimedAutomaton, normalize_guard
from ..zonegraph import ZoneGraph
from .coloring import color_graph

ActiveClockMap = dict  # location -> frozenset of clock names


def active_clocks(ta: TimedAutomaton, *, with_rounds: bool = False):
    """Least fixpoint of: a clock is active where a guard reads it, or where it
    survives an edge into a location where it is active."""
    act = {l: frozenset(ta.constrained_clocks(l)) for l in ta.locations}
    rounds = 0
    while True:
        nxt = {}
        for l in ta.locations:
            s = set(act[l])
            for _, e in ta.outgoing(l):
                s |= act[e.target] - set(e.resets)
            nxt[l] = frozenset(s)
        if nxt == act:
            break
        act = nxt
        rounds += 1
    return (act, rounds) if with_rounds else act


def remove_redundant_resets(ta: TimedAutomaton, act: ActiveClockMap) -> TimedAutomaton:
    """Drop resets of clocks that are not active at the edge's target."""
    edges = [replace(e, resets=tuple(x for x in e.resets if x in act[e.target])) for e in ta.edges]
    return ta.with_edges(edges)


def reachable_zones(ta: TimedAutomaton, limit: int = 20000) -> dict[str, list[Dbm]]:
    """Forward reachable zones per location under plain max-constant widening.

    Difference constraints between clocks survive the widening as long as
    their constant lies within the bound, which is what the class detection
    needs.
    """
    n = ta.nclocks
    top = ta.max_constant()
    guards = [ta.guard_dbm(e.guard) for e in ta.edges]
    out: dict[str, list[Dbm]] = {l: [] for l in ta.locations}
    start = _widen(dbm.future(dbm.zero(n)), top)
    work = [(ta.initial, start)]
    out[ta.initial].append(start)
    while work:
        loc, z = work.pop()
        for k, e in ta.outgoing(loc):
            if guards[k] is None:
                continue
            w = dbm.intersect(z, guards[k])
            if w is None:
                continue
            w = _widen(dbm.future(dbm.reset_clocks(w, ta.reset_indices(e))), top)
            known = out[e.target]
            if any(dbm.includes(v, w) for v in known):
                continue
            known[:] = [v for v in known if not dbm.includes(w, v)] + [w]
            work.append((e.target, w))
            if sum(map(len, out.values())) > limit:
                raise RuntimeError("reachable zone limit exceeded")
    return out


def _widen(z: Dbm, top: int) -> Dbm:
    d = z.dim
    m = list(z.m)
    hi, lo = dbm.raw(top), dbm.raw(-top, True)
    changed = False
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            b = m[i * d + j]
            if i and b < INF and b > hi:
                m[i * d + j], changed = INF, True
            elif j and b < lo:
                m[i * d + j], changed = lo, True
    return dbm.canonicalize(d, m) if changed else z


@dataclass
class ClockClass:
    """Clocks of one location whose pairwise differences are constant.

    ``offsets[x]`` is ``x - members[0]`` in every reachable state.
    """

    location: str
    offsets: dict[str, int]

    @property
    def members(self) -> list[str]:
        return list(self.offsets)


def partition_active_clocks(ta: TimedAutomaton, zg, act: ActiveClockMap) -> dict[str, list[ClockClass]]:
    """Group active clocks with a fixed difference across every zone of their location.

    ``zg`` is a zone graph or a mapping from locations to zone lists.
    """
    if isinstance(zg, ZoneGraph):
        zones = {l: [n.zone for n in zg.nodes_at(l)] for l in ta.locations}
    else:
        zones = zg
    out = {}
    for l in ta.locations:
        todo = [x for x in ta.clocks if x in act[l]]
        classes = []
        while todo:
            rep = todo.pop(0)
            offs = {rep: 0}
            for y in list(todo):
                k = _common_difference(ta, zones.get(l, []), y, rep)
                if k is not None:
                    offs[y] = k
                    todo.remove(y)
            classes.append(ClockClass(l, offs))
        out[l] = classes
    return out


def _common_difference(ta, zones, x, y):
    i, j = ta.clock_index(x), ta.clock_index(y)
    ks = {dbm.fixed_difference(z, i, j) for z in zones}
    if len(ks) == 1 and None not in ks:
        return ks.pop()
    return None


def discrete_partition(ta: TimedAutomaton, act: ActiveClockMap) -> dict[str, list[ClockClass]]:
    return {l: [ClockClass(l, {x: 0}) for x in ta.clocks if x in act[l]] for l in ta.locations}


@dataclass
class Vertex:
    """A merged class: clock ``c`` equals ``x + shift[(l, x)]`` at location ``l``."""

    classes: list[ClockClass]
    shift: dict[tuple[str, str], int] = field(default_factory=dict)

    @property
    def locations(self) -> list[str]:
        return [c.location for c in self.classes]

    def name(self) -> str:
        clocks = sorted({x for c in self.classes for x in c.members})
        return "/".join(clocks) + "@" + ",".join(self.locations)


@dataclass
class ClockGraph:
    vertices: list[Vertex]
    edges: set[tuple[int, int]]

    def vertex_of(self, loc: str, clock: str) -> int | None:
        for k, v in enumerate(self.vertices):
            if (loc, clock) in v.shift:
                return k
        return None


class _Conflict(Exception):
    def __init__(self, classes):
        self.classes = classes


def build_clock_graph(ta: TimedAutomaton, act: ActiveClockMap, partitions) -> ClockGraph:
    """Merge classes linked by a clock that crosses an edge unreset, then add
    conflict edges between classes sharing a location.

    Classes that cannot share one clock consistently are broken up into
    single clocks until the merge is consistent.
    """
    parts = {l: list(cs) for l, cs in partitions.items()}
    while True:
        try:
            return _clock_graph(ta, act, parts)
        except _Conflict as c:
            if all(len(cls.offsets) == 1 for cls in c.classes):
                raise RuntimeError("inconsistent clock classes") from None
            for cls in c.classes:
                if len(cls.offsets) > 1:
                    i = parts[cls.location].index(cls)
                    parts[cls.location][i:i + 1] = [ClockClass(cls.location, {x: 0}) for x in cls.offsets]


def _clock_graph(ta, act, parts) -> ClockGraph:
    nodes = [c for l in ta.locations for c in parts.get(l, [])]
    where = {(c.location, x): k for k, c in enumerate(nodes) for x in c.offsets}
    parent = list(range(len(nodes)))
    pot = [0] * len(nodes)  # pot[k] = t[k] - t[parent[k]]

    def find(k):
        if parent[k] == k:
            return k, 0
        r, p = find(parent[k])
        parent[k], pot[k] = r, pot[k] + p
        return r, pot[k]

    def link(a, b, diff):
        # require t[b] - t[a] == diff
        ra, pa = find(a)
        rb, pb = find(b)
        if ra == rb:
            if pb - pa != diff:
                raise _Conflict([nodes[k] for k in range(len(nodes)) if find(k)[0] == ra])
            return
        parent[rb] = ra
        pot[rb] = pa + diff - pb

    for e in ta.edges:
        for x in act[e.target]:
            if x in e.resets or x not in act[e.source]:
                continue
            a, b = where[e.source, x], where[e.target, x]
            link(a, b, nodes[b].offsets[x] - nodes[a].offsets[x])

    groups: dict[int, list[int]] = {}
    for k in range(len(nodes)):
        groups.setdefault(find(k)[0], []).append(k)
    for members in groups.values():
        locs = [nodes[k].location for k in members]
        if len(set(locs)) < len(locs):
            raise _Conflict([nodes[k] for k in members])

    # clock value c = x + t - offset[x]; it must read 0 where the class is entered by a reset
    demand: dict[int, int] = {}
    entries = [(None, ta.initial, ())] + [(e.source, e.target, e.resets) for e in ta.edges]
    for src, dst, resets in entries:
        for k, cls in enumerate(nodes):
            if cls.location != dst:
                continue
            if src is not None and any(x not in resets and x in act[src] for x in cls.offsets):
                continue
            root, p = find(k)
            vals = {p - off for off in cls.offsets.values()}
            if len(vals) > 1 or demand.setdefault(root, next(iter(vals))) != next(iter(vals)):
                raise _Conflict([nodes[j] for j in groups[root]])

    vertices = []
    order = sorted(groups.values(), key=lambda ms: min((ta.locations.index(nodes[k].location),
                                                       min(ta.clock_index(x) for x in nodes[k].offsets))
                                                      for k in ms))
    for members in order:
        root = find(members[0])[0]
        base = -demand[root] if root in demand else _best_base(ta, nodes, members, find)
        shift = {}
        for k in members:
            p = find(k)[1]
            for x, off in nodes[k].offsets.items():
                shift[nodes[k].location, x] = p - off + base
        vertices.append(Vertex([nodes[k] for k in members], shift))
    edges = set()
    for a in range(len(vertices)):
        for b in range(a + 1, len(vertices)):
            if set(vertices[a].locations) & set(vertices[b].locations):
                edges.add((a, b))
    return ClockGraph(vertices, edges)


def _best_base(ta, nodes, members, find):
    """Shift for a class never entered by a reset: keep rewritten constants small."""
    consts = {}
    for k in members:
        p = find(k)[1]
        for x, off in nodes[k].offsets.items():
            ks = [c.k for e in ta.edges if e.source == nodes[k].location for c in e.guard if c.clock == x]
            consts[(nodes[k].location, x)] = (p - off, ks)
    best = None
    for d0, _ in consts.values():
        cost = max((abs(k + d - d0) for d, ks in consts.values() for k in ks), default=0)
        if best is None or cost < best[0]:
            best = (cost, -d0)
    return best[1] if best else 0


@dataclass
class RenameReport:
    active: dict
    partitions: dict
    graph: ClockGraph
    coloring: list[int]
    count: int
    names: dict[str, list[str]]


def stage4_rename(ta: TimedAutomaton, *, details: bool = False):
    """Rename clocks by colouring the clock graph; one fresh clock per colour."""
    if ta.nclocks == 0:
        return (ta, None) if details else ta
    act = active_clocks(ta)
    ta = remove_redundant_resets(ta, act)
    zones = reachable_zones(ta)
    best = None
    for parts in (partition_active_clocks(ta, zones, act), discrete_partition(ta, act)):
        g = build_clock_graph(ta, act, parts)
        colors, count = color_graph(len(g.vertices), g.edges)
        if best is None or count < best[3]:
            best = (parts, g, colors, count)
    parts, g, colors, count = best
    out = _rewrite(ta, act, g, colors, count)
    if not details:
        return out
    names = {f"c{c}": [] for c in range(count)}
    for k, v in enumerate(g.vertices):
        names[f"c{colors[k]}"].append(v.name())
    return out, RenameReport(act, parts, g, colors, count, names)


def _rewrite(ta, act, g: ClockGraph, colors, count) -> TimedAutomaton:
    clocks = tuple(f"c{c}" for c in range(count))
    vert = {}
    for k, v in enumerate(g.vertices):
        for key in v.shift:
            vert[key] = k
    edges = []
    for e in ta.edges:
        atoms = []
        dead = False
        for c in e.guard:
            k = vert[e.source, c.clock]
            d = g.vertices[k].shift[e.source, c.clock]
            new = c.k + d
            if new < 0:
                if c.is_upper:
                    dead = True
                continue
            atoms.append(Constraint(clocks[colors[k]], c.rel, new))
        if dead:
            continue
        resets = set()
        for k, v in enumerate(g.vertices):
            for cls in v.classes:
                if cls.location != e.target:
                    continue
                if all(x in e.resets or x not in act[e.source] for x in cls.offsets):
                    resets.add(colors[k])
        guard = normalize_guard(atoms, clocks)
        gz = dbm.from_constraints(count, [ent for a in guard for ent in
                                         dbm.elementary(clocks.index(a.clock) + 1, a.rel, a.k)])
        if gz is None:
            continue
        edges.append(Edge(e.source, e.target, e.action, guard, tuple(clocks[c] for c in sorted(resets))))
    return TimedAutomaton(ta.locations, ta.initial, clocks, ta.alphabet, tuple(dict.fromkeys(edges)))
