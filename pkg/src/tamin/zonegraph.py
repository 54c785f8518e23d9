"""Pre-stable zone graphs.

Construction has two phases.  The first explores the reachable valuations
forward, keeping the zones of each location pairwise disjoint.  The second
splits zones until every zone is uniform for the outgoing guards and
pre-stable for every action and delay step.

The engine (:class:`ZoneBuilder`) is generic over locations and transitions so
the bisimulation checker reuses it for the product of two automata.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, NamedTuple, Sequence

from . import dbm
from .dbm import Dbm
from .ta import TimedAutomaton


class Transition(NamedTuple):
    src: Hashable
    label: object
    guard: Dbm
    resets: tuple[int, ...]
    dst: Hashable
    tag: object = None


class ZoneBuilder:
    """Builds the partition of the reachable valuations of each location.

    ``splitters[loc]`` holds the elementary constraints that every zone of
    ``loc`` must satisfy uniformly.  ``bounds[loc]`` holds per-clock max
    constants (index 0 ignored); see :meth:`saturate`.  With
    ``backward`` set, delay successors are also split by the future of their
    predecessors so that delay edges form disjoint chains.
    """

    def __init__(self, nclocks: int, locations: Sequence[Hashable], transitions: Iterable[Transition],
                 splitters: dict, bounds: dict, backward: bool = False):
        self.nclocks = nclocks
        self.locations = list(locations)
        self.out: dict = {l: [] for l in self.locations}
        self.into: dict = {l: set() for l in self.locations}
        for t in transitions:
            self.out[t.src].append(t)
            self.into[t.dst].add(t.src)
        self.bounds = bounds
        # the max-constant boundaries keep every zone on one side of them
        self.splitters = {
            l: list(dict.fromkeys([*splitters.get(l, ()),
                                   *((i, 0, dbm.raw(m)) for i, m in enumerate(bounds[l]) if i and m >= 0)]))
            for l in self.locations
        }
        self.backward = backward
        self.zones: dict = {l: [] for l in self.locations}
        self.splits = 0
        self._member_cache: dict = {}
        self._fut_cache: dict = {}
        self._past_cache: dict = {}
        self._img_cache: dict = {}

    # phase 1

    def explore(self, init_loc, init_zone: Dbm):
        work = deque()
        for piece in self.saturate(init_loc, dbm.future(init_zone)):
            for z in self._add(init_loc, piece):
                work.append((init_loc, z))
        while work:
            loc, z = work.popleft()
            for t in self.out[loc]:
                s = dbm.intersect(z, t.guard)
                if s is None:
                    continue
                for piece in self.saturate(t.dst, dbm.future(dbm.reset_clocks(s, t.resets))):
                    for z2 in self._add(t.dst, piece):
                        work.append((t.dst, z2))
        for loc in self.locations:
            self.zones[loc] = _coalesce(self.zones[loc])

    def saturate(self, loc, z: Dbm) -> list[Dbm]:
        """Pieces of ``z`` closed under forgetting clock values above their max constant.

        A clock whose max constant is negative is irrelevant and freed; a
        clock above its max constant keeps only that lower bound.  The
        resulting sets are unions of classes of a time-abstract bisimulation,
        which keeps refinement finite.
        """
        bounds = self.bounds[loc]
        dead = [i for i in range(1, len(bounds)) if bounds[i] < 0]
        if dead:
            z = dbm.free_clocks(z, dead)
        pieces = [z]
        for i in range(1, len(bounds)):
            if bounds[i] < 0:
                continue
            nxt = []
            for p in pieces:
                low, high = dbm.split_by(p, i, 0, dbm.raw(bounds[i]))
                if low is not None:
                    nxt.append(low)
                if high is not None:
                    high = dbm.constrain(dbm.free_clocks(high, [i]), 0, i, dbm.raw(-bounds[i], True))
                    nxt.append(high)
            pieces = nxt
        return pieces

    def _add(self, loc, z: Dbm) -> list[Dbm]:
        rest = [z]
        for old in self.zones[loc]:
            nxt = []
            for r in rest:
                if not dbm.intersects(r, old):
                    nxt.append(r)
                    continue
                _, diff = dbm.split_difference(r, old)
                nxt.extend(diff)
            rest = nxt
            if not rest:
                return []
        self.zones[loc].extend(rest)
        return rest

    # phase 2

    def refine(self):
        queue = deque((l, z) for l in self.locations for z in self.zones[l])
        queued = set(queue)
        while queue:
            item = queue.popleft()
            queued.discard(item)
            loc, z = item
            if z not in self._members(loc):
                continue
            found = self._find_split(loc, z)
            if found is None:
                continue
            target, pieces = found
            self.splits += 1
            zs = self.zones[loc]
            k = zs.index(target)
            zs[k:k + 1] = pieces
            self._member_cache.pop(loc, None)
            for other, w in self._affected(loc, target, pieces):
                if (other, w) not in queued:
                    queued.add((other, w))
                    queue.append((other, w))

    def _affected(self, loc, old: Dbm, pieces: list[Dbm]):
        """Zones whose stability may change when ``old`` is replaced by ``pieces``."""
        yield from ((loc, p) for p in pieces)
        for w in self.zones[loc]:
            if dbm.intersects(self._future(w), old):
                yield loc, w
        for other in self.into[loc]:
            ts = [t for t in self.out[other] if t.dst == loc]
            for w in self.zones[other]:
                for t in ts:
                    if not dbm.includes(t.guard, w):
                        continue
                    if dbm.intersects(self._image(w, t.resets), old):
                        yield other, w
                        break

    def _future(self, z: Dbm) -> Dbm:
        f = self._fut_cache.get(z)
        if f is None:
            f = self._fut_cache[z] = dbm.future(z)
        return f

    def _past(self, z: Dbm) -> Dbm:
        f = self._past_cache.get(z)
        if f is None:
            f = self._past_cache[z] = dbm.past(z)
        return f

    def _image(self, z: Dbm, resets) -> Dbm:
        key = (z, resets)
        f = self._img_cache.get(key)
        if f is None:
            f = self._img_cache[key] = dbm.reset_clocks(z, resets)
        return f

    def coarsen(self):
        """Greedily merge zones of a location while every zone stays stable.

        Merging only enlarges targets and pasts, so without backward splitting
        only the merged zone itself needs re-checking.
        """
        for loc in self.locations:
            merged = True
            while merged:
                merged = False
                zs = self.zones[loc]
                for a in range(len(zs)):
                    for b in range(a + 1, len(zs)):
                        u = dbm.convex_union(zs[a], zs[b])
                        if u is None:
                            continue
                        trial = zs[:a] + [u] + zs[a + 1:b] + zs[b + 1:]
                        self.zones[loc] = trial
                        others = trial if self.backward else [u]
                        if all(self._find_split(loc, w) is None for w in others):
                            merged = True
                            break
                        self.zones[loc] = zs
                    if merged:
                        break
            self._member_cache.pop(loc, None)

    def _members(self, loc) -> set:
        s = self._member_cache.get(loc)
        if s is None:
            s = self._member_cache[loc] = set(self.zones[loc])
        return s

    def _find_split(self, loc, z: Dbm):
        for i, j, b in self.splitters[loc]:
            if z[i, j] > b:
                inside, outside = dbm.split_by(z, i, j, b)
                if inside is not None and outside is not None:
                    return z, [outside, inside]
        for t in self.out[loc]:
            if not dbm.includes(t.guard, z):
                # splitters make each zone uniform for its guards
                continue
            img = self._image(z, t.resets)
            for w in self.zones[t.dst]:
                if dbm.includes(w, img):
                    break
                if not dbm.intersects(img, w):
                    continue
                pre = dbm.inverse_reset(w, t.resets)
                return z, _pieces(z, pre)
        fut = self._future(z)
        for w in self.zones[loc]:
            if w is z or w == z or not dbm.intersects(fut, w):
                continue
            back = self._past(w)
            if not dbm.includes(back, z):
                return z, _pieces(z, back)
            if self.backward and not dbm.includes(fut, w):
                return w, _pieces(w, fut)
        return None

    # results

    def delay_successors(self, loc) -> dict[Dbm, list[Dbm]]:
        zs = self.zones[loc]
        out = {}
        for z in zs:
            fut = dbm.future(z)
            out[z] = [w for w in zs if w != z and dbm.intersects(fut, w)]
        return out


def _pieces(z: Dbm, by: Dbm | None) -> list[Dbm]:
    inter, diff = dbm.split_difference(z, by) if by is not None else (None, [z])
    return diff + ([inter] if inter is not None else [])


def _coalesce(zones: list[Dbm]) -> list[Dbm]:
    zones = list(zones)
    merged = True
    while merged:
        merged = False
        for a in range(len(zones)):
            for b in range(a + 1, len(zones)):
                u = dbm.convex_union(zones[a], zones[b])
                if u is not None:
                    zones[a] = u
                    del zones[b]
                    merged = True
                    break
            if merged:
                break
    return zones


def immediate_successor(z: Dbm, ds: dict[Dbm, list[Dbm]]) -> Dbm | None:
    """The delay successor of ``z`` that every later successor follows."""
    succ = ds[z]
    if not succ:
        return None
    for w in succ:
        later = set(ds[w])
        if all(u == w or u in later for u in succ):
            return w
    # no linear order: take the successor with the most successors
    return max(succ, key=lambda w: len(ds[w]))


# automaton-level API


@dataclass(frozen=True)
class ZoneNode:
    id: int
    location: str
    zone: Dbm
    is_base: bool


class ActionEdge(NamedTuple):
    src: int
    action: str
    dst: int
    edge: int


@dataclass
class ZoneGraph:
    clocks: tuple[str, ...]
    nodes: list[ZoneNode]
    initial: int
    action_edges: list[ActionEdge]
    delay_edges: list[tuple[int, int]]
    _by_loc: dict = field(default=None, repr=False)

    def __post_init__(self):
        self._by_loc = {}
        for n in self.nodes:
            self._by_loc.setdefault(n.location, []).append(n)

    def nodes_at(self, loc: str) -> list[ZoneNode]:
        return self._by_loc.get(loc, [])

    def immediate_delay(self, node: int) -> int | None:
        for s, d in self.delay_edges:
            if s == node:
                return d
        return None

    def delay_chain(self, node: int) -> list[int]:
        """``node`` followed by its iterated immediate delay successors."""
        succ = dict(self.delay_edges)
        out = [node]
        while out[-1] in succ and succ[out[-1]] not in out:
            out.append(succ[out[-1]])
        return out

    def base_nodes(self, loc: str) -> list[ZoneNode]:
        return [n for n in self.nodes_at(loc) if n.is_base]

    def edge_sources(self, edge: int) -> list[int]:
        return [a.src for a in self.action_edges if a.edge == edge]


def max_constants(ta: TimedAutomaton) -> dict[tuple[str, str], int]:
    """Location-dependent max constants, a least fixpoint over the edges."""
    mc = {(l, x): -1 for l in ta.locations for x in ta.clocks}
    for e in ta.edges:
        for c in e.guard:
            mc[e.source, c.clock] = max(mc[e.source, c.clock], c.k)
    changed = True
    while changed:
        changed = False
        for e in ta.edges:
            for x in ta.clocks:
                if x in e.resets:
                    continue
                v = mc[e.target, x]
                if v > mc[e.source, x]:
                    mc[e.source, x] = v
                    changed = True
    return mc


def automaton_builder(ta: TimedAutomaton, backward: bool = False) -> ZoneBuilder:
    mc = max_constants(ta)
    bounds = {l: (0, *(mc[l, x] for x in ta.clocks)) for l in ta.locations}
    trans = []
    splitters: dict = {l: [] for l in ta.locations}
    for k, e in enumerate(ta.edges):
        g = ta.guard_dbm(e.guard)
        for c in ta.guard_entries(e.guard):
            splitters[e.source].append(c)
        if g is None:
            continue
        trans.append(Transition(e.source, e.action, g, ta.reset_indices(e), e.target, k))
    return ZoneBuilder(ta.nclocks, ta.locations, trans, splitters, bounds, backward)


def build_zone_graph(ta: TimedAutomaton, *, phase2: bool = True) -> ZoneGraph:
    """Pre-stable zone graph of ``ta`` (phase 1 only when ``phase2`` is false)."""
    b = automaton_builder(ta)
    b.explore(ta.initial, dbm.zero(ta.nclocks))
    if phase2:
        b.refine()
        b.coarsen()
    return _graph_from(ta, b)


def zone_order(z: Dbm):
    """Sort key placing zones with earlier (lower) clock bounds first."""
    d = z.dim
    return (tuple(-z.m[j] for j in range(1, d)), tuple(z.m[i * d] for i in range(1, d)), z.m)


def _graph_from(ta: TimedAutomaton, b: ZoneBuilder) -> ZoneGraph:
    ids: dict = {}
    nodes: list[ZoneNode] = []
    succ_of: dict = {}
    for loc in ta.locations:
        b.zones[loc].sort(key=zone_order)
        ds = b.delay_successors(loc)
        has_pred = {w for z in b.zones[loc] for w in ds[z]}
        for z in b.zones[loc]:
            ids[loc, z] = len(nodes)
            nodes.append(ZoneNode(len(nodes), loc, z, z not in has_pred))
        for z in b.zones[loc]:
            succ_of[loc, z] = immediate_successor(z, ds)
    origin = dbm.zero(ta.nclocks)
    initial = next(ids[ta.initial, z] for z in b.zones[ta.initial] if dbm.includes(z, origin))
    delay_edges = [(ids[k], ids[k[0], w]) for k, w in succ_of.items() if w is not None]
    action_edges = []
    for n in nodes:
        for t in b.out[n.location]:
            if not dbm.includes(t.guard, n.zone):
                continue
            img = dbm.reset_clocks(n.zone, t.resets)
            for w in b.zones[t.dst]:
                if dbm.intersects(img, w):
                    action_edges.append(ActionEdge(n.id, t.label, ids[t.dst, w], t.tag))
    action_edges.sort(key=lambda a: (a.src, a.edge, a.dst))
    delay_edges.sort()
    return ZoneGraph(ta.clocks, nodes, initial, action_edges, delay_edges)


def prestabilize_delay(g: ZoneGraph, ta: TimedAutomaton) -> ZoneGraph:
    """Split zones until each is pre-stable for its delay successors."""
    return _restabilize(g, ta, actions=False)


def prestabilize_discrete(g: ZoneGraph, ta: TimedAutomaton) -> ZoneGraph:
    """Split zones until each is pre-stable for its action successors."""
    return _restabilize(g, ta, actions=True)


def _restabilize(g: ZoneGraph, ta: TimedAutomaton, actions: bool) -> ZoneGraph:
    b = automaton_builder(ta)
    for n in g.nodes:
        b.zones[n.location].append(n.zone)
    if actions:
        b._find_split = _only_actions(b)  # type: ignore[method-assign]
    else:
        b._find_split = _only_delays(b)  # type: ignore[method-assign]
    b.refine()
    return _graph_from(ta, b)


def _only_actions(b: ZoneBuilder):
    def find(loc, z):
        for t in b.out[loc]:
            if not dbm.includes(t.guard, z):
                if dbm.intersects(z, t.guard):
                    return z, _pieces(z, t.guard)
                continue
            img = dbm.reset_clocks(z, t.resets)
            for w in b.zones[t.dst]:
                if dbm.includes(w, img):
                    break
                if dbm.intersects(img, w):
                    return z, _pieces(z, dbm.inverse_reset(w, t.resets))
        return None

    return find


def _only_delays(b: ZoneBuilder):
    def find(loc, z):
        fut = dbm.future(z)
        for w in b.zones[loc]:
            if w == z or not dbm.intersects(fut, w):
                continue
            back = dbm.past(w)
            if not dbm.includes(back, z):
                return z, _pieces(z, back)
            if b.backward and not dbm.includes(fut, w):
                return w, _pieces(w, fut)
        return None

    return find


# checks used by tests and the property suites


def single_exit_facet(z: Dbm) -> bool:
    """A zone bounded above leaves through exactly one facet ``x = h``."""
    if not z.is_bounded_above():
        return True
    facets = dbm.upper_facets(z)
    if not facets:
        return False
    x = facets[0]
    return all(dbm.fixed_difference(z, x, y) is not None for y in facets[1:])


def upper_hyperplane(z: Dbm, prefer: Iterable[int] = ()) -> tuple[int, int] | None:
    """``(clock index, raw bound)`` of the facet bounding ``z`` from above."""
    facets = dbm.upper_facets(z)
    if not facets:
        return None
    pref = [x for x in facets if x in set(prefer)]
    x = (pref or facets)[0]
    return x, z[x, 0]


def export_graph(g: ZoneGraph) -> bytes:
    """Graphviz text with one line per node and per edge."""
    lines = ["digraph zonegraph {"]
    for n in g.nodes:
        zone = dbm.render(n.zone, g.clocks)
        label = f"{n.location} | {zone}"
        lines.append(f'  n{n.id} [location="{n.location}", zone="{zone}", base={str(n.is_base).lower()}, '
                     f'label="{label}"{", peripheries=2" if n.id == g.initial else ""}];')
    for a in g.action_edges:
        lines.append(f'  n{a.src} -> n{a.dst} [label="{a.action}", edge={a.edge}];')
    for s, d in g.delay_edges:
        lines.append(f'  n{s} -> n{d} [label="eps", style=dashed];')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")
