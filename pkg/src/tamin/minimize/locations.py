"""Location-level stages: pruning dead edges and splitting locations by entry zone."""
from __future__ import annotations

from .. import dbm
from ..dbm import INF, Dbm
from ..ta import Constraint, Edge, TimedAutomaton, normalize_guard
from ..zonegraph import ZoneGraph, build_zone_graph


def stage1_prune(ta: TimedAutomaton, zg: ZoneGraph | None = None) -> TimedAutomaton:
    """Drop edges that never fire and locations that are never reached."""
    zg = zg or build_zone_graph(ta)
    fired = {a.edge for a in zg.action_edges}
    live = {n.location for n in zg.nodes}
    locs = tuple(l for l in ta.locations if l in live)
    edges = [e for k, e in enumerate(ta.edges) if k in fired and e.source in live and e.target in live]
    return TimedAutomaton(locs, ta.initial, ta.clocks, ta.alphabet, tuple(edges))


# helpers shared with the guard stage


def guard_zone(ta: TimedAutomaton, atoms) -> Dbm | None:
    return ta.guard_dbm(atoms)


def implied(ta: TimedAutomaton, contexts: list[Dbm], rest, atom: Constraint) -> bool:
    """Every context, restricted by ``rest``, already satisfies ``atom``."""
    rz = ta.guard_dbm(rest)
    az = ta.guard_dbm([atom])
    for ctx in contexts:
        inner = dbm.intersect(ctx, rz) if rz is not None else None
        if inner is None:
            continue
        if az is None or not dbm.includes(az, inner):
            return False
    return True


def reduce_guard(ta: TimedAutomaton, atoms, contexts: list[Dbm]) -> tuple[Constraint, ...]:
    """Greedily drop atoms implied by the remaining ones inside every context."""
    kept = list(normalize_guard(atoms, ta.clocks))
    for atom in list(kept):
        rest = [a for a in kept if a is not atom]
        if implied(ta, contexts, rest, atom):
            kept = rest
    return tuple(kept)


def box_atoms(ta: TimedAutomaton, z: Dbm, clocks) -> list[Constraint]:
    """Per-clock interval constraints of ``z`` restricted to ``clocks``."""
    out = []
    for x in clocks:
        i = ta.clock_index(x)
        up, low = z[i, 0], z[0, i]
        if up < INF:
            out.append(Constraint(x, "<" if not up & 1 else "<=", up >> 1))
        if low != dbm.LE_ZERO:
            out.append(Constraint(x, ">" if not low & 1 else ">=", -(low >> 1)))
    return out


def _hull_all(zs: list[Dbm]) -> Dbm:
    h = zs[0]
    for z in zs[1:]:
        h = dbm.hull(h, z)
    return h


class _Groups:
    """Union-find over entry zones of one location."""

    def __init__(self, items):
        self.parent = {i: i for i in items}

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a, b) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        lo, hi = min(a, b), max(a, b)
        self.parent[hi] = lo
        return True

    def classes(self) -> list[list[int]]:
        out: dict = {}
        for i in sorted(self.parent):
            out.setdefault(self.find(i), []).append(i)
        return list(out.values())


def entry_nodes(zg: ZoneGraph) -> dict[str, list[int]]:
    """Per location, the zones entered by an action edge or holding the start state."""
    entries: dict[str, set] = {}
    for n in (zg.nodes[zg.initial],):
        entries.setdefault(n.location, set()).add(n.id)
    for a in zg.action_edges:
        entries.setdefault(zg.nodes[a.dst].location, set()).add(a.dst)
    return {l: sorted(s) for l, s in entries.items()}


def stage2_split(ta: TimedAutomaton, zg: ZoneGraph | None = None, *, merge_alike: bool = False) -> TimedAutomaton:
    """One location per entry zone, with guards rewritten for each new location.

    Every outgoing edge of a new location is restricted to the valuations
    that can actually occur there (the future of its entry zones), which lets
    constraints implied by that context be dropped.  When one automaton edge
    leads to different entry zones depending on the source valuation, an
    interval constraint separates them; if none exists the target entry zones
    are kept together in one location.  With ``merge_alike`` copies whose
    outgoing edges end up identical are fused again.
    """
    zg = zg or build_zone_graph(ta)
    entries = entry_nodes(zg)
    groups = {l: _Groups(ids) for l, ids in entries.items()}
    target: dict[tuple[int, int], int] = {(a.src, a.edge): a.dst for a in zg.action_edges}
    chains = {u: zg.delay_chain(u) for ids in entries.values() for u in ids}
    futures = {u: dbm.future(zg.nodes[u].zone) for u in chains}

    while True:
        result = _try_split(ta, zg, entries, groups, target, chains, futures)
        if isinstance(result, TimedAutomaton):
            if not merge_alike or not _merge_alike(ta, result, groups):
                return result
            continue
        loc, a, b = result
        groups[loc].union(a, b)


def _split_names(ta: TimedAutomaton, groups) -> dict[tuple[str, int], str]:
    names = {}
    for l in ta.locations:
        if l not in groups:
            continue
        cls = groups[l].classes()
        for k, c in enumerate(cls, 1):
            names[l, c[0]] = l if len(cls) == 1 else _fresh(f"{l}_{k}", ta.locations)
    return names


def _merge_alike(ta: TimedAutomaton, split: TimedAutomaton, groups) -> bool:
    """Fuse split copies of a location whose outgoing edges coincide."""
    origin = {v: k for k, v in _split_names(ta, groups).items()}
    seen: dict = {}
    merged = False
    for l in split.locations:
        sig = (origin[l][0], frozenset((e.action, e.guard, e.resets, e.target) for _, e in split.outgoing(l)))
        if sig in seen:
            base, root = origin[l]
            merged |= groups[base].union(origin[seen[sig]][1], root)
        else:
            seen[sig] = l
    return merged


def _try_split(ta, zg, entries, groups, target, chains, futures):
    names = _split_names(ta, groups)
    edges = []
    for l in ta.locations:
        if l not in groups:
            continue
        for cls in groups[l].classes():
            contexts = [futures[u] for u in cls]
            src_name = names[l, cls[0]]
            for k, e in ta.outgoing(l):
                pieces: dict[int, list[Dbm]] = {}
                for u in cls:
                    for z in chains[u]:
                        w = target.get((z, k))
                        if w is None:
                            continue
                        p = dbm.intersect(zg.nodes[z].zone, futures[u])
                        if p is not None:
                            pieces.setdefault(groups[e.target].find(w), []).append(p)
                if not pieces:
                    continue
                heads = sorted(pieces)
                for h in heads:
                    if len(heads) == 1:
                        sep: list[Constraint] = []
                    else:
                        others = [p for o in heads if o != h for p in pieces[o]]
                        sep = _separator(ta, e, pieces[h], others)
                        if sep is None:
                            clash = next(o for o in heads if o != h)
                            return e.target, h, clash
                    guard = reduce_guard(ta, list(e.guard) + sep, contexts)
                    edges.append(Edge(src_name, names[e.target, h], e.action, guard, e.resets))
    init = zg.nodes[zg.initial]
    init_name = names[init.location, groups[init.location].find(init.id)]
    locs = tuple(dict.fromkeys(names[key] for key in sorted(names, key=lambda k: (ta.locations.index(k[0]), k[1]))))
    return TimedAutomaton(locs, init_name, ta.clocks, ta.alphabet, tuple(dict.fromkeys(edges))).canonical()


def _separator(ta: TimedAutomaton, e: Edge, mine: list[Dbm], others: list[Dbm]):
    """Interval constraints holding on ``mine`` and failing on every zone of ``others``."""
    used = list(dict.fromkeys(c.clock for c in e.guard))
    atoms = box_atoms(ta, _hull_all(mine), used)
    box = ta.guard_dbm(atoms)
    if box is not None and not any(dbm.intersects(box, o) for o in others):
        return atoms
    return None


def _fresh(name: str, taken) -> str:
    while name in taken:
        name += "'"
    return name
