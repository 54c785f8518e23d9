"""Guard merging: fuse guards of same-action edges when bisimilarity survives."""
from __future__ import annotations

from dataclasses import replace

from .. import dbm
from ..bisim import check_timed_bisim
from ..dbm import Dbm
from ..ta import Constraint, TimedAutomaton, normalize_guard
from ..zonegraph import ZoneGraph, build_zone_graph


class BisimCounter:
    """Wraps the bisimulation check and counts invocations."""

    def __init__(self):
        self.calls = 0

    def __call__(self, a: TimedAutomaton, b: TimedAutomaton) -> bool:
        self.calls += 1
        return check_timed_bisim(a, b).bisimilar


def union_is_convex(zs: list[Dbm]) -> bool:
    if not zs:
        return True
    h = zs[0]
    for z in zs[1:]:
        h = dbm.hull(h, z)
    rest = [h]
    for z in zs:
        nxt = []
        for r in rest:
            nxt.extend(dbm.split_difference(r, z)[1])
        rest = nxt
        if not rest:
            return True
    return not rest


def _depths(zg: ZoneGraph) -> dict[int, int]:
    """Position of each zone along delay chains (longest delay path into it)."""
    preds: dict[int, list[int]] = {}
    for s, d in zg.delay_edges:
        if s != d:
            preds.setdefault(d, []).append(s)
    memo: dict[int, int] = {}

    def depth(n, seen=()):
        if n in memo:
            return memo[n]
        best = 0
        for p in preds.get(n, []):
            if p not in seen:
                best = max(best, depth(p, seen + (n,)) + 1)
        memo[n] = best
        return best

    return {n.id: depth(n.id) for n in zg.nodes}


def guard_ranges(ta: TimedAutomaton, zg: ZoneGraph, loc: str, action: str) -> dict[tuple, list[int]]:
    """Zones of ``loc`` where each guard labelled ``action`` fires."""
    out: dict[tuple, set] = {}
    for a in zg.action_edges:
        e = ta.edges[a.edge]
        if e.source == loc and e.action == action:
            out.setdefault(e.guard, set()).add(a.src)
    return {g: sorted(s) for g, s in out.items()}


def lower(g) -> list[Constraint]:
    return [c for c in g if c.is_lower]


def upper(g) -> list[Constraint]:
    return [c for c in g if c.is_upper]


def candidates(curr, nxt, overlapping: bool, clocks) -> list[tuple[tuple, tuple]]:
    """Rewrites of the pair in the order they are tried."""
    norm = lambda atoms: normalize_guard(atoms, clocks)
    merged = norm(lower(curr) + upper(nxt))
    out = [(merged, merged)]
    if overlapping:
        if len(lower(nxt)) == 1:
            out.append((norm(lower(curr) + [lower(nxt)[0].negate()]), nxt))
        if len(upper(curr)) == 1:
            out.append((curr, norm([upper(curr)[0].negate()] + upper(nxt))))
    return out


def _replace(ta: TimedAutomaton, loc, action, old_new: dict) -> TimedAutomaton:
    edges = []
    for e in ta.edges:
        if e.source == loc and e.action == action and e.guard in old_new:
            e = replace(e, guard=old_new[e.guard])
        edges.append(e)
    return ta.with_edges(dict.fromkeys(edges))


def stage3_merge(ta: TimedAutomaton, check=None) -> TimedAutomaton:
    """Walk the guards of each (location, action) in delay order and merge neighbours."""
    check = check or BisimCounter()
    cur = ta
    zg = build_zone_graph(cur)
    for loc in ta.locations:
        actions = sorted({e.action for e in ta.edges if e.source == loc})
        for act in actions:
            ranges = guard_ranges(cur, zg, loc, act)
            if len(ranges) < 2:
                continue
            depth = _depths(zg)
            order = sorted(ranges, key=lambda g: (min((depth[n], n) for n in ranges[g]), g))
            g_curr = order[0]
            for g_next in order[1:]:
                ranges = guard_ranges(cur, zg, loc, act)
                r1, r2 = ranges.get(g_curr, []), ranges.get(g_next, [])
                zones = [zg.nodes[n].zone for n in sorted(set(r1) | set(r2))]
                if not r1 or not r2 or not union_is_convex(zones):
                    g_curr = g_next
                    continue
                overlapping = bool(set(r1) & set(r2))
                accepted = False
                for new_curr, new_next in candidates(g_curr, g_next, overlapping, cur.clocks):
                    if (new_curr, new_next) == (g_curr, g_next):
                        continue
                    trial = _replace(cur, loc, act, {g_curr: new_curr, g_next: new_next})
                    if check(trial, cur):
                        cur, accepted = trial, True
                        zg = build_zone_graph(cur)
                        g_curr = new_next
                        break
                if not accepted:
                    g_curr = g_next
    return cur
