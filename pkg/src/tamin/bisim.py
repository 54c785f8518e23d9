"""Timed bisimilarity of two automata on a pre-stable product zone graph."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from . import dbm
from .dbm import Dbm
from .ta import TimedAutomaton
from .zonegraph import Transition, ZoneBuilder, max_constants


class Verdict(Enum):
    BISIMILAR = "BISIMILAR"
    NOT_BISIMILAR = "NOT_BISIMILAR"


@dataclass
class BisimResult:
    verdict: Verdict
    witness: list[tuple[str, object]] = field(default_factory=list)
    detail: str = ""
    product_nodes: int = 0

    @property
    def bisimilar(self) -> bool:
        return self.verdict is Verdict.BISIMILAR

    def __bool__(self) -> bool:
        return self.bisimilar

    @property
    def witness_text(self) -> str:
        return format_trace(self.witness)

    def __str__(self) -> str:
        if self.bisimilar:
            return "BISIMILAR"
        return f"NOT_BISIMILAR: {self.witness_text}" + (f" ({self.detail})" if self.detail else "")


def format_number(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d == 1:
        s = f"{float(q):.12f}".rstrip("0")
        return s
    return f"{q.numerator}/{q.denominator}"


def format_trace(steps) -> str:
    parts = []
    for kind, value in steps:
        parts.append(f"delay {format_number(value)}" if kind == "delay" else str(value))
    return " then ".join(parts) if parts else "(initial state)"


class Product:
    """Synchronised product of two automata over the disjoint union of clocks."""

    def __init__(self, a: TimedAutomaton, b: TimedAutomaton):
        self.a, self.b = a, b
        n1, n2 = a.nclocks, b.nclocks
        self.n1, self.nclocks = n1, n1 + n2
        self.guards_a = [self._lift(a, e.guard, 0) for e in a.edges]
        self.guards_b = [self._lift(b, e.guard, n1) for e in b.edges]
        locs = [(p, q) for p in a.locations for q in b.locations]
        mca, mcb = max_constants(a), max_constants(b)
        bounds = {(p, q): (0, *(mca[p, x] for x in a.clocks), *(mcb[q, x] for x in b.clocks)) for p, q in locs}
        splitters = {}
        for p, q in locs:
            cons = []
            for k, e in a.outgoing(p):
                cons += a.guard_entries(e.guard)
            for k, e in b.outgoing(q):
                cons += [(_shift(i, n1), _shift(j, n1), v) for i, j, v in b.guard_entries(e.guard)]
            splitters[p, q] = cons
        trans = []
        for k1, e1 in enumerate(a.edges):
            g1 = self.guards_a[k1]
            if g1 is None:
                continue
            for k2, e2 in enumerate(b.edges):
                if e2.action != e1.action or self.guards_b[k2] is None:
                    continue
                g = dbm.intersect(g1, self.guards_b[k2])
                if g is None:
                    continue
                resets = a.reset_indices(e1) + tuple(n1 + i for i in b.reset_indices(e2))
                trans.append(Transition((e1.source, e2.source), e1.action, g, resets,
                                        (e1.target, e2.target), (k1, k2)))
        self.builder = ZoneBuilder(self.nclocks, locs, trans, splitters, bounds, backward=False)
        self.initial_loc = (a.initial, b.initial)
        self.builder.explore(self.initial_loc, dbm.zero(self.nclocks))
        self.builder.refine()

    def _lift(self, ta: TimedAutomaton, guard, offset: int) -> Dbm | None:
        cons = [(_shift(i, offset), _shift(j, offset), v) for i, j, v in ta.guard_entries(guard)]
        return dbm.from_constraints(self.nclocks, cons)

    def nodes(self):
        return [(l, z) for l in self.builder.locations for z in self.builder.zones[l]]


def _shift(i: int, offset: int) -> int:
    return i + offset if i else 0


def check_timed_bisim(a: TimedAutomaton, b: TimedAutomaton) -> BisimResult:
    """Decide timed bisimilarity of the initial states of ``a`` and ``b``."""
    prod = Product(a, b)
    bld = prod.builder
    nodes = prod.nodes()
    index = {n: k for k, n in enumerate(nodes)}

    def target(t, z):
        img = dbm.reset_clocks(z, t.resets)
        for w in bld.zones[t.dst]:
            if dbm.intersects(img, w):
                return index[t.dst, w]
        raise AssertionError("product successor not covered")

    info = []
    ds_cache = {loc: bld.delay_successors(loc) for loc in bld.locations}
    for loc, z in nodes:
        p, q = loc
        en_a = [k for k, _ in prod.a.outgoing(p) if prod.guards_a[k] is not None and dbm.includes(prod.guards_a[k], z)]
        en_b = [k for k, _ in prod.b.outgoing(q) if prod.guards_b[k] is not None and dbm.includes(prod.guards_b[k], z)]
        moves = {}
        for t in bld.out[loc]:
            if dbm.includes(t.guard, z):
                moves[t.tag] = target(t, z)
        ds = [index[loc, w] for w in ds_cache[loc][z]]
        info.append((en_a, en_b, moves, ds))

    removed: dict[int, tuple[int, tuple]] = {}
    rnd = 0
    while True:
        rnd += 1
        fresh = {}
        for k in range(len(nodes)):
            if k in removed:
                continue
            why = _bad(prod, info[k], removed)
            if why is not None:
                fresh[k] = (rnd, why)
        if not fresh:
            break
        removed.update(fresh)

    init = next(index[prod.initial_loc, z] for z in bld.zones[prod.initial_loc]
                if dbm.includes(z, dbm.zero(prod.nclocks)))
    if init not in removed:
        return BisimResult(Verdict.BISIMILAR, product_nodes=len(nodes))
    steps, detail = _witness(prod, nodes, info, removed, init)
    return BisimResult(Verdict.NOT_BISIMILAR, steps, detail, len(nodes))


def _bad(prod: Product, info, removed):
    en_a, en_b, moves, ds = info
    for w in ds:
        if w in removed:
            return ("delay", w)
    for k1 in en_a:
        act = prod.a.edges[k1].action
        if not any(moves.get((k1, k2)) not in removed for k2 in en_b
                   if prod.b.edges[k2].action == act and (k1, k2) in moves):
            return ("left", k1)
    for k2 in en_b:
        act = prod.b.edges[k2].action
        if not any(moves.get((k1, k2)) not in removed for k1 in en_a
                   if prod.a.edges[k1].action == act and (k1, k2) in moves):
            return ("right", k2)
    return None


def _witness(prod: Product, nodes, info, removed, node: int):
    v = [Fraction(0)] * prod.nclocks
    steps: list[tuple[str, object]] = []
    detail = ""
    for _ in range(len(nodes) + 1):
        _, why = removed[node]
        if why[0] == "delay":
            w = why[1]
            window = dbm.delay_window(nodes[w][1], v)
            assert window is not None
            d = _pick(window)
            v = [x + d for x in v]
            if steps and steps[-1][0] == "delay":
                steps[-1] = ("delay", steps[-1][1] + d)
            elif d:
                steps.append(("delay", d))
            node = w
            continue
        side, k = why
        moves = info[node][2]
        if side == "left":
            edge = prod.a.edges[k]
            replies = [(m, t) for m, t in moves.items() if m[0] == k]
        else:
            edge = prod.b.edges[k]
            replies = [(m, t) for m, t in moves.items() if m[1] == k]
        steps.append(("action", edge.action))
        if not replies:
            who, other = ("first", "second") if side == "left" else ("second", "first")
            detail = f"only the {who} automaton can do '{edge.action}' here; the {other} cannot match it"
            break
        (k1, k2), nxt = min(replies, key=lambda r: removed[r[1]][0])
        resets = set(prod.a.reset_indices(prod.a.edges[k1])) | {
            prod.n1 + i for i in prod.b.reset_indices(prod.b.edges[k2])}
        v = [Fraction(0) if i + 1 in resets else x for i, x in enumerate(v)]
        node = nxt
    return steps, detail


def _pick(window) -> Fraction:
    lo, lo_closed, hi, hi_closed = window
    if hi is None:
        return lo if lo_closed else lo + Fraction(1, 2)
    if hi == lo:
        return lo
    return (lo + hi) / 2
