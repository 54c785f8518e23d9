"""Region-graph timed bisimulation, an exact reference for small instances.

A region over clocks is stored as ``(ints, ranks)``.  ``ints[i]`` is the
integer part clipped to ``M + 1`` (meaning "above M").  For clocks not above
M, ``ranks[i]`` orders fractional parts: 0 means the fraction is zero, equal
ranks mean equal fractions, larger ranks mean larger fractions.  Clocks above
M carry rank ``-1``.
"""
from __future__ import annotations

from .bisim import Verdict
from .ta import TimedAutomaton

MAX_CLOCKS = 4
MAX_CONSTANT = 8


class ScaleExceeded(ValueError):
    """The instance is too large for exhaustive region enumeration."""


def _normalize(ints, ranks, top):
    ints, ranks = list(ints), list(ranks)
    for i, (n, r) in enumerate(zip(ints, ranks)):
        if n > top or (n == top and r > 0):
            ints[i], ranks[i] = top + 1, -1
    used = sorted({r for r in ranks if r > 0})
    remap = {r: k + 1 for k, r in enumerate(used)}
    ranks = [remap.get(r, r) for r in ranks]
    return tuple(ints), tuple(ranks)


def time_successor(region, top):
    ints, ranks = region
    bounded = [i for i, r in enumerate(ranks) if r >= 0]
    if not bounded:
        return region
    ints, ranks = list(ints), list(ranks)
    zeros = [i for i in bounded if ranks[i] == 0]
    if zeros:
        for i in bounded:
            if ranks[i] > 0:
                ranks[i] += 1
        for i in zeros:
            ranks[i] = 1
    else:
        hi = max(ranks[i] for i in bounded)
        for i in bounded:
            if ranks[i] == hi:
                ints[i] += 1
                ranks[i] = 0
    return _normalize(ints, ranks, top)


def reset(region, clocks, top):
    ints, ranks = list(region[0]), list(region[1])
    for i in clocks:
        ints[i], ranks[i] = 0, 0
    return _normalize(ints, ranks, top)


def holds(region, i: int, rel: str, k: int) -> bool:
    n, r = region[0][i], region[1][i]
    exact = r == 0
    lt = n < k
    le = n < k or (n == k and exact)
    return {"<": lt, "<=": le, ">": not le, ">=": not lt, "=": le and not lt}[rel]


def region_bisim_oracle(a: TimedAutomaton, b: TimedAutomaton) -> Verdict:
    """Exact timed bisimilarity by a greatest fixpoint on the region product."""
    n1 = a.nclocks
    total = n1 + b.nclocks
    top = max(a.max_constant(), b.max_constant())
    if total > MAX_CLOCKS or top > MAX_CONSTANT:
        raise ScaleExceeded(f"{total} clocks with max constant {top} exceeds "
                            f"{MAX_CLOCKS} clocks / constant {MAX_CONSTANT}")
    ea = [(e, [(a.clock_index(c.clock) - 1, c.rel, c.k) for c in e.guard],
           [a.clock_index(x) - 1 for x in e.resets]) for e in a.edges]
    eb = [(e, [(n1 + b.clock_index(c.clock) - 1, c.rel, c.k) for c in e.guard],
           [n1 + b.clock_index(x) - 1 for x in e.resets]) for e in b.edges]

    def enabled(edges, loc, reg):
        return [k for k, (e, g, _) in enumerate(edges)
                if e.source == loc and all(holds(reg, i, r, c) for i, r, c in g)]

    start = (a.initial, b.initial, (0,) * total, (0,) * total)
    states = {start: None}
    order = [start]
    succ = {}
    k = 0
    while k < len(order):
        s = order[k]
        k += 1
        p, q, ints, ranks = s
        reg = (ints, ranks)
        left, right = enabled(ea, p, reg), enabled(eb, q, reg)
        moves = {}
        for i in left:
            for j in right:
                if ea[i][0].action != eb[j][0].action:
                    continue
                ints2, ranks2 = reset(reg, ea[i][2] + eb[j][2], top)
                moves[i, j] = (ea[i][0].target, eb[j][0].target, ints2, ranks2)
        nxt = time_successor(reg, top)
        delay = (p, q, *nxt)
        succ[s] = (left, right, moves, delay)
        for t in [*moves.values(), delay]:
            if t not in states:
                states[t] = None
                order.append(t)

    bad: set = set()
    changed = True
    while changed:
        changed = False
        for s in order:
            if s in bad:
                continue
            left, right, moves, delay = succ[s]
            if delay in bad or _unmatched(left, right, moves, bad, ea, eb) \
                    or _unmatched(right, left, {(j, i): t for (i, j), t in moves.items()}, bad, eb, ea):
                bad.add(s)
                changed = True
    return Verdict.NOT_BISIMILAR if start in bad else Verdict.BISIMILAR


def _unmatched(mine, theirs, moves, bad, my_edges, their_edges) -> bool:
    for i in mine:
        act = my_edges[i][0].action
        if not any((i, j) in moves and moves[i, j] not in bad
                   for j in theirs if their_edges[j][0].action == act):
            return True
    return False
