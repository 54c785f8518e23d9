"""The acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Sizes, scales and time limits are the ones the criteria state.  Every random
instance is seeded, so a failure names a reproducible seed.
"""
from __future__ import annotations

import random
import time

import pytest

from tamin import dbm, load_example
from tamin.bisim import check_timed_bisim
from tamin.generate import mutate, random_automaton, random_dbm
from tamin.minimize import (active_clocks, build_clock_graph, color_clock_graph, minimize_pipeline,
                            partition_active_clocks, stage1_prune, stage2_split, stage3_merge, stage4_rename)
from tamin.minimize.clocks import reachable_zones
from tamin.region import region_bisim_oracle
from tamin.ta import Constraint
from tamin.zonegraph import build_zone_graph, single_exit_facet

import oracles


@pytest.fixture
def report(capsys):
    def emit(label: str, ok: bool, seconds: float, limit: float, detail: str = ""):
        verdict = "PASS" if ok and seconds < limit else "FAIL"
        with capsys.disabled():
            print(f"\n[{verdict}] {label}: {detail} ({seconds:.2f} s, limit {limit:g} s)")
        assert ok, detail
        assert seconds < limit, f"took {seconds:.2f} s"

    return emit


def test_c1_fig1_pipeline(report):
    t = time.perf_counter()
    ta = load_example("fig1")
    out, _ = minimize_pipeline(ta)
    same = check_timed_bisim(ta, out).bisimilar
    dt = time.perf_counter() - t
    report("C1 fig1 example to one clock", out.nclocks == 1 and same, dt, 5,
           f"clocks {ta.nclocks} -> {out.nclocks}, bisimilar={same}")


def test_c2_split_anchors(report):
    t = time.perf_counter()
    a2 = stage2_split(stage1_prune(load_example("fig1")))
    dt = time.perf_counter() - t
    names = {"l1_1", "l1_2", "l1_3"} <= set(a2.locations)
    into = [e.guard for e in a2.edges if e.target == "l1_1"]
    out = [e.guard for e in a2.edges if e.source == "l1_1"]
    guard_in = into == [(Constraint("x", "<", 2),)]
    guard_out = len(out) == 1 and Constraint("y", ">", 7) in out[0] and Constraint("x", ">", 5) not in out[0]
    report("C2 split anchors", names and guard_in and guard_out, dt, 2,
           f"locations {list(a2.locations)}, into l1_1 {into}, out of l1_1 {out}")


def test_c3_guard_merge_anchor(report):
    t = time.perf_counter()
    left, right = load_example("fig4_left"), load_example("fig4_right")
    same = check_timed_bisim(left, right).bisimilar
    merged = stage3_merge(left)
    a_guards = [e.guard for e in merged.edges if e.source == "l0" and e.action == "a"]
    dt = time.perf_counter() - t
    report("C3 guard merge anchor", same and bool(a_guards) and all(g == () for g in a_guards), dt, 2,
           f"bisimilar={same}, l0 a-guards after merge {a_guards}")


def test_c4_clock_graph_anchor(report):
    t = time.perf_counter()
    ta = load_example("fig5")
    act = active_clocks(ta)
    parts = partition_active_clocks(ta, reachable_zones(ta), act)
    g = build_clock_graph(ta, act, parts)
    _, chi = color_clock_graph(g)
    out = stage4_rename(stage3_merge(stage2_split(stage1_prune(ta))))
    dt = time.perf_counter() - t
    sets = [act[l] for l in ta.locations]
    triangle = len(g.vertices) == 3 and g.edges == {(0, 1), (0, 2), (1, 2)}
    ok = sets == [{"x", "y"}, {"w", "x"}, {"w", "y"}] and triangle and chi == 3 and out.nclocks == 3
    report("C4 clock graph anchor", ok, dt, 2,
           f"active {[sorted(s) for s in sets]}, graph {sorted(g.edges)}, chi={chi}, clocks out {out.nclocks}")


def test_c5_zone_graph_properties(report):
    t = time.perf_counter()
    bad = []
    count = 200
    for seed in range(count):
        ta = random_automaton(seed, max_clocks=3, max_locations=5, max_constant=6)
        g = build_zone_graph(ta)
        rng = random.Random(seed)
        problems = oracles.check_zone_graph(ta, g, rng) + oracles.exit_facet_violations(g, rng)
        problems += [f"node {n.id}: no single upper facet" for n in g.nodes if not single_exit_facet(n.zone)]
        if problems:
            bad.append((seed, problems[:2]))
    dt = time.perf_counter() - t
    report("C5 single exit facet and pre-stability", not bad, dt, 60,
           f"{count} automata, {len(bad)} with violations {bad[:3]}")


def test_c6_split_difference_laws(report):
    t = time.perf_counter()
    rng = random.Random(6)
    bad = []
    count = 500
    for k in range(count):
        n, top = rng.randint(1, 3), rng.randint(1, 8)
        z1, z2 = oracles.bounded_pair(rng, n, top)
        den = oracles.region_step(n).denominator
        pts = lambda z: oracles.scaled_points(z, n, top + 1, den)  # noqa: E731
        inter, pieces = dbm.split_difference(z1, z2)
        s1, s2 = pts(z1), pts(z2)
        sets = [pts(p) for p in pieces]
        ok = (len(pieces) <= (n + 1) ** 2 + 1 and pts(inter) == s1 & s2
              and set().union(*sets) == s1 - s2 and sum(map(len, sets)) == len(s1 - s2)
              and all(sets))
        if not ok:
            bad.append(k)
    dt = time.perf_counter() - t
    report("C6 split_difference partition laws", not bad, dt, 30, f"{count} pairs, violations at {bad[:5]}")


def test_c7_convex_union(report):
    t = time.perf_counter()
    rng = random.Random(7)
    bad = []
    count = 500
    convex = 0
    for k in range(count):
        n, top = rng.randint(1, 3), rng.randint(1, 8)
        z1, z2 = oracles.bounded_pair(rng, n, top)
        den = oracles.region_step(n).denominator
        pts = lambda z: oracles.scaled_points(z, n, top + 1, den)  # noqa: E731
        u = dbm.convex_union(z1, z2)
        union = pts(z1) | pts(z2)
        agree = pts(dbm.hull(z1, z2)) != union if u is None else pts(u) == union
        convex += u is not None
        if not agree:
            bad.append(k)
    dt = time.perf_counter() - t
    report("C7 convex union vs grid", not bad, dt, 30,
           f"{count} pairs ({convex} convex), disagreements at {bad[:5]}")


def test_c8_bisim_vs_regions(report):
    t = time.perf_counter()
    bad = []
    count = 200
    verdicts = {}
    for seed in range(count):
        rng = random.Random(seed)
        a = random_automaton(rng, max_clocks=2, max_locations=4, max_constant=4)
        if seed % 3 == 0:
            b = mutate(rng, a)
        elif seed % 3 == 1:
            b = mutate(rng, mutate(rng, a))
        else:
            b = random_automaton(rng, max_clocks=2, max_locations=4, max_constant=4)
        z = check_timed_bisim(a, b).verdict
        verdicts[z.value] = verdicts.get(z.value, 0) + 1
        if z is not region_bisim_oracle(a, b):
            bad.append(seed)
    dt = time.perf_counter() - t
    report("C8 zone bisimulation vs region oracle", not bad, dt, 120,
           f"{count} pairs {verdicts}, disagreements at {bad[:5]}")


def test_c9_stagewise_bisimilarity(report):
    t = time.perf_counter()
    bad = []
    count = 100
    for seed in range(count):
        a = random_automaton(seed, max_clocks=2, max_locations=4, max_constant=4)
        a1 = stage1_prune(a)
        a2 = stage2_split(a1)
        a3 = stage3_merge(a2)
        a4 = stage4_rename(a3)
        again, _ = minimize_pipeline(a4)
        steps = [(a, a1), (a1, a2), (a2, a3), (a3, a4)]
        same = all(region_bisim_oracle(x, y).value == "BISIMILAR" for x, y in steps)
        counts = [x.nclocks for x in (a, a1, a2, a3, a4)]
        monotone = all(p >= q for p, q in zip(counts, counts[1:]))
        if not (same and monotone and again.nclocks == a4.nclocks):
            bad.append((seed, same, counts, again.nclocks))
    dt = time.perf_counter() - t
    report("C9 stage-wise bisimilarity and idempotence", not bad, dt, 300,
           f"{count} automata, violations {bad[:3]}")
