from __future__ import annotations

import random

from tamin import dbm, load_example
from tamin.generate import random_automaton
from tamin.ta import Constraint, Edge, TimedAutomaton
from tamin.zonegraph import (ZoneGraph, ZoneNode, build_zone_graph, export_graph, single_exit_facet, max_constants,
                             prestabilize_delay, prestabilize_discrete, upper_hyperplane)

import oracles


def P(text, names=("x", "y")):
    return dbm.parse_zone(text, list(names))


def ta_of(locs, clocks, edges):
    acts = sorted({e.action for e in edges})
    return TimedAutomaton(locs, locs[0], clocks, acts, edges).canonical()


# max constants


def test_max_constants_one_step():
    ta = ta_of(("l0", "l1"), ("x",), (Edge("l0", "l1", "a", (Constraint("x", "<=", 3),)),))
    mc = max_constants(ta)
    assert mc["l0", "x"] == 3 and mc["l1", "x"] == -1


def test_max_constants_cycle_propagates():
    ta = ta_of(("l0", "l1"), ("x",), (Edge("l0", "l1", "a"), Edge("l1", "l0", "b", (Constraint("x", "<=", 3),))))
    mc = max_constants(ta)
    assert mc["l0", "x"] == mc["l1", "x"] == 3


def test_max_constants_reset_cuts_propagation():
    ta = ta_of(("l0", "l1", "l2"), ("x",), (
        Edge("l0", "l1", "a", (Constraint("x", "<", 1),), ("x",)),
        Edge("l1", "l2", "b", (Constraint("x", ">", 6),)),
    ))
    mc = max_constants(ta)
    assert mc["l1", "x"] == 6 and mc["l0", "x"] == 1


def test_max_constants_fixpoint_oracle():
    for seed in range(40):
        ta = random_automaton(seed, max_clocks=2, max_locations=4)
        mc = max_constants(ta)
        # direct characterisation: the largest constant read before the next reset on some path
        for l in ta.locations:
            for x in ta.clocks:
                best, seen, stack = -1, set(), [l]
                while stack:
                    u = stack.pop()
                    if u in seen:
                        continue
                    seen.add(u)
                    for e in ta.edges:
                        if e.source != u:
                            continue
                        best = max([best] + [c.k for c in e.guard if c.clock == x])
                        if x not in e.resets:
                            stack.append(e.target)
                assert mc[l, x] == best


# construction


def test_fig1_has_three_base_zones_at_l1():
    g = build_zone_graph(load_example("fig1"))
    base = {n.zone for n in g.base_nodes("l1")}
    assert base == {
        P("0 <= y - x < 2, x <= 5"),
        P("y - x == 2, x <= 5"),
        P("2 < y - x <= 4, y <= 7"),
    }


def test_single_location_without_edges():
    g = build_zone_graph(TimedAutomaton(("l0",), "l0"))
    assert len(g.nodes) == 1 and g.nodes[0].is_base
    assert g.nodes[0].zone == dbm.universe(0)
    assert g.action_edges == [] and g.delay_edges == []


def test_random_graphs_pass_sampling_checks():
    for seed in range(15):
        ta = random_automaton(seed, max_clocks=3, max_locations=4, max_constant=5)
        g = build_zone_graph(ta)
        rng = random.Random(seed)
        assert oracles.check_zone_graph(ta, g, rng) == []
        assert oracles.exit_facet_violations(g, rng) == []
        assert all(single_exit_facet(n.zone) for n in g.nodes)


def test_zones_of_a_location_are_disjoint():
    for seed in range(30):
        g = build_zone_graph(random_automaton(seed, max_clocks=2))
        for loc in {n.location for n in g.nodes}:
            zs = [n.zone for n in g.nodes_at(loc)]
            for a in range(len(zs)):
                for b in range(a + 1, len(zs)):
                    assert not dbm.intersects(zs[a], zs[b])


def test_graph_is_deterministic():
    ta = load_example("fig5")
    assert export_graph(build_zone_graph(ta)) == export_graph(build_zone_graph(ta))


# stabilisation passes


def test_delay_stabilisation_separates_exit_facets():
    ta = TimedAutomaton(("l0",), "l0", ("x", "y"))
    zone = P("x <= 2, y <= 3")
    rest = [P("x > 2"), P("x <= 2, y > 3")]
    g = ZoneGraph(ta.clocks, [ZoneNode(k, "l0", z, True) for k, z in enumerate([zone, *rest])], 0, [], [])
    assert not single_exit_facet(zone)
    h = prestabilize_delay(g, ta)
    pieces = [n.zone for n in h.nodes if dbm.includes(zone, n.zone)]
    assert len(pieces) >= 2
    assert all(single_exit_facet(z) for z in pieces)
    facets = {upper_hyperplane(z)[0] for z in pieces if z.is_bounded_above()}
    assert facets == {1, 2}


def test_delay_stabilisation_fixpoint():
    g = build_zone_graph(load_example("fig1"))
    h = prestabilize_delay(g, load_example("fig1"))
    assert {(n.location, n.zone) for n in h.nodes} == {(n.location, n.zone) for n in g.nodes}


def test_discrete_stabilisation_splits_on_guard():
    ta = ta_of(("l0", "l1"), ("x",), (Edge("l0", "l1", "a", (Constraint("x", "<=", 1),)),))
    g = ZoneGraph(ta.clocks, [ZoneNode(0, "l0", P("x >= 0", "x"), True), ZoneNode(1, "l1", P("x <= 1", "x"), True)],
                  0, [], [])
    h = prestabilize_discrete(g, ta)
    assert {n.zone for n in h.nodes_at("l0")} == {P("x <= 1", "x"), P("x > 1", "x")}
    src = next(n.id for n in h.nodes_at("l0") if n.zone == P("x <= 1", "x"))
    assert [(a.src, a.action) for a in h.action_edges] == [(src, "a")]


def test_discrete_stabilisation_leaves_true_guard_alone():
    ta = ta_of(("l0", "l1"), ("x",), (Edge("l0", "l1", "a"),))
    g = ZoneGraph(ta.clocks, [ZoneNode(0, "l0", P("x >= 0", "x"), True), ZoneNode(1, "l1", P("x >= 0", "x"), True)],
                  0, [], [])
    h = prestabilize_discrete(g, ta)
    assert len(h.nodes) == 2 and len(h.action_edges) == 1


# export


def test_export_single_node():
    text = export_graph(build_zone_graph(TimedAutomaton(("l0",), "l0"))).decode()
    lines = text.splitlines()
    assert sum("->" in l for l in lines) == 0
    assert sum(l.strip().startswith("n") for l in lines) == 1


def test_export_lists_base_zones_of_l1():
    g = build_zone_graph(load_example("fig1"))
    text = export_graph(g).decode()
    for n in g.base_nodes("l1"):
        assert f'zone="{dbm.render(n.zone, g.clocks)}", base=true' in text
