"""
Reducing clocks step by step
============================

The pipeline prunes dead edges, splits locations by the zones they are
entered in, merges guards whose distinction is invisible, and finally maps
the remaining clocks onto as few clocks as a colouring allows.
"""
from __future__ import annotations

from tamin import check_timed_bisim, load_example
from tamin.minimize import (active_clocks, build_clock_graph, color_clock_graph, minimize_pipeline,
                            partition_active_clocks, stage1_prune, stage2_split, stage3_merge, stage4_rename)
from tamin.minimize.clocks import reachable_zones

spacer = "_" * 60

ta = load_example("fig1")
print("input:")
print(ta)

a1 = stage1_prune(ta)
a2 = stage2_split(a1)
print("\nafter splitting l1 by its entry zones:")
print(a2)

a3 = stage3_merge(a2)
a4 = stage4_rename(a3)
print("\nafter renaming clocks:")
print(a4)
print("bisimilar to the input:", check_timed_bisim(ta, a4).bisimilar)

print(spacer)

# a case that needs three clocks: each pair of clocks is alive together somewhere
fig5 = load_example("fig5")
act = active_clocks(fig5)
for loc in fig5.locations:
    print(f"active at {loc}:", sorted(act[loc]))
graph = build_clock_graph(fig5, act, partition_active_clocks(fig5, reachable_zones(fig5), act))
print("clock graph vertices:", [v.name() for v in graph.vertices])
print("clock graph edges:", sorted(graph.edges))
coloring, count = color_clock_graph(graph)
print("colours needed:", count)

print(spacer)

# the one-call version with a per-stage report
out, report = minimize_pipeline(fig5)
for s in report.stages:
    print(f"{s.stage:>6}: {s.locations} locations, {s.edges} edges, {s.clocks} clocks")
print("bisimulation checks during guard merging:", report.bisim_checks)
