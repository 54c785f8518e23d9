"""
Zones and difference bound matrices
===================================

A zone is a convex set of clock valuations described by bounds on single
clocks and on differences of clocks.  This walk-through builds a few zones,
moves them through time and resets, and cuts them apart.
"""
from __future__ import annotations

from tamin import dbm

names = ["x", "y"]
spacer = "_" * 60

# a zone from text: x and y agree, and x is below 2
z = dbm.parse_zone("x == y, x < 2", names)
print("z =", dbm.render(z, names))

# letting time pass keeps the difference but drops the upper bound
print("future(z) =", dbm.render(dbm.future(z), names))

# resetting x puts it back at zero; the difference y - x now reads y
r = dbm.reset_clocks(z, [1])
print("reset x in z =", dbm.render(r, names))
print("future of that =", dbm.render(dbm.future(r), names))

print(spacer)

# every zone is stored closed under shortest paths, so implied bounds show up
w = dbm.parse_zone("x <= 3, y <= 2, x - y <= 5", names)
print("x <= 3, y <= 2, x - y <= 5 closes to", dbm.render(w, names))
print("raw entry for x - y:", w[1, 2], "which is the bound", w.bound(1, 2))

print(spacer)

# split_difference cuts z1 into the part inside z2 and disjoint leftovers
z1 = dbm.parse_zone("x <= 4, y <= 4", names)
z2 = dbm.parse_zone("1 < x < 3, y - x < 1", names)
inside, rest = dbm.split_difference(z1, z2)
print("z1 & z2 =", dbm.render(inside, names))
for k, piece in enumerate(rest):
    print(f"  piece {k}:", dbm.render(piece, names))

# convex_union returns the union only when it is itself a zone
a = dbm.parse_zone("x <= 1", ["x"])
b = dbm.parse_zone("1 <= x <= 2", ["x"])
print("\n[0,1] u [1,2] =", dbm.render(dbm.convex_union(a, b), ["x"]))
c = dbm.parse_zone("x >= 3", ["x"])
print("[0,1] u [3,oo) convex?", dbm.convex_union(a, c) is not None)
