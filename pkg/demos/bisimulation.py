"""
Deciding timed bisimilarity
===========================

Two automata are compared on a zone graph of their product.  When they
differ, the checker produces a timed trace that one side can follow and the
other cannot.
"""
from __future__ import annotations

from tamin import check_timed_bisim, load_example
from tamin.region import region_bisim_oracle
from tamin.ta import Constraint, Edge, TimedAutomaton

left, right = load_example("fig4_left"), load_example("fig4_right")
print(left)
print(right)

# the left automaton splits 'a' at x = 3 into two locations that behave alike
result = check_timed_bisim(left, right)
print("\nverdict:", result)
print("product zones explored:", result.product_nodes)

# a one-unit change in an upper bound is visible after waiting long enough
def one_edge(k):
    e = Edge("l0", "l1", "a", (Constraint("x", "<=", k),))
    return TimedAutomaton(("l0", "l1"), "l0", ("x",), ("a",), (e,))


result = check_timed_bisim(one_edge(1), one_edge(2))
print("\nx <= 1 against x <= 2:", result)
for kind, value in result.witness:
    print("  step:", kind, value)

# the region construction gives the same answer by brute force
print("region oracle says:", region_bisim_oracle(one_edge(1), one_edge(2)).value)
