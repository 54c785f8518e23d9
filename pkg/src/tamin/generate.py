"""Seeded random automata and zones for property tests and demos."""
from __future__ import annotations

import random

from . import dbm
from .dbm import Dbm
from .ta import RELATIONS, Constraint, Edge, TimedAutomaton, normalize_guard

CLOCK_NAMES = ("x", "y", "z", "w")


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_automaton(seed, *, max_clocks: int = 2, max_locations: int = 4, max_constant: int = 4,
                     alphabet: tuple[str, ...] = ("a", "b"), max_edges: int | None = None,
                     max_atoms: int = 2, min_clocks: int = 0) -> TimedAutomaton:
    rng = _rng(seed)
    nclocks = rng.randint(min_clocks, max_clocks)
    clocks = CLOCK_NAMES[:nclocks]
    nloc = rng.randint(1, max_locations)
    locs = tuple(f"l{i}" for i in range(nloc))
    nedges = rng.randint(1, max_edges if max_edges is not None else 2 * nloc + 1)
    edges = []
    for _ in range(nedges):
        atoms = []
        if clocks:
            for _ in range(rng.randint(0, max_atoms)):
                atoms.append(Constraint(rng.choice(clocks), rng.choice(RELATIONS), rng.randint(0, max_constant)))
        resets = tuple(c for c in clocks if rng.random() < 0.35)
        edges.append(Edge(rng.choice(locs), rng.choice(locs), rng.choice(alphabet),
                          normalize_guard(atoms, clocks), resets))
    return TimedAutomaton(locs, locs[0], clocks, alphabet, tuple(edges)).canonical()


def random_dbm(seed, nclocks: int, max_constant: int, *, density: float = 0.5) -> Dbm:
    """A non-empty random zone with constants in ``[-M, M]``."""
    rng = _rng(seed)
    dim = nclocks + 1
    while True:
        cons = []
        for i in range(dim):
            for j in range(dim):
                if i == j or rng.random() > density:
                    continue
                if j == 0:
                    k = rng.randint(0, max_constant)
                elif i == 0:
                    k = -rng.randint(0, max_constant)
                else:
                    k = rng.randint(-max_constant, max_constant)
                cons.append((i, j, dbm.raw(k, rng.random() < 0.5)))
        z = dbm.from_constraints(nclocks, cons)
        if z is not None:
            return z


def mutate(seed, ta: TimedAutomaton) -> TimedAutomaton:
    """A small random perturbation of one guard constant, reset set or target."""
    rng = _rng(seed)
    if not ta.edges:
        return ta
    edges = list(ta.edges)
    k = rng.randrange(len(edges))
    e = edges[k]
    choice = rng.randrange(3)
    if choice == 0 and e.guard:
        atoms = list(e.guard)
        n = rng.randrange(len(atoms))
        c = atoms[n]
        atoms[n] = Constraint(c.clock, c.rel, max(0, c.k + rng.choice((-1, 1))))
        e = Edge(e.source, e.target, e.action, normalize_guard(atoms, ta.clocks), e.resets)
    elif choice == 1 and ta.clocks:
        x = rng.choice(ta.clocks)
        resets = set(e.resets) ^ {x}
        e = Edge(e.source, e.target, e.action, e.guard, tuple(c for c in ta.clocks if c in resets))
    else:
        e = Edge(e.source, rng.choice(ta.locations), e.action, e.guard, e.resets)
    edges[k] = e
    return ta.with_edges(edges)
