"""Timed-automaton data model and its JSON file format."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import dbm
from .dbm import Dbm

RELATIONS = ("<", "<=", "=", ">=", ">")
_REL_ORDER = {r: i for i, r in enumerate(RELATIONS)}
_TOP_KEYS = ("clocks", "alphabet", "locations", "initial", "edges")
_EDGE_KEYS = ("from", "to", "action", "guard", "resets")
_ATOM_KEYS = ("clock", "rel", "k")


class TaError(ValueError):
    """Raised on malformed automaton documents.

    ``kind`` is ``"syntax"`` or ``"semantic"``; ``line``/``column`` are set for
    syntax errors.
    """

    def __init__(self, kind: str, message: str, line: int | None = None, column: int | None = None):
        self.kind = kind
        self.message = message
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{kind} error{where}: {message}")


@dataclass(frozen=True, order=True)
class Constraint:
    """Atom ``clock rel k``; ``rel`` is never ``=`` once inside a guard."""

    clock: str
    rel: str
    k: int

    def holds(self, value) -> bool:
        v = value
        return {
            "<": v < self.k,
            "<=": v <= self.k,
            "=": v == self.k,
            ">=": v >= self.k,
            ">": v > self.k,
        }[self.rel]

    @property
    def is_upper(self) -> bool:
        return self.rel in ("<", "<=")

    @property
    def is_lower(self) -> bool:
        return self.rel in (">", ">=")

    def negate(self) -> Constraint:
        flip = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}
        return Constraint(self.clock, flip[self.rel], self.k)

    def __str__(self) -> str:
        return f"{self.clock}{self.rel}{self.k}"


def normalize_guard(atoms: Iterable[Constraint], clocks: Sequence[str] | None = None) -> tuple[Constraint, ...]:
    """Split ``=`` into a ``<=``/``>=`` pair, drop duplicates and sort."""
    out = set()
    for c in atoms:
        if c.rel == "=":
            out.add(Constraint(c.clock, "<=", c.k))
            out.add(Constraint(c.clock, ">=", c.k))
        else:
            out.add(c)
    order = {n: i for i, n in enumerate(clocks)} if clocks is not None else None
    return tuple(sorted(out, key=lambda c: _atom_key(c, order)))


def _atom_key(c: Constraint, order):
    return (order.get(c.clock, len(order)) if order is not None else 0, c.clock, _REL_ORDER[c.rel], c.k)


def guard_text(guard: Sequence[Constraint]) -> str:
    return " && ".join(str(c) for c in guard) if guard else "true"


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    action: str
    guard: tuple[Constraint, ...] = ()
    resets: tuple[str, ...] = ()

    def enabled(self, valuation: Mapping[str, object]) -> bool:
        return all(c.holds(valuation[c.clock]) for c in self.guard)

    def __str__(self) -> str:
        r = "{" + ",".join(self.resets) + "}"
        return f"{self.source} -[{self.action}, {guard_text(self.guard)}, {r}]-> {self.target}"


@dataclass(frozen=True)
class TimedAutomaton:
    locations: tuple[str, ...]
    initial: str
    clocks: tuple[str, ...] = ()
    alphabet: tuple[str, ...] = ()
    edges: tuple[Edge, ...] = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "clocks", tuple(self.clocks))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "_index", {c: i + 1 for i, c in enumerate(self.clocks)})

    @property
    def nclocks(self) -> int:
        return len(self.clocks)

    def clock_index(self, name: str) -> int:
        """1-based DBM index of a clock."""
        return self._index[name]

    def outgoing(self, loc: str) -> list[tuple[int, Edge]]:
        return [(k, e) for k, e in enumerate(self.edges) if e.source == loc]

    def incoming(self, loc: str) -> list[tuple[int, Edge]]:
        return [(k, e) for k, e in enumerate(self.edges) if e.target == loc]

    def guard_entries(self, guard: Iterable[Constraint]) -> list[tuple[int, int, int]]:
        out = []
        for c in guard:
            out.extend(dbm.elementary(self.clock_index(c.clock), c.rel, c.k))
        return out

    def guard_dbm(self, guard: Iterable[Constraint]) -> Dbm | None:
        return dbm.from_constraints(self.nclocks, self.guard_entries(guard))

    def reset_indices(self, edge: Edge) -> tuple[int, ...]:
        return tuple(self.clock_index(c) for c in edge.resets)

    def max_constant(self) -> int:
        return max((c.k for e in self.edges for c in e.guard), default=0)

    def constrained_clocks(self, loc: str) -> set[str]:
        """``clk(l)``: clocks read by guards of the edges leaving ``loc``."""
        return {c.clock for e in self.edges if e.source == loc for c in e.guard}

    def with_edges(self, edges: Iterable[Edge]) -> TimedAutomaton:
        return replace(self, edges=tuple(edges))

    def canonical(self) -> TimedAutomaton:
        """Normalized guards (sorted, ``=`` split) and resets in clock order."""
        order = self._index
        edges = tuple(
            replace(e, guard=normalize_guard(e.guard, self.clocks),
                    resets=tuple(sorted(set(e.resets), key=lambda c: order.get(c, 1 << 30))))
            for e in self.edges
        )
        return replace(self, edges=edges)

    def __str__(self) -> str:
        lines = [f"clocks {list(self.clocks)}; initial {self.initial}"]
        lines += [f"  {e}" for e in self.edges]
        return "\n".join(lines)


def validate(ta: TimedAutomaton) -> list[str]:
    """Diagnostics for every violated structural invariant; empty when valid."""
    diags: list[str] = []
    for kind, seq in (("location", ta.locations), ("clock", ta.clocks), ("action", ta.alphabet)):
        seen = set()
        for name in seq:
            if not isinstance(name, str) or not name:
                diags.append(f"{kind} id must be a non-empty string: {name!r}")
            elif name in seen:
                diags.append(f"duplicate {kind} id '{name}'")
            seen.add(name)
    locs, clocks, acts = set(ta.locations), set(ta.clocks), set(ta.alphabet)
    if ta.initial not in locs:
        diags.append(f"initial location '{ta.initial}' is not declared")
    for n, e in enumerate(ta.edges):
        for end in (e.source, e.target):
            if end not in locs:
                diags.append(f"edge {n}: unknown location '{end}'")
        if e.action not in acts:
            diags.append(f"edge {n}: unknown action '{e.action}'")
        for c in e.guard:
            if c.clock not in clocks:
                diags.append(f"edge {n}: guard uses unknown clock '{c.clock}'")
            if c.rel not in _REL_ORDER:
                diags.append(f"edge {n}: unknown relation '{c.rel}'")
            if not isinstance(c.k, int) or isinstance(c.k, bool) or c.k < 0:
                diags.append(f"edge {n}: guard constant must be a non-negative integer, got {c.k!r}")
        for r in e.resets:
            if r not in clocks:
                diags.append(f"edge {n}: reset of unknown clock '{r}'")
    return diags


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def parse_ta(text: bytes | str) -> TimedAutomaton:
    """Parse a JSON automaton document; raises :class:`TaError`."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TaError("syntax", f"input is not UTF-8 ({exc.reason})", 1, exc.start + 1) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TaError("syntax", exc.msg, exc.lineno, exc.colno) from None
    ta = _from_doc(doc)
    diags = validate(ta)
    if diags:
        raise TaError("semantic", "; ".join(diags))
    return ta.canonical()


def _need(cond: bool, msg: str):
    if not cond:
        raise TaError("syntax", msg)


def _names(doc, key) -> tuple[str, ...]:
    v = doc.get(key, [])
    _need(isinstance(v, list), f"'{key}' must be a list")
    for s in v:
        _need(isinstance(s, str), f"'{key}' entries must be strings, got {s!r}")
    return tuple(v)


def _from_doc(doc) -> TimedAutomaton:
    _need(isinstance(doc, dict), "document must be an object")
    extra = sorted(set(doc) - set(_TOP_KEYS))
    _need(not extra, f"unknown key(s) {extra}")
    _need("locations" in doc, "missing key 'locations'")
    locations = _names(doc, "locations")
    _need(len(locations) > 0, "at least one location is required")
    initial = doc.get("initial", locations[0])
    _need(isinstance(initial, str), "'initial' must be a string")
    edges_doc = doc.get("edges", [])
    _need(isinstance(edges_doc, list), "'edges' must be a list")
    edges = [_edge(n, e) for n, e in enumerate(edges_doc)]
    return TimedAutomaton(locations, initial, _names(doc, "clocks"), _names(doc, "alphabet"), tuple(edges))


def _edge(n: int, e) -> Edge:
    _need(isinstance(e, dict), f"edge {n} must be an object")
    extra = sorted(set(e) - set(_EDGE_KEYS))
    _need(not extra, f"edge {n}: unknown key(s) {extra}")
    for key in ("from", "to", "action"):
        _need(isinstance(e.get(key), str), f"edge {n}: '{key}' must be a string")
    g = e.get("guard", True)
    atoms = []
    if g is True:
        pass
    else:
        _need(isinstance(g, list), f"edge {n}: 'guard' must be a list or true")
        for a in g:
            _need(isinstance(a, dict), f"edge {n}: guard atoms must be objects")
            extra = sorted(set(a) - set(_ATOM_KEYS))
            _need(not extra, f"edge {n}: unknown guard key(s) {extra}")
            _need(isinstance(a.get("clock"), str), f"edge {n}: guard 'clock' must be a string")
            _need(a.get("rel") in _REL_ORDER, f"edge {n}: guard 'rel' must be one of {list(RELATIONS)}")
            k = a.get("k")
            _need(isinstance(k, int) and not isinstance(k, bool), f"edge {n}: guard 'k' must be an integer")
            atoms.append(Constraint(a["clock"], a["rel"], k))
    resets = e.get("resets", [])
    _need(isinstance(resets, list) and all(isinstance(r, str) for r in resets),
          f"edge {n}: 'resets' must be a list of clock names")
    return Edge(e["from"], e["to"], e["action"], tuple(atoms), tuple(resets))


def _guard_doc(guard: Sequence[Constraint], clocks: Sequence[str]):
    atoms = normalize_guard(guard, clocks)
    if not atoms:
        return True
    merged = []
    skip = set()
    for c in atoms:
        if c in skip:
            continue
        if c.rel == "<=" and Constraint(c.clock, ">=", c.k) in atoms:
            skip.add(Constraint(c.clock, ">=", c.k))
            c = Constraint(c.clock, "=", c.k)
        merged.append(c)
    order = {n: i for i, n in enumerate(clocks)}
    merged.sort(key=lambda c: _atom_key(c, order))
    return [{"clock": c.clock, "rel": c.rel, "k": c.k} for c in merged]


def to_doc(ta: TimedAutomaton) -> dict:
    ta = ta.canonical()
    return {
        "clocks": list(ta.clocks),
        "alphabet": list(ta.alphabet),
        "locations": list(ta.locations),
        "initial": ta.initial,
        "edges": [
            {"from": e.source, "to": e.target, "action": e.action,
             "guard": _guard_doc(e.guard, ta.clocks), "resets": list(e.resets)}
            for e in ta.edges
        ],
    }


def serialize_ta(ta: TimedAutomaton) -> bytes:
    """Deterministic JSON text, one edge per line."""
    doc = to_doc(ta)
    d = lambda v: json.dumps(v, ensure_ascii=False)  # noqa: E731
    lines = ["{"]
    for key in _TOP_KEYS[:-1]:
        lines.append(f"  {d(key)}: {d(doc[key])},")
    if doc["edges"]:
        lines.append('  "edges": [')
        body = [f"    {d(e)}" for e in doc["edges"]]
        lines.append(",\n".join(body))
        lines.append("  ]")
    else:
        lines.append('  "edges": []')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def evaluate_guard(guard: Iterable[Constraint], valuation: Mapping[str, Fraction | int | float]) -> bool:
    """Direct evaluation of a conjunction at a valuation."""
    return all(c.holds(valuation[c.clock]) for c in guard)


def load(path) -> TimedAutomaton:
    with open(path, "rb") as fh:
        return parse_ta(fh.read())


def load_example(name: str) -> TimedAutomaton:
    """Bundled example automata: ``fig1``, ``fig4_left``, ``fig4_right``, ``fig5``."""
    from importlib.resources import files

    return parse_ta(files("tamin.data").joinpath(f"{name}.ta").read_bytes())
