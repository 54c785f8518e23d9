"""Difference bound matrices over clocks ``x0 .. xn`` (``x0`` is the constant zero).

Bounds are packed into plain integers: ``(m, <)`` is ``2*m`` and ``(m, <=)`` is
``2*m + 1``, so the integer order is the bound order and
``(m, <) < (m, <=) < (m+1, <)``.  ``INF`` is a sentinel larger than any finite
bound.  Entry ``(i, j)`` bounds ``x_i - x_j``.

A :class:`Dbm` is immutable and always canonical (shortest-path closed, clocks
non-negative).  Operations whose result can be empty return ``None``; there is
no matrix value representing the empty zone.
"""
from __future__ import annotations

import re
from functools import lru_cache
from operator import le
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

INF = 1 << 62
LE_ZERO = 1
LT_ZERO = 0

# (clock, relation, constant) -> list of (i, j, raw bound); clock 0 is x0
_REL_TO_ENTRIES = {
    "<": lambda i, k: [(i, 0, 2 * k)],
    "<=": lambda i, k: [(i, 0, 2 * k + 1)],
    ">": lambda i, k: [(0, i, -2 * k)],
    ">=": lambda i, k: [(0, i, -2 * k + 1)],
    "=": lambda i, k: [(i, 0, 2 * k + 1), (0, i, -2 * k + 1)],
}


def raw(m: int, strict: bool = False) -> int:
    return 2 * m + (0 if strict else 1)


def add(a: int, b: int) -> int:
    if a >= INF or b >= INF:
        return INF
    return a + b - ((a | b) & 1)


def complement(b: int) -> int:
    """Raw bound of the negation of ``x_i - x_j < b``, as a bound on ``x_j - x_i``."""
    return 1 - b


@dataclass(frozen=True)
class Bound:
    """Human-facing view of one DBM entry."""

    value: int | None
    strict: bool = False

    @property
    def finite(self) -> bool:
        return self.value is not None

    @classmethod
    def from_raw(cls, b: int) -> Bound:
        if b >= INF:
            return cls(None, True)
        return cls(b >> 1, not (b & 1))

    def to_raw(self) -> int:
        if self.value is None:
            return INF
        return raw(self.value, self.strict)

    def __str__(self) -> str:
        if self.value is None:
            return "<inf"
        return f"{'<' if self.strict else '<='}{self.value}"


class Relation(Enum):
    EQUAL = "equal"
    SUBSET = "subset"
    SUPERSET = "superset"
    DISJOINT = "disjoint"
    OVERLAP = "overlap"


class Dbm:
    """Canonical DBM.  Build through the module functions, not the constructor."""

    __slots__ = ("dim", "m", "_hash")

    def __init__(self, dim: int, m: tuple[int, ...]):
        self.dim = dim
        self.m = m
        self._hash = hash(m)

    @property
    def nclocks(self) -> int:
        return self.dim - 1

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.m[i * self.dim + j]

    def bound(self, i: int, j: int) -> Bound:
        return Bound.from_raw(self[i, j])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Dbm) and self.m == other.m

    def __hash__(self) -> int:
        return self._hash

    def __le__(self, other: Dbm) -> bool:
        return includes(other, self)

    def __repr__(self) -> str:
        return f"Dbm({render(self)})"

    def rows(self) -> list[list[int]]:
        d = self.dim
        return [list(self.m[i * d:(i + 1) * d]) for i in range(d)]

    def is_bounded_above(self) -> bool:
        return any(self[i, 0] < INF for i in range(1, self.dim))


def universe(nclocks: int) -> Dbm:
    dim = nclocks + 1
    m = [INF] * (dim * dim)
    for j in range(dim):
        m[j] = LE_ZERO
        m[j * dim + j] = LE_ZERO
    return Dbm(dim, tuple(m))


def zero(nclocks: int) -> Dbm:
    dim = nclocks + 1
    return Dbm(dim, tuple([LE_ZERO] * (dim * dim)))


def _close(dim: int, m: list[int]) -> Dbm | None:
    """Floyd-Warshall closure in place; ``None`` on a negative cycle."""
    for j in range(dim):
        if m[j] > LE_ZERO:
            m[j] = LE_ZERO
    for i in range(dim):
        if m[i * dim + i] < LE_ZERO:
            return None
        m[i * dim + i] = LE_ZERO
    for k in range(dim):
        rk = k * dim
        for i in range(dim):
            ri = i * dim
            mik = m[ri + k]
            if mik >= INF:
                continue
            for j in range(dim):
                mkj = m[rk + j]
                if mkj >= INF:
                    continue
                s = mik + mkj - ((mik | mkj) & 1)
                if s < m[ri + j]:
                    m[ri + j] = s
        if m[k * dim + k] < LE_ZERO:
            return None
    for i in range(dim):
        if m[i * dim + i] < LE_ZERO:
            return None
    return Dbm(dim, tuple(m))


def canonicalize(dim: int, entries: Sequence[int] | Sequence[Sequence[int]]) -> Dbm | None:
    """Close a raw matrix (flat or nested) into a canonical DBM, or ``None`` if empty."""
    flat = list(entries)
    if flat and isinstance(flat[0], (list, tuple)):
        flat = [b for row in flat for b in row]
    if len(flat) != dim * dim:
        raise ValueError(f"expected {dim * dim} entries, got {len(flat)}")
    return _close(dim, flat)


def constrain(z: Dbm, i: int, j: int, b: int) -> Dbm | None:
    """Intersect ``z`` with ``x_i - x_j (b)`` using the O(n^2) incremental update."""
    dim = z.dim
    m = z.m
    if b >= m[i * dim + j]:
        return z
    if add(b, m[j * dim + i]) < LE_ZERO:
        return None
    out = list(m)
    col_i = [m[p * dim + i] for p in range(dim)]
    row_j = m[j * dim:(j + 1) * dim]
    for p in range(dim):
        pi = col_i[p]
        if pi >= INF:
            continue
        pib = add(pi, b)
        rp = p * dim
        for q in range(dim):
            jq = row_j[q]
            if jq >= INF:
                continue
            s = pib + jq - ((pib | jq) & 1)
            if s < out[rp + q]:
                out[rp + q] = s
    return Dbm(dim, tuple(out))


def constrain_all(z: Dbm | None, constraints: Iterable[tuple[int, int, int]]) -> Dbm | None:
    for i, j, b in constraints:
        if z is None:
            return None
        z = constrain(z, i, j, b)
    return z


def from_constraints(nclocks: int, constraints: Iterable[tuple[int, int, int]]) -> Dbm | None:
    return constrain_all(universe(nclocks), constraints)


def elementary(clock: int, rel: str, k: int) -> list[tuple[int, int, int]]:
    """DBM entries of the guard atom ``x_clock rel k``."""
    return _REL_TO_ENTRIES[rel](clock, k)


def intersect(z1: Dbm, z2: Dbm) -> Dbm | None:
    if z1.dim != z2.dim:
        raise ValueError("dimension mismatch")
    dim = z1.dim
    tighter = [(k, b) for k, (a, b) in enumerate(zip(z1.m, z2.m)) if b < a]
    if not tighter:
        return z1
    if len(tighter) <= 2:
        z: Dbm | None = z1
        for k, b in tighter:
            z = constrain(z, k // dim, k % dim, b)
            if z is None:
                return None
        return z
    return _close(dim, [min(a, b) for a, b in zip(z1.m, z2.m)])


def includes(outer: Dbm, inner: Dbm) -> bool:
    """``inner`` is a subset of ``outer`` (both canonical)."""
    return all(map(le, inner.m, outer.m))


@lru_cache(maxsize=None)
def _mirror_pairs(dim: int) -> tuple[tuple[int, int], ...]:
    return tuple((i * dim + j, j * dim + i) for i in range(dim) for j in range(i + 1, dim))


def intersects(z1: Dbm, z2: Dbm) -> bool:
    m1, m2 = z1.m, z2.m
    # quick pairwise test catches most disjoint pairs without a closure
    for a, b in _mirror_pairs(z1.dim):
        u = m1[a] if m1[a] < m2[a] else m2[a]
        v = m1[b] if m1[b] < m2[b] else m2[b]
        if u < INF and v < INF and u + v - ((u | v) & 1) < LE_ZERO:
            return False
    return intersect(z1, z2) is not None


def future(z: Dbm) -> Dbm:
    dim = z.dim
    m = list(z.m)
    for i in range(1, dim):
        m[i * dim] = INF
    return Dbm(dim, tuple(m))


def past(z: Dbm) -> Dbm:
    """Down-closure ``{v >= 0 | exists d >= 0. v + d in z}``."""
    dim = z.dim
    m = list(z.m)
    for j in range(1, dim):
        best = LE_ZERO
        for i in range(1, dim):
            b = m[i * dim + j]
            if b < best:
                best = b
        m[j] = best
    out = _close(dim, m)
    assert out is not None
    return out


def reset_clocks(z: Dbm, clocks: Iterable[int]) -> Dbm:
    dim = z.dim
    m = list(z.m)
    for x in clocks:
        rx = x * dim
        for j in range(dim):
            m[rx + j] = m[j]
            m[j * dim + x] = m[j * dim]
        m[rx] = LE_ZERO
        m[x] = LE_ZERO
        m[rx + x] = LE_ZERO
    return Dbm(dim, tuple(m))


def free_clocks(z: Dbm, clocks: Iterable[int]) -> Dbm:
    dim = z.dim
    m = list(z.m)
    for x in clocks:
        rx = x * dim
        for j in range(dim):
            if j != x:
                m[rx + j] = INF
                m[j * dim + x] = m[j * dim]
        m[x] = LE_ZERO
    return Dbm(dim, tuple(m))


def inverse_reset(z: Dbm, clocks: Iterable[int]) -> Dbm | None:
    """``[R <- 0]^-1 (z ∩ [[R = 0]])``."""
    clocks = list(clocks)
    p: Dbm | None = z
    for x in clocks:
        p = constrain(p, x, 0, LE_ZERO)
        if p is None:
            return None
    return free_clocks(p, clocks)


def relation(z1: Dbm, z2: Dbm) -> Relation:
    if z1 == z2:
        return Relation.EQUAL
    if not intersects(z1, z2):
        return Relation.DISJOINT
    if includes(z2, z1):
        return Relation.SUBSET
    if includes(z1, z2):
        return Relation.SUPERSET
    return Relation.OVERLAP


def split_difference(z1: Dbm, z2: Dbm) -> tuple[Dbm | None, list[Dbm]]:
    """Return ``(z1 ∩ z2, pieces)`` where the pieces partition ``z1 - z2``.

    Walks the entries of ``z2`` row-major; each constraint that cuts the current
    remainder emits the part violating it and keeps the part satisfying it.
    """
    dim = z1.dim
    pieces: list[Dbm] = []
    p: Dbm | None = z1
    for i in range(dim):
        for j in range(dim):
            if i == j:
                continue
            b = z2[i, j]
            if b >= INF or p[i, j] <= b:
                continue
            outside = constrain(p, j, i, complement(b))
            if outside is not None:
                pieces.append(outside)
            p = constrain(p, i, j, b)
            if p is None:
                return None, pieces
    return p, pieces


def split_by(z: Dbm, i: int, j: int, b: int) -> tuple[Dbm | None, Dbm | None]:
    """Split ``z`` along one constraint: (satisfying part, violating part)."""
    return constrain(z, i, j, b), constrain(z, j, i, complement(b))


def canonical_decompose(z: Dbm, constraints: Iterable[tuple[int, int, int]]) -> list[Dbm]:
    """Pieces of ``z`` that uniformly satisfy or violate each given constraint."""
    pieces = [z]
    for i, j, b in constraints:
        nxt = []
        for p in pieces:
            inside, outside = split_by(p, i, j, b)
            if inside is not None:
                nxt.append(inside)
            if outside is not None:
                nxt.append(outside)
        pieces = nxt
    return pieces


def hull(z1: Dbm, z2: Dbm) -> Dbm:
    """Smallest DBM containing both (pointwise max of canonical forms)."""
    return Dbm(z1.dim, tuple(max(a, b) for a, b in zip(z1.m, z2.m)))


def convex_union(z1: Dbm, z2: Dbm) -> Dbm | None:
    """The union as a DBM when it is convex, otherwise ``None``.

    The envelope keeps each inequality of one operand that is valid for the
    other.  On canonical DBMs an inequality ``x_i - x_j < m`` of ``z1`` is valid
    for ``z2`` iff ``z2[i, j] <= m``, so the envelope is the entrywise maximum.
    The union is convex iff it equals the envelope.
    """
    if includes(z1, z2):
        return z1
    if includes(z2, z1):
        return z2
    env = hull(z1, z2)
    _, rest = split_difference(env, z1)
    if all(includes(z2, piece) for piece in rest):
        return env
    return None


def extrapolate(z: Dbm, bounds: Sequence[int]) -> Dbm:
    """Max-constant extrapolation (the variant that also drops difference
    bounds of clocks already above their ceiling).

    ``bounds[i]`` is the ceiling for clock i; a negative ceiling marks a clock
    whose value is irrelevant, and that clock is freed.
    """
    inactive = [x for x in range(1, z.dim) if bounds[x] < 0]
    if inactive:
        z = free_clocks(z, inactive)
    dim = z.dim
    src = z.m
    # clocks whose lower bound already exceeds the ceiling
    above = [False] + [bounds[i] >= 0 and src[i] < raw(-bounds[i]) for i in range(1, dim)]
    m = list(src)
    changed = False
    for i in range(dim):
        if i and bounds[i] < 0:
            continue
        ri = i * dim
        up = raw(bounds[i]) if i else LE_ZERO
        for j in range(dim):
            if i == j:
                continue
            b = src[ri + j]
            if b >= INF or (j and bounds[j] < 0):
                continue
            lo = raw(-bounds[j], True) if j else LT_ZERO
            if i and (b > up or above[i] or above[j]):
                new = INF
            elif j and (b < lo or above[j]):
                new = lo
            else:
                continue
            if new != b:
                m[ri + j] = new
                changed = True
    if not changed:
        return z
    out = _close(dim, m)
    assert out is not None
    return out


def contains(z: Dbm, point: Sequence) -> bool:
    """Membership of a valuation (sequence of numbers, one per clock)."""
    v = (0, *point)
    dim = z.dim
    for i in range(dim):
        for j in range(dim):
            b = z.m[i * dim + j]
            if b >= INF or i == j:
                continue
            d = v[i] - v[j]
            m = b >> 1
            if d > m or (d == m and not (b & 1)):
                return False
    return True


def delay_window(z: Dbm, point: Sequence) -> tuple[Fraction, bool, Fraction | None, bool] | None:
    """Delays ``d >= 0`` with ``point + d`` in ``z``: ``(lo, lo_closed, hi, hi_closed)``.

    ``hi`` is ``None`` when the window is unbounded.  ``None`` if no delay works.
    """
    v = [Fraction(x) for x in point]
    dim = z.dim
    lo, lo_closed = Fraction(0), True
    hi, hi_closed = None, True
    for i in range(1, dim):
        for j in range(1, dim):
            if i == j:
                continue
            b = z[i, j]
            if b < INF and not _sat(v[i - 1] - v[j - 1], b):
                return None
    for i in range(1, dim):
        b = z[i, 0]
        if b < INF:
            cap = Fraction(b >> 1) - v[i - 1]
            closed = bool(b & 1)
            if hi is None or cap < hi or (cap == hi and not closed):
                hi, hi_closed = cap, closed
        b = z[0, i]
        floor = -Fraction(b >> 1) - v[i - 1]
        closed = bool(b & 1)
        if floor > lo or (floor == lo and not closed):
            lo, lo_closed = floor, closed
    if hi is not None and (hi < lo or (hi == lo and not (lo_closed and hi_closed))):
        return None
    return lo, lo_closed, hi, hi_closed


def _sat(d, b: int) -> bool:
    m = b >> 1
    return d < m or (d == m and bool(b & 1))


def upper_facets(z: Dbm) -> list[int]:
    """Clocks ``x`` whose hyperplane ``x = h`` bounds ``z`` fully from above.

    ``x`` qualifies when the zone equals its future cut by that single bound.
    """
    out = []
    up = future(z)
    for x in range(1, z.dim):
        b = z[x, 0]
        if b >= INF:
            continue
        if constrain(up, x, 0, b) == z:
            out.append(x)
    return out


def fixed_difference(z: Dbm, i: int, j: int) -> int | None:
    """``k`` when ``x_i - x_j = k`` holds throughout ``z``."""
    a, b = z[i, j], z[j, i]
    if a < INF and b < INF and a & 1 and b & 1 and (a >> 1) == -(b >> 1):
        return a >> 1
    return None


def render(z: Dbm | None, names: Sequence[str] | None = None) -> str:
    """Sorted conjunction of the finite, non-trivial constraints of ``z``."""
    if z is None:
        return "false"
    dim = z.dim
    names = list(names) if names is not None else [f"x{i}" for i in range(1, dim)]
    parts = []

    def fmt(b):
        return ("<=" if b & 1 else "<"), b >> 1

    for i in range(dim):
        for j in range(i + 1, dim):
            a, b = z[i, j], z[j, i]
            if i == 0:
                # a: -x_j bound (lower), b: x_j bound (upper)
                x = names[j - 1]
                k = fixed_difference(z, j, 0)
                if k is not None:
                    parts.append(f"{x} == {k}")
                    continue
                if a != LE_ZERO:
                    r, m = fmt(a)
                    parts.append(f"{x} {'>=' if r == '<=' else '>'} {-m}")
                if b < INF:
                    r, m = fmt(b)
                    parts.append(f"{x} {r} {m}")
                continue
            x, y = names[i - 1], names[j - 1]
            k = fixed_difference(z, i, j)
            if k is not None:
                parts.append(f"{x} - {y} == {k}")
                continue
            if b < INF:
                r, m = fmt(b)
                parts.append(f"{y} - {x} {r} {m}")
            if a < INF:
                r, m = fmt(a)
                parts.append(f"{x} - {y} {r} {m}")
    return " && ".join(parts) if parts else "true"


_TERM = re.compile(r"^\s*([A-Za-z_]\w*)\s*(?:-\s*([A-Za-z_]\w*))?\s*$")
_SPLIT = re.compile(r"(<=|>=|==|=|<|>)")


def parse_zone(text: str, names: Sequence[str]) -> Dbm | None:
    """Build a zone from text such as ``"0 <= y - x < 2, x <= 5"``.

    Each comma-separated item is a chain of ``term op term op ...`` where a term
    is an integer, a clock, or a clock difference.
    """
    index = {n: i + 1 for i, n in enumerate(names)}
    cons: list[tuple[int, int, int]] = []
    for item in filter(None, (s.strip() for s in re.split(r",|&&", text))):
        if item == "true":
            continue
        tokens = [t.strip() for t in _SPLIT.split(item)]
        terms, ops = tokens[0::2], tokens[1::2]
        for left, op, right in zip(terms, ops, terms[1:]):
            cons.extend(_atom(left, op, right, index))
    return from_constraints(len(names), cons)


def _term(text: str, index: dict[str, int]):
    text = text.strip()
    if re.fullmatch(r"-?\d+", text):
        return None, None, int(text)
    m = _TERM.match(text)
    if not m:
        raise ValueError(f"bad zone term {text!r}")
    try:
        i = index[m.group(1)]
        j = index[m.group(2)] if m.group(2) else 0
    except KeyError as exc:
        raise ValueError(f"unknown clock {exc.args[0]!r}") from None
    return i, j, None


def _atom(left: str, op: str, right: str, index):
    li, lj, lk = _term(left, index)
    ri, rj, rk = _term(right, index)
    if lk is not None and rk is not None:
        raise ValueError("constant comparison")
    if lk is None and rk is None:
        # x op y  ==  x - y op 0
        if lj or rj:
            raise ValueError("difference compared with a clock")
        lj, rk = ri, 0
    if lk is not None:
        # k op (x_i - x_j)  ==  (x_i - x_j) flipped-op k
        flip = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "=", "==": "="}
        li, lj, op, rk = ri, rj, flip[op], lk
    op = "=" if op == "==" else op
    i, j, k = li, lj, rk
    out = []
    if op in ("<", "<=", "="):
        out.append((i, j, raw(k, op == "<")))
    if op in (">", ">=", "="):
        out.append((j, i, raw(-k, op == ">")))
    return out
