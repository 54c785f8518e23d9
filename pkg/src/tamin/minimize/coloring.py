"""Exact minimum graph colouring."""
from __future__ import annotations


def _adjacency(n: int, edges) -> list[set[int]]:
    adj = [set() for _ in range(n)]
    for a, b in edges:
        if a != b:
            adj[a].add(b)
            adj[b].add(a)
    return adj


def chromatic_number(n: int, edges) -> int:
    """Branch and bound ordered by saturation degree (DSatur)."""
    if n == 0:
        return 0
    adj = _adjacency(n, edges)
    best = n
    colors = [-1] * n

    def pick():
        top, key = -1, None
        for v in range(n):
            if colors[v] >= 0:
                continue
            sat = len({colors[u] for u in adj[v] if colors[u] >= 0})
            k = (sat, len(adj[v]), -v)
            if key is None or k > key:
                top, key = v, k
        return top

    def search(used: int, done: int):
        nonlocal best
        if used >= best:
            return
        if done == n:
            best = used
            return
        v = pick()
        taken = {colors[u] for u in adj[v]}
        for c in range(min(used + 1, best - 1)):
            if c in taken:
                continue
            colors[v] = c
            search(max(used, c + 1), done + 1)
            colors[v] = -1

    search(0, 0)
    return best


def color_graph(n: int, edges) -> tuple[list[int], int]:
    """Lexicographically least proper colouring using the fewest colours."""
    k = chromatic_number(n, edges)
    adj = _adjacency(n, edges)
    colors = [-1] * n

    def assign(v: int) -> bool:
        if v == n:
            return True
        for c in range(k):
            if all(colors[u] != c for u in adj[v] if u < v):
                colors[v] = c
                if assign(v + 1):
                    return True
        colors[v] = -1
        return False

    ok = assign(0)
    assert ok
    return colors, k
