"""Greedy connected-dominating-set baselines.

Two centralized reference constructions used as size yardsticks for the
clustered dominator sets built by the protocol: a single-phase growth that
repeatedly blackens the most productive frontier node or node pair, and a
two-phase variant that greedily picks a dominating set first and then buys
connector nodes along shortest paths. They are reference implementations in
the classic greedy style only; no claim is made of matching any particular
published variant's tie-breaking, message complexity, or distributed
realization beyond what is stated here.
"""

from __future__ import annotations

from .graph import Graph, InfeasibleError, is_connected


def _check(g: Graph) -> None:
    if g.n == 0:
        raise ValueError("empty graph has no connected dominating set")
    if not is_connected(g):
        raise InfeasibleError("no connected dominating set on a disconnected graph")


def cds_alg1(g: Graph) -> frozenset[int]:
    """Single-phase greedy growth.

    Start from a highest-degree node colored black; its neighbors turn gray,
    everyone else starts white. Repeatedly blacken either one gray node or a
    gray node together with one of its white neighbors, whichever removes the
    most white nodes, until no white remains. Ties prefer the smallest node
    id, and a lone node over a pair. The black set is returned.
    """
    _check(g)
    if g.n == 1:
        return frozenset({0})
    adj = g.adj
    white = set(range(g.n))
    gray: set[int] = set()
    black: set[int] = set()

    def blacken(v: int) -> None:
        black.add(v)
        gray.discard(v)
        white.discard(v)
        for u in adj[v]:
            if u in white:
                white.remove(u)
                gray.add(u)

    start = min(range(g.n), key=lambda v: (-len(adj[v]), v))
    blacken(start)

    while white:
        best: tuple[int, int, int] | None = None  # (-gain, u, w) with w=-1 for singles
        for u in sorted(gray):
            wn = white & adj[u]
            if not wn:
                continue
            cand = (-len(wn), u, -1)
            if best is None or cand < best:
                best = cand
            for w in sorted(wn):
                gain = len(white & (adj[u] | adj[w]))
                cand = (-gain, u, w)
                if cand < best:
                    best = cand
        assert best is not None, "connected graph must expose a gray-white frontier"
        _, u, w = best
        blacken(u)
        if w >= 0:
            blacken(w)
    return frozenset(black)


def cds_alg2(g: Graph) -> frozenset[int]:
    """Dominate first, then connect.

    Phase one greedily picks the node covering the most uncovered nodes
    (closed neighborhoods, ties to the smallest id) until everything is
    covered. Phase two repeatedly runs a breadth-first search from the
    fragment containing the smallest chosen node and adds the interior of a
    shortest path to the nearest other fragment, until the chosen set induces
    a connected subgraph.
    """
    _check(g)
    adj = g.adj
    closed = [frozenset(adj[v] | {v}) for v in range(g.n)]

    uncovered = set(range(g.n))
    chosen: set[int] = set()
    while uncovered:
        v = min(range(g.n), key=lambda v: (-len(uncovered & closed[v]), v))
        chosen.add(v)
        uncovered -= closed[v]

    while True:
        fragments = _fragments(g, chosen)
        if len(fragments) <= 1:
            break
        core = next(f for f in fragments if min(chosen) in f)
        path = _shortest_escape(g, core, chosen)
        chosen.update(path)
    return frozenset(chosen)


def _fragments(g: Graph, members: set[int]) -> list[set[int]]:
    left = set(members)
    out = []
    while left:
        start = min(left)
        comp = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for u in g.adj[v]:
                if u in left and u not in comp:
                    comp.add(u)
                    stack.append(u)
        out.append(comp)
        left -= comp
    return out


def _shortest_escape(g: Graph, core: set[int], members: set[int]) -> list[int]:
    """Interior nodes of a shortest path from ``core`` to any other fragment."""
    parent: dict[int, int | None] = {v: None for v in core}
    frontier = sorted(core)
    targets = members - core
    while frontier:
        nxt = []
        hits = [v for v in frontier if v in targets]
        if hits:
            node = min(hits)
            path = []
            cur = parent[node]
            while cur is not None and cur not in core:
                path.append(cur)
                cur = parent[cur]
            return path
        for v in frontier:
            for u in sorted(g.adj[v]):
                if u not in parent:
                    parent[u] = v
                    nxt.append(u)
        frontier = sorted(nxt)
    raise InfeasibleError("fragments are not mutually reachable")  # unreachable if g connected
