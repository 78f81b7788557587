"""Backtracking search for rainbow maps of a template into a host.

One engine serves two modes: injective vertex maps into a loopless host
(subgraph embedding) and arbitrary vertex maps into a 0/1 structure with
loops (homomorphism).  Edge colors must extend the given pre-coloring and
be globally injective; feasibility is pruned with a bipartite matching
(Hall) test after every vertex placement.
"""

from __future__ import annotations

from dataclasses import dataclass

from .combinatorics import Multigraph, PreColoring
from .errors import ValidationError


@dataclass
class Embedding:
    vertex_map: dict[int, int]
    edge_colors: dict[int, int]


def _matching_size(candidates: list[set[int]]) -> int:
    """Maximum matching of edges to colors (Kuhn's algorithm)."""
    match: dict[int, int] = {}
    size = 0

    def try_augment(i, seen):
        for c in candidates[i]:
            if c in seen:
                continue
            seen.add(c)
            if c not in match or try_augment(match[c], seen):
                match[c] = i
                return True
        return False

    for i in range(len(candidates)):
        if try_augment(i, set()):
            size += 1
    return size


def _color_assignments(candidates: list[set[int]]):
    """Yield every system of distinct representatives, fewest options first."""
    n = len(candidates)
    order = sorted(range(n), key=lambda i: len(candidates[i]))
    chosen: dict[int, int] = {}
    used: set[int] = set()

    def rec(pos):
        if pos == n:
            yield dict(chosen)
            return
        i = order[pos]
        for c in sorted(candidates[i] - used):
            chosen[i] = c
            used.add(c)
            yield from rec(pos + 1)
            used.remove(c)
            del chosen[i]

    yield from rec(0)


class _Searcher:
    def __init__(self, H: Multigraph, psi: PreColoring, n_hosts: int, k: int,
                 edge_ok, color_support, injective: bool):
        psi.validate_for(H)
        if len(set(psi.assignments.values())) != len(psi.assignments):
            raise ValidationError("search requires a rainbow pre-coloring")
        self.H = H
        self.psi = psi
        self.n_hosts = n_hosts
        self.k = k
        self.edge_ok = edge_ok
        self.color_support = color_support
        self.injective = injective
        self.edge_list = list(H.edges)
        # place high-degree template vertices first, then stay connected
        deg = H.degrees()
        order: list[int] = []
        placed = set()
        verts = list(range(H.n_vertices))
        while len(order) < H.n_vertices:
            best = max(
                (v for v in verts if v not in placed),
                key=lambda v: (sum(1 for u, w, _ in H.edges if (u in placed) != (w in placed) and v in (u, w)), deg[v]),
            )
            order.append(best)
            placed.add(best)
        self.order = order
        self.rank = {v: i for i, v in enumerate(order)}

    def _candidates(self, assignment: dict[int, int]) -> list[set[int]] | None:
        """Per-edge candidate color sets under the partial vertex map.

        Fully placed edges get their true candidate set; edges with one
        placed endpoint get the optimistic set of colors in which that host
        vertex has any neighbor; unplaced edges are unconstrained (beyond
        the pre-coloring).  Returns None when some edge has no candidate.
        """
        cands = []
        for u, v, eid in self.edge_list:
            base = {self.psi.assignments[eid]} if eid in self.psi.assignments else set(range(1, self.k + 1))
            pu, pv = assignment.get(u), assignment.get(v)
            if pu is not None and pv is not None:
                cand = {c for c in base if self.edge_ok(c, pu, pv)}
            elif pu is not None:
                cand = {c for c in base if self.color_support(c, pu)}
            elif pv is not None:
                cand = {c for c in base if self.color_support(c, pv)}
            else:
                cand = base
            if not cand:
                return None
            cands.append(cand)
        return cands

    def run(self, count_all: bool = False, distinct: bool = False):
        found: list[Embedding] = []
        count = 0
        distinct_copies: set[frozenset] = set()
        assignment: dict[int, int] = {}

        def rec(pos):
            nonlocal count
            if pos == len(self.order):
                full = self._candidates(assignment)
                if full is None:
                    return False
                for coloring in _color_assignments(full):
                    colors = {self.edge_list[i][2]: c for i, c in coloring.items()}
                    if not count_all:
                        found.append(Embedding(dict(assignment), colors))
                        return True
                    count += 1
                    if distinct:
                        copy = frozenset(
                            (tuple(sorted((assignment[u], assignment[v]))), colors[eid])
                            for u, v, eid in self.edge_list
                        )
                        distinct_copies.add(copy)
                return False
            v = self.order[pos]
            used = set(assignment.values())
            for host in range(self.n_hosts):
                if self.injective and host in used:
                    continue
                assignment[v] = host
                cands = self._candidates(assignment)
                if cands is not None and _matching_size(cands) == len(cands):
                    if rec(pos + 1):
                        return True
                del assignment[v]
            return False

        hit = rec(0)
        if count_all:
            return len(distinct_copies) if distinct else count
        return found[0] if hit else None


def find_rainbow_map(H: Multigraph, psi: PreColoring, n_hosts: int, k: int,
                     edge_ok, color_support=None, injective: bool = True):
    """First rainbow map of (H, psi) into the host, or None.

    ``edge_ok(color, a, b)`` tells whether host pair (a, b) carries the
    color; ``color_support(color, a)`` whether a has any neighbor in that
    color (defaults to scanning hosts).
    """
    if color_support is None:
        def color_support(c, a):
            return any(edge_ok(c, a, b) for b in range(n_hosts))
    return _Searcher(H, psi, n_hosts, k, edge_ok, color_support, injective).run()


def count_rainbow_maps(H: Multigraph, psi: PreColoring, n_hosts: int, k: int,
                       edge_ok, color_support=None, injective: bool = True,
                       distinct: bool = False) -> int:
    """Number of (vertex map, injective coloring) pairs realizing (H, psi).

    With ``distinct``, counts distinct colored edge sets in the host
    instead of ordered map pairs.
    """
    if color_support is None:
        def color_support(c, a):
            return any(edge_ok(c, a, b) for b in range(n_hosts))
    searcher = _Searcher(H, psi, n_hosts, k, edge_ok, color_support, injective)
    return searcher.run(count_all=True, distinct=distinct)
