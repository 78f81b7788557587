"""Multigraphs, pre-colorings and tree structure operations.

Multigraphs are loopless, with parallel edges allowed.  Edges carry stable
integer ids so that partial edge-colorings remain well-defined under edge
deletion; parallel classes are derived from the edge list, never stored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ScaleGuardError, ValidationError


@dataclass(frozen=True)
class Multigraph:
    """A loopless multigraph on vertices 0..n-1 with identified edges.

    Edges are stored as (u, v, edge_id) triples with u <= v, ordered by
    (u, v, insertion rank).
    """

    n_vertices: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        norm = []
        seen_ids = set()
        for rank, (u, v, eid) in enumerate(self.edges):
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValidationError(f"edge {eid}: endpoint out of range")
            if u == v:
                raise ValidationError(f"edge {eid}: loops are not allowed")
            if eid in seen_ids:
                raise ValidationError(f"duplicate edge id {eid}")
            seen_ids.add(eid)
            norm.append((min(u, v), max(u, v), eid, rank))
        norm.sort(key=lambda t: (t[0], t[1], t[3]))
        object.__setattr__(self, "edges", tuple((u, v, eid) for u, v, eid, _ in norm))

    # -- basic accessors -------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_ids(self) -> tuple[int, ...]:
        return tuple(eid for _, _, eid in self.edges)

    def endpoints(self, edge_id: int) -> tuple[int, int]:
        for u, v, eid in self.edges:
            if eid == edge_id:
                return (u, v)
        raise ValidationError(f"no edge with id {edge_id}")

    def parallel_classes(self) -> dict[tuple[int, int], tuple[int, ...]]:
        """Map each adjacent pair {u,v} to the ids of its parallel edges."""
        classes: dict[tuple[int, int], list[int]] = {}
        for u, v, eid in self.edges:
            classes.setdefault((u, v), []).append(eid)
        return {pair: tuple(ids) for pair, ids in classes.items()}

    def degrees(self) -> list[int]:
        deg = [0] * self.n_vertices
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def neighbors(self, v: int) -> set[int]:
        out = set()
        for a, b, _ in self.edges:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return out

    @property
    def is_simple(self) -> bool:
        return all(len(ids) == 1 for ids in self.parallel_classes().values())

    def is_connected(self) -> bool:
        if self.n_vertices == 0:
            return True
        seen = {0}
        stack = [0]
        adj = {v: self.neighbors(v) for v in range(self.n_vertices)}
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n_vertices

    def is_tree(self) -> bool:
        return (
            self.is_simple
            and self.n_edges == self.n_vertices - 1
            and self.is_connected()
        )

    def is_star(self) -> bool:
        """A star K_{1,t}, t >= 1; a single edge counts as K_{1,1}."""
        if not self.is_tree() or self.n_edges < 1:
            return False
        deg = self.degrees()
        return sum(1 for d in deg if d > 1) <= 1


@dataclass
class PreColoring:
    """A partial edge-coloring, injective on each parallel class.

    ``rainbow_flag`` marks colorings meant to be globally injective; it is
    validated against the assignments in :func:`validate_for`.
    """

    assignments: dict[int, int] = field(default_factory=dict)
    k: int = 1
    rainbow_flag: bool = True

    @classmethod
    def empty(cls, k: int) -> "PreColoring":
        return cls({}, k, True)

    @classmethod
    def total(cls, H: Multigraph, colors: dict[int, int], k: int, rainbow: bool = False) -> "PreColoring":
        psi = cls(dict(colors), k, rainbow)
        if set(colors) != set(H.edge_ids()):
            raise ValidationError("total coloring must assign every edge")
        psi.validate_for(H)
        return psi

    @property
    def domain(self) -> set[int]:
        return set(self.assignments)

    def is_total_for(self, H: Multigraph) -> bool:
        return self.domain == set(H.edge_ids())

    def validate_for(self, H: Multigraph) -> None:
        ids = set(H.edge_ids())
        for eid, c in self.assignments.items():
            if eid not in ids:
                raise ValidationError(f"colored edge id {eid} not in graph")
            if not (1 <= c <= self.k):
                raise ValidationError(f"color {c} outside 1..{self.k}")
        for pair, class_ids in H.parallel_classes().items():
            used = [self.assignments[e] for e in class_ids if e in self.assignments]
            if len(used) != len(set(used)):
                raise ValidationError(f"colors repeat on parallel class {pair}")
        if self.rainbow_flag:
            used = list(self.assignments.values())
            if len(used) != len(set(used)):
                raise ValidationError("rainbow pre-coloring repeats a color")

    def pair_mask(self, H: Multigraph, u: int, v: int) -> int:
        """Bitmask of colors on edges between u and v (requires all colored)."""
        pair = (min(u, v), max(u, v))
        mask = 0
        for eid in H.parallel_classes().get(pair, ()):
            mask |= 1 << (self.assignments[eid] - 1)
        return mask


# -- builders -----------------------------------------------------------


def multigraph_from_pairs(n: int, pairs) -> Multigraph:
    """Edges from (u, v) pairs; ids are assigned by position."""
    return Multigraph(n, tuple((u, v, i) for i, (u, v) in enumerate(pairs)))


def path_graph(length: int) -> Multigraph:
    """The path with ``length`` edges on vertices 0..length."""
    return multigraph_from_pairs(length + 1, [(i, i + 1) for i in range(length)])


def star_graph(leaves: int) -> Multigraph:
    """K_{1,leaves} with center 0."""
    return multigraph_from_pairs(leaves + 1, [(0, i + 1) for i in range(leaves)])


def parallel_edges(count: int) -> Multigraph:
    """Two vertices joined by ``count`` parallel edges."""
    return multigraph_from_pairs(2, [(0, 1)] * count)


# -- operations ----------------------------------------------------------


def simplify(H: Multigraph) -> Multigraph:
    """Collapse each parallel class to a single edge; vertex set unchanged."""
    pairs = sorted(H.parallel_classes())
    return multigraph_from_pairs(H.n_vertices, pairs)


def iter_rainbow_extensions(H: Multigraph, psi: PreColoring, k: int):
    """Yield every total injective coloring of E(H) into 1..k extending psi.

    Yields dicts edge_id -> color.  Empty when |E(H)| > k.
    """
    psi.validate_for(H)
    if dict(psi.assignments) and len(set(psi.assignments.values())) != len(psi.assignments):
        raise ValidationError("extensions require a rainbow pre-coloring")
    free_edges = [eid for eid in H.edge_ids() if eid not in psi.assignments]
    used = set(psi.assignments.values())
    free_colors = [c for c in range(1, k + 1) if c not in used]
    if len(free_edges) > len(free_colors):
        return

    def rec(idx, remaining, current):
        if idx == len(free_edges):
            yield dict(current)
            return
        eid = free_edges[idx]
        for c in remaining:
            current[eid] = c
            yield from rec(idx + 1, remaining - {c}, current)
            del current[eid]

    base = dict(psi.assignments)
    yield from rec(0, set(free_colors), base)


def enumerate_rainbow_extensions(H: Multigraph, psi: PreColoring, k: int) -> list[dict[int, int]]:
    return list(iter_rainbow_extensions(H, psi, k))


def find_leaf_stars(T: Multigraph) -> list[tuple[int, int, tuple[int, ...]]]:
    """All (center, anchor, leaves) leaf-stars of a tree that is not a star.

    A leaf-star sits at a center v with anchor u in N(v): every neighbor of
    v other than u is a leaf of T.  Stars are rejected; they are handled by
    a dedicated density argument elsewhere.
    """
    if not T.is_tree():
        raise ValidationError("leaf-star search requires a tree")
    if T.is_star():
        raise ValidationError("leaf-star search is undefined for stars")
    deg = T.degrees()
    out = []
    for v in range(T.n_vertices):
        if deg[v] < 2:
            continue
        nbrs = sorted(T.neighbors(v))
        for u in nbrs:
            others = [w for w in nbrs if w != u]
            if others and all(deg[w] == 1 for w in others):
                out.append((v, u, tuple(others)))
    return out


@dataclass(frozen=True)
class RootedComponent:
    """A tree component with a marked root and the old->new vertex map."""

    graph: Multigraph
    root: int
    vertex_map: dict[int, int]


def split_tree_at_edge(T: Multigraph, edge_id: int) -> tuple[RootedComponent, RootedComponent]:
    """Remove edge uv from a tree; return the components rooted at u and v."""
    if not T.is_tree():
        raise ValidationError("split requires a tree")
    ids = set(T.edge_ids())
    if edge_id not in ids:
        raise ValidationError(f"edge id {edge_id} not in tree")
    u0, v0 = T.endpoints(edge_id)
    remaining = [(u, v, eid) for u, v, eid in T.edges if eid != edge_id]

    def component(start):
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for a, b, _ in remaining:
                for y, z in ((a, b), (b, a)):
                    if y == x and z not in seen:
                        seen.add(z)
                        stack.append(z)
        verts = sorted(seen)
        vmap = {old: new for new, old in enumerate(verts)}
        comp_edges = tuple(
            (vmap[a], vmap[b], eid) for a, b, eid in remaining if a in seen
        )
        return RootedComponent(Multigraph(len(verts), comp_edges), vmap[start], vmap)

    return component(u0), component(v0)


def chromatic_number(G: Multigraph) -> int:
    """Chromatic number of the simplification, by branch and bound."""
    if G.n_vertices > 12:
        raise ScaleGuardError("chromatic_number is limited to 12 vertices")
    S = simplify(G)
    if S.n_edges == 0:
        return 1 if S.n_vertices else 0
    adj = [S.neighbors(v) for v in range(S.n_vertices)]
    order = sorted(range(S.n_vertices), key=lambda v: -len(adj[v]))

    def colorable(t: int) -> bool:
        assign: dict[int, int] = {}

        def rec(i):
            if i == len(order):
                return True
            v = order[i]
            used = {assign[w] for w in adj[v] if w in assign}
            # symmetry break: never open more than one fresh color
            fresh_cap = min(t, (max(assign.values()) + 2) if assign else 1)
            for c in range(1, fresh_cap + 1):
                if c not in used:
                    assign[v] = c
                    if rec(i + 1):
                        return True
                    del assign[v]
            return False

        return rec(0)

    for t in range(2, S.n_vertices + 1):
        if colorable(t):
            return t
    return S.n_vertices


def all_trees(n: int) -> list[Multigraph]:
    """All trees on n vertices up to isomorphism, by leaf extension.

    Grows each (n-1)-vertex representative by one pendant vertex and
    deduplicates by a canonical rooted-at-center encoding.
    """
    if n > 12:
        raise ScaleGuardError("all_trees is limited to 12 vertices")
    if n < 1:
        return []
    level = {"()": []}  # canonical key -> edge pair list, starting from K1
    for size in range(2, n + 1):
        nxt: dict[str, list[tuple[int, int]]] = {}
        for pairs in level.values():
            for attach in range(size - 1):
                grown = pairs + [(attach, size - 1)]
                key = _tree_canonical_key(size, grown)
                if key not in nxt:
                    nxt[key] = grown
        level = nxt
    return [multigraph_from_pairs(n, pairs) for pairs in level.values()]


def _tree_canonical_key(n: int, pairs) -> str:
    """AHU-style canonical string of an unrooted tree given as an edge list."""
    adj = {v: [] for v in range(n)}
    for u, v in pairs:
        adj[u].append(v)
        adj[v].append(u)

    def rooted_key(root, parent):
        subs = sorted(rooted_key(w, root) for w in adj[root] if w != parent)
        return "(" + "".join(subs) + ")"

    # root at the (1- or 2-element) tree center
    layers = [v for v in range(n) if len(adj[v]) <= 1]
    deg = {v: len(adj[v]) for v in range(n)}
    removed = set(layers)
    current = layers
    while len(removed) < n:
        nxt = []
        for v in current:
            for w in adj[v]:
                if w not in removed:
                    deg[w] -= 1
                    if deg[w] <= 1:
                        nxt.append(w)
                        removed.add(w)
        if not nxt:
            break
        current = nxt
    centers = current if current else [0]
    return min(rooted_key(c, -1) for c in centers)


# -- serialization --------------------------------------------------------


def multigraph_to_json(H: Multigraph, psi: PreColoring | None = None) -> str:
    doc = {
        "n": H.n_vertices,
        "edges": [{"u": u, "v": v, "id": eid} for u, v, eid in H.edges],
    }
    if psi is not None:
        doc["coloring"] = {str(eid): c for eid, c in sorted(psi.assignments.items())}
        doc["k"] = psi.k
    return json.dumps(doc, indent=2)


def multigraph_from_json(text: str) -> tuple[Multigraph, PreColoring | None]:
    try:
        doc = json.loads(text)
        H = Multigraph(int(doc["n"]), tuple((e["u"], e["v"], e["id"]) for e in doc["edges"]))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"bad multigraph JSON: {exc}") from exc
    psi = None
    if "coloring" in doc or "k" in doc:
        k = int(doc.get("k", 1))
        assignments = {int(eid): int(c) for eid, c in doc.get("coloring", {}).items()}
        psi = PreColoring(assignments, k, rainbow_flag=True)
        psi.validate_for(H)
    return H, psi


def multigraph_to_edgelist(H: Multigraph, psi: PreColoring | None = None, k: int | None = None) -> str:
    """Text format: header "n k", then one "u v [color]" line per edge."""
    k = k if k is not None else (psi.k if psi else 1)
    lines = [f"{H.n_vertices} {k}"]
    coloring = psi.assignments if psi else {}
    for u, v, eid in H.edges:
        if eid in coloring:
            lines.append(f"{u} {v} {coloring[eid]}")
        else:
            lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


def multigraph_from_edgelist(text: str) -> tuple[Multigraph, PreColoring]:
    rows = [line.split() for line in text.strip().splitlines() if line.strip()]
    if not rows or len(rows[0]) != 2:
        raise ValidationError("edge-list text needs a 'n k' header line")
    n, k = int(rows[0][0]), int(rows[0][1])
    pairs = []
    coloring = {}
    for i, row in enumerate(rows[1:]):
        if len(row) not in (2, 3):
            raise ValidationError(f"bad edge line: {' '.join(row)}")
        pairs.append((int(row[0]), int(row[1])))
        if len(row) == 3:
            coloring[i] = int(row[2])
    H = multigraph_from_pairs(n, pairs)
    psi = PreColoring(coloring, k, rainbow_flag=True)
    psi.validate_for(H)
    return H, psi
