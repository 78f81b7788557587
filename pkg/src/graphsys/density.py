"""Exact rainbow, colored, rooted and induced densities on step systems.

Colored densities are finite sums over part assignments.  Templates whose
simplification is a forest are evaluated by leaf-to-root dynamic
programming (cost m^2 per edge); everything else contracts the full
assignment sum, guarded by a scale limit.  Rainbow densities sum lazily
over injective color extensions with compensated accumulation.
"""

from __future__ import annotations

import math
import string
import warnings
from dataclasses import dataclass

import numpy as np

from .combinatorics import Multigraph, PreColoring, iter_rainbow_extensions, simplify
from .errors import ScaleGuardError, ValidationError
from .graphon import GraphSystem, StepGraphonSystem, moebius_overline
from .homsearch import count_rainbow_maps
from .masks import mask_of


@dataclass
class DensityRequest:
    template: Multigraph
    psi: PreColoring
    system: StepGraphonSystem
    mode: str = "rainbow"  # rainbow | colored | induced

    def evaluate(self) -> float:
        if self.mode == "rainbow":
            return rainbow_density(self.template, self.psi, self.system)
        if self.mode == "colored":
            return colored_density(self.template, self.psi.assignments, self.system)
        if self.mode == "induced":
            return induced_density(self.template, self.psi.assignments, self.system)
        raise ValidationError(f"unknown density mode {self.mode!r}")


def _pair_masks(H: Multigraph, coloring: dict[int, int]) -> dict[tuple[int, int], int]:
    """Color subset on each adjacent pair; injective per class by validation."""
    masks: dict[tuple[int, int], int] = {}
    for pair, ids in H.parallel_classes().items():
        colors = [coloring[eid] for eid in ids]
        if len(set(colors)) != len(colors):
            raise ValidationError(f"coloring repeats on parallel class {pair}")
        masks[pair] = mask_of(colors)
    return masks


def _forest_components(S: Multigraph) -> list[list[int]] | None:
    """Connected components if the simple graph is a forest, else None."""
    if S.n_edges > S.n_vertices:
        return None
    parent = list(range(S.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _ in S.edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return None
        parent[ru] = rv
    comps: dict[int, list[int]] = {}
    for v in range(S.n_vertices):
        comps.setdefault(find(v), []).append(v)
    return list(comps.values())


def _tree_dp(vertices: list[int], pair_masks, system: StepGraphonSystem, root: int) -> np.ndarray:
    """Per-part value vector of the rooted component density at ``root``."""
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in vertices}
    for (u, v), mask in pair_masks.items():
        if u in adj:
            adj[u].append((v, mask))
            adj[v].append((u, mask))
    sizes = system.sizes
    order = []
    seen = {root}
    stack = [(root, -1)]
    while stack:
        v, parent = stack.pop()
        order.append((v, parent))
        for w, _ in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append((w, v))
    children: dict[int, list[tuple[int, int]]] = {v: [] for v in vertices}
    for v, parent in order:
        if parent != -1:
            children[parent].append((v, pair_masks[(min(v, parent), max(v, parent))]))
    value: dict[int, np.ndarray] = {}
    for v, _ in reversed(order):
        acc = np.ones(system.m)
        for child, mask in children[v]:
            acc = acc * (system.block(mask) @ (sizes * value[child]))
        value[v] = acc
    return value[root]


def colored_density(H: Multigraph, coloring: dict[int, int], system: StepGraphonSystem) -> float:
    """t* of a single total coloring: the decorated homomorphism integral."""
    if set(coloring) != set(H.edge_ids()):
        raise ValidationError("colored density needs a total coloring")
    for c in coloring.values():
        if not (1 <= c <= system.k):
            raise ValidationError(f"color {c} outside the system's 1..{system.k}")
    pair_masks = _pair_masks(H, coloring)
    S = simplify(H)
    comps = _forest_components(S)
    if comps is not None:
        total = 1.0
        for comp in comps:
            root = comp[0]
            vec = _tree_dp(comp, {p: m for p, m in pair_masks.items() if p[0] in comp}, system, root)
            total *= float(np.dot(system.sizes, vec))
        return total
    return _dense_density(H.n_vertices, pair_masks, system)


def _dense_density(t: int, pair_masks, system: StepGraphonSystem,
                   tables: dict[tuple[int, int], np.ndarray] | None = None) -> float:
    """Contract the full part-assignment sum over the given pair tables."""
    m = system.m
    if t > 8:
        raise ScaleGuardError("dense density limited to 8 template vertices")
    if t > 4 and m > 6:
        raise ScaleGuardError("dense density limited to 6 parts beyond 4 vertices")
    if t >= 3 and m > 600:
        raise ScaleGuardError("dense density limited to 600 parts for cyclic templates")
    letters = string.ascii_lowercase
    terms = []
    ops = []
    for (u, v), mask in sorted(pair_masks.items()):
        terms.append(letters[u] + letters[v])
        ops.append(tables[(u, v)] if tables is not None else system.block(mask))
    for v in range(t):
        terms.append(letters[v])
        ops.append(system.sizes)
    return float(np.einsum(",".join(terms) + "->", *ops, optimize=True))


def rainbow_density(H: Multigraph, psi: PreColoring, system: StepGraphonSystem) -> float:
    """Sum of colored densities over all injective extensions of psi."""
    psi.validate_for(H)
    if H.n_edges > system.k:
        warnings.warn("template has more edges than colors; rainbow density is 0", stacklevel=2)
        return 0.0
    return math.fsum(
        colored_density(H, ext, system) for ext in iter_rainbow_extensions(H, psi, system.k)
    )


def rooted_density(T: Multigraph, root: int, psi: PreColoring, system: StepGraphonSystem) -> np.ndarray:
    """Per-part rooted density vector of a tree at ``root``.

    Rainbow pre-colorings are summed over their injective extensions.
    """
    if not T.is_tree():
        raise ValidationError("rooted density requires a tree")
    if not (0 <= root < T.n_vertices):
        raise ValidationError("root out of range")
    psi.validate_for(T)
    vertices = list(range(T.n_vertices))
    total = np.zeros(system.m)
    for ext in iter_rainbow_extensions(T, psi, system.k):
        total = total + _tree_dp(vertices, _pair_masks(T, ext), system, root)
    return total


def edge_density(system: StepGraphonSystem, color: int) -> float:
    """t_{K2} of the color's graphon: the size-weighted block average."""
    s = system.sizes
    return float(s @ system.block(1 << (color - 1)) @ s)


def degree_profile(system: StepGraphonSystem, color: int) -> np.ndarray:
    """Per-part degree: the size-weighted row sums of the color's table."""
    return system.block(1 << (color - 1)) @ system.sizes


def gamma(system: StepGraphonSystem, color: int) -> float:
    """1 - sqrt(edge density); bounds the mass of zero-degree points."""
    return 1.0 - math.sqrt(edge_density(system, color))


def induced_density(H: Multigraph, coloring: dict[int, int], system: StepGraphonSystem) -> float:
    """Product over all vertex pairs of overline tables, integrated.

    Non-adjacent pairs contribute the empty-subset table.
    """
    if set(coloring) != set(H.edge_ids()):
        raise ValidationError("induced density needs a total coloring")
    t = H.n_vertices
    over = moebius_overline(system)
    adjacent = _pair_masks(H, coloring)
    tables = {}
    pair_masks = {}
    for u in range(t):
        for v in range(u + 1, t):
            mask = adjacent.get((u, v), 0)
            pair_masks[(u, v)] = mask
            tables[(u, v)] = over.tables[mask]
    return _dense_density(t, pair_masks, system, tables=tables)


def count_rainbow_copies(G: GraphSystem, H: Multigraph, psi: PreColoring, distinct: bool = False) -> int:
    """Rainbow copies of (H, psi) in a graph system.

    Counts ordered (injective vertex map, injective coloring) pairs; with
    ``distinct``, counts distinct colored edge sets instead.
    """
    if H.n_vertices > 6 or G.n > 60:
        raise ScaleGuardError("copy counting limited to 6 template vertices and 60 hosts")

    def edge_ok(c, a, b):
        return a != b and bool(G.adjacency[c - 1][a, b])

    def support(c, a):
        return bool(G.adjacency[c - 1][a].any())

    return count_rainbow_maps(H, psi, G.n, G.k, edge_ok, support, injective=True, distinct=distinct)
