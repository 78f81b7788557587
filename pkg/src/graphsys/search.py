"""Rainbow subgraph detection, extremal constructions and tiny exact numbers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement, permutations, product

import numpy as np

from .combinatorics import Multigraph, PreColoring
from .errors import ScaleGuardError, ValidationError
from .graphon import GraphSystem, StepGraphonSystem, span
from .homsearch import Embedding, find_rainbow_map
from .masks import nonempty_masks, popcount


def find_rainbow_copy(G: GraphSystem, H: Multigraph, psi: PreColoring) -> Embedding | None:
    """One witness (vertex map, edge colors) of (H, psi) in G, or None."""
    if H.n_vertices > 10:
        raise ScaleGuardError("rainbow copy search is limited to 10 template vertices")

    def edge_ok(c, a, b):
        return a != b and bool(G.adjacency[c - 1][a, b])

    def support(c, a):
        return bool(G.adjacency[c - 1][a].any())

    return find_rainbow_map(H, psi, G.n, G.k, edge_ok, support, injective=True)


def construction_thm14(n: int, alphas) -> GraphSystem:
    """Cover [n] by sets V_i of size ceil((1 - sqrt(a_i)) n); G_i is the
    complete graph off V_i.  Rainbow-star-free since every vertex is
    isolated in some color.  Requires sum (1 - sqrt(a_i)) >= 1.
    """
    alphas = [float(a) for a in alphas]
    k = len(alphas)
    if n < k:
        raise ValidationError("need n >= k")
    if any(a < 0 or a > 1 for a in alphas):
        raise ValidationError("alphas must lie in [0,1]")
    deficits = [1.0 - math.sqrt(a) for a in alphas]
    if sum(deficits) < 1.0 - 1e-12:
        raise ValidationError("construction requires sum(1 - sqrt(alpha_i)) >= 1")
    covers = []
    start = 0
    for d in deficits:
        size = math.ceil(d * n)
        covers.append({(start + j) % n for j in range(size)})
        start += size
    # the last interval may leave a gap when rounding is unlucky; patch it
    missing = set(range(n)) - set().union(*covers) if covers else set(range(n))
    if missing:
        covers[-1] |= missing
    mats = []
    for cover in covers:
        keep = np.array([v not in cover for v in range(n)])
        mat = np.outer(keep, keep).astype(np.uint8)
        np.fill_diagonal(mat, 0)
        mats.append(mat)
    return GraphSystem(n, k, mats)


def construction_lemma72(k: int) -> StepGraphonSystem:
    """k equal parts; color i is complete off part i.  Star-free with
    per-color edge density ((k-1)/k)^2."""
    if k < 1:
        raise ValidationError("need k >= 1")
    sizes = np.full(k, 1.0 / k)
    factors = []
    for i in range(k):
        keep = np.ones(k)
        keep[i] = 0.0
        factors.append(np.outer(keep, keep))
    return span(sizes, factors)


def construction_bipartite(k: int, l: int) -> StepGraphonSystem:
    """One-part system with W_I = C(k-|I|, l-1-|I|) / C(k, l-1) for |I| < l
    and 0 otherwise; admissible, with no l parallel edges and per-color
    density (l-1)/k."""
    if not (1 <= l <= k):
        raise ValidationError("need 1 <= l <= k")
    denom = math.comb(k, l - 1)
    blocks = {}
    for mask in nonempty_masks(k):
        size = popcount(mask)
        value = math.comb(k - size, l - 1 - size) / denom if size < l else 0.0
        blocks[mask] = np.array([[value]])
    return StepGraphonSystem(k, np.array([1.0]), blocks)


@dataclass
class ExtremalResult:
    value: int
    witness: GraphSystem
    exact: bool


def _freeness(G: GraphSystem, H: Multigraph, psi: PreColoring) -> bool:
    return find_rainbow_copy(G, H, psi) is None


def _pair_index(n: int):
    return list(combinations(range(n), 2))


def _graph_from_mask(n: int, pairs, mask: int) -> np.ndarray:
    mat = np.zeros((n, n), dtype=np.uint8)
    for idx, (u, v) in enumerate(pairs):
        if (mask >> idx) & 1:
            mat[u, v] = mat[v, u] = 1
    return mat


def _mask_permutation_luts(n: int, pairs) -> np.ndarray:
    """For each vertex permutation, the lookup table sending an edge-mask
    to its permuted edge-mask; shape (n!, 2^pairs)."""
    pair_pos = {pair: i for i, pair in enumerate(pairs)}
    n_masks = 1 << len(pairs)
    luts = []
    for perm in permutations(range(n)):
        bit_map = np.empty(len(pairs), dtype=np.int64)
        for idx, (u, v) in enumerate(pairs):
            pu, pv = perm[u], perm[v]
            bit_map[idx] = pair_pos[(min(pu, pv), max(pu, pv))]
        masks = np.arange(n_masks, dtype=np.int64)
        lut = np.zeros(n_masks, dtype=np.int64)
        for idx in range(len(pairs)):
            lut |= ((masks >> idx) & 1) << bit_map[idx]
        luts.append(lut)
    return np.stack(luts)


def _canonical_filter(candidates: np.ndarray, luts: np.ndarray, color_exchangeable: bool) -> np.ndarray:
    """Boolean mask of candidates that are minimal in their orbit.

    ``candidates`` has shape (N, k) with one edge-mask per color; the orbit
    is vertex permutations times (optionally) color permutations.
    """
    n_pairs_bits = int(luts.shape[1]).bit_length() - 1
    k = candidates.shape[1]
    weights = (np.int64(1) << (n_pairs_bits * np.arange(k - 1, -1, -1, dtype=np.int64)))

    def pack(arr):
        return arr @ weights

    own = pack(np.sort(candidates, axis=1) if color_exchangeable else candidates)
    minimum = own.copy()
    for lut in luts:
        moved = lut[candidates]
        if color_exchangeable:
            moved = np.sort(moved, axis=1)
        np.minimum(minimum, pack(moved), out=minimum)
    return minimum == own


def exact_extremal_number(n: int, k: int, H: Multigraph, psi: PreColoring | None = None,
                          allow_random: bool = False, seed: int = 0,
                          iterations: int = 2000) -> ExtremalResult:
    """Max over rainbow-(H, psi)-free systems of min_i |E(G_i)|.

    Exhaustive (exact) when k * C(n,2) <= 24, enumerating systems up to
    vertex permutations and, for an empty pre-coloring, color
    permutations.  Otherwise requires ``allow_random`` opt-in and returns a
    local-search lower bound.
    """
    psi = psi if psi is not None else PreColoring.empty(k)
    pairs = _pair_index(n)
    bits = k * len(pairs)
    if bits > 24 and not allow_random:
        raise ScaleGuardError(
            f"{bits} edge slots exceed the exhaustive limit of 24; "
            "pass allow_random=True for a lower bound"
        )
    if bits <= 24:
        color_free = len(psi.assignments) == 0
        n_graphs = 1 << len(pairs)
        if color_free:
            candidates = np.array(
                list(combinations_with_replacement(range(n_graphs), k)), dtype=np.int64
            )
        else:
            grids = np.meshgrid(*([np.arange(n_graphs, dtype=np.int64)] * k), indexing="ij")
            candidates = np.stack([g.ravel() for g in grids], axis=1)
        luts = _mask_permutation_luts(n, pairs)
        keep = _canonical_filter(candidates, luts, color_free)
        candidates = candidates[keep]
        # check high-value systems first and stop at the first free one
        popcounts = np.zeros(n_graphs, dtype=np.int64)
        for idx in range(len(pairs)):
            popcounts += (np.arange(n_graphs) >> idx) & 1
        values = popcounts[candidates].min(axis=1)
        order = np.argsort(-values, kind="stable")
        best_val, best_sys = -1, None
        for row in order:
            masks = candidates[row]
            value = int(values[row])
            if value <= best_val:
                break
            G = GraphSystem(n, k, [_graph_from_mask(n, pairs, int(mask)) for mask in masks])
            if _freeness(G, H, psi):
                best_val, best_sys = value, G
        return ExtremalResult(best_val, best_sys, exact=True)
    # randomized lower bound: greedy edge additions with restarts
    rng = np.random.default_rng(seed)
    best_val, best_sys = -1, None
    for _ in range(max(1, iterations // 100)):
        mats = [np.zeros((n, n), dtype=np.uint8) for _ in range(k)]
        G = GraphSystem(n, k, mats)
        for _ in range(iterations):
            counts = [G.edge_count(i + 1) for i in range(k)]
            color = int(np.argmin(counts))
            u, v = rng.integers(0, n, 2)
            if u == v or G.adjacency[color][u, v]:
                continue
            G.adjacency[color][u, v] = G.adjacency[color][v, u] = 1
            if not _freeness(G, H, psi):
                G.adjacency[color][u, v] = G.adjacency[color][v, u] = 0
        value = min(G.edge_count(i + 1) for i in range(k))
        if value > best_val:
            best_val, best_sys = value, G
    return ExtremalResult(best_val, best_sys, exact=False)


def color_homomorphic_images(H: Multigraph, psi: PreColoring, min_vertices: int = 1):
    """Edge-preserved homomorphic images of (H, psi) as vertex quotients.

    Enumerates set partitions of V(H) that keep the graph loopless and the
    pre-coloring injective on merged parallel classes; completeness is only
    up to the (caller-visible) quotient family, and images are not
    deduplicated by isomorphism.
    """
    psi.validate_for(H)
    n = H.n_vertices
    if n > 8:
        raise ScaleGuardError("quotient enumeration is limited to 8 vertices")

    def partitions(elements):
        if not elements:
            yield []
            return
        first, rest = elements[0], elements[1:]
        for part in partitions(rest):
            for i in range(len(part)):
                yield part[:i] + [[first] + part[i]] + part[i + 1:]
            yield [[first]] + part

    out = []
    for part in partitions(list(range(n))):
        if len(part) < min_vertices:
            continue
        label = {}
        for idx, cell in enumerate(part):
            for v in cell:
                label[v] = idx
        ok = True
        edges = []
        for u, v, eid in H.edges:
            lu, lv = label[u], label[v]
            if lu == lv:
                ok = False
                break
            edges.append((lu, lv, eid))
        if not ok:
            continue
        Hq = Multigraph(len(part), tuple(edges))
        try:
            psi_q = PreColoring(dict(psi.assignments), psi.k, psi.rainbow_flag)
            psi_q.validate_for(Hq)
        except ValidationError:
            continue
        out.append((Hq, psi_q))
    return out
