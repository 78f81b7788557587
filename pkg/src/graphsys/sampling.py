"""W-random sampling of weighted and 0/1 graph systems.

The two-stage pipeline first draws vertex positions (a part label per
vertex, by part masses) to form a weighted system, then flips one
independent categorical coin per vertex pair using the overline weights.
Vertex and pair streams are split from one seed, so (n, seed) determines
every output bit-exactly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .cutnorm import delta_box_lower, delta_box_upper, default_template_family
from .errors import ValidationError
from .graphon import GraphSystem, StepGraphonSystem, from_graph_system
from .masks import all_masks, nonempty_masks, popcount


def _seed_pair(seed):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    vertex_ss, pair_ss = ss.spawn(2)
    return np.random.default_rng(vertex_ss), np.random.default_rng(pair_ss)


@dataclass
class WeightedGraphSystem:
    """Per color subset, a symmetric n x n weight table with zero diagonal."""

    n: int
    k: int
    tables: dict[int, np.ndarray]
    part_labels: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if set(self.tables) != set(nonempty_masks(self.k)):
            raise ValidationError("tables must cover every nonempty color subset")
        for mask, tab in self.tables.items():
            tab = np.asarray(tab, dtype=float)
            if tab.shape != (self.n, self.n):
                raise ValidationError(f"table {mask}: bad shape")
            if not np.allclose(tab, tab.T, atol=1e-12):
                raise ValidationError(f"table {mask}: not symmetric")
            if tab.diagonal().any():
                raise ValidationError(f"table {mask}: diagonal must be zero")
            if tab.min() < 0 or tab.max() > 1:
                raise ValidationError(f"table {mask}: weights outside [0,1]")
            self.tables[mask] = tab

    def table(self, mask: int) -> np.ndarray:
        if mask == 0:
            out = np.ones((self.n, self.n))
            np.fill_diagonal(out, 0.0)
            return out
        return self.tables[mask]


def _overline_stack(values: np.ndarray, k: int) -> np.ndarray:
    """Moebius inversion along axis 0 of a (2^k, ...) stack of W_I values."""
    out = np.empty_like(values)
    order = sorted(all_masks(k), key=popcount, reverse=True)
    for mask in order:
        acc = values[mask].copy()
        for sup in order:
            if sup != mask and (sup & mask) == mask and popcount(sup) > popcount(mask):
                acc -= out[sup]
        out[mask] = acc
    return out


def sample_parts(n: int, W: StepGraphonSystem, seed=0) -> np.ndarray:
    """The vertex stage alone: n part labels drawn by part masses.

    Identical to the labels used by sample_weighted and sample_system
    under the same seed.
    """
    if n < 1:
        raise ValidationError("need at least one vertex")
    vertex_rng, _ = _seed_pair(seed)
    return vertex_rng.choice(W.m, size=n, p=W.sizes)


def sample_weighted(n: int, W: StepGraphonSystem, seed=0) -> WeightedGraphSystem:
    """H_S(n, W): point-sample the system onto n vertices, loops removed."""
    parts = sample_parts(n, W, seed)
    tables = {}
    for mask in nonempty_masks(W.k):
        tab = W.block(mask)[np.ix_(parts, parts)]
        np.fill_diagonal(tab, 0.0)
        tables[mask] = tab
    return WeightedGraphSystem(n, W.k, tables, part_labels=parts)


def sample_graph_system(H: WeightedGraphSystem, seed=0) -> GraphSystem:
    """G(H): one categorical coin per pair over the overline weights.

    Requires H admissible (all overline weights nonnegative); the drawn
    subset I_uv has probability overline_I(uv), so P(uv in G_I) = H_I(uv).
    """
    n, k = H.n, H.k
    _, pair_rng = _seed_pair(seed)
    iu, iv = np.triu_indices(n, 1)
    stack = np.stack([H.table(mask)[iu, iv] for mask in all_masks(k)])
    over = _overline_stack(stack, k)
    worst = over.min()
    if worst < -1e-9:
        flat = int(np.argmin(over.min(axis=0)))
        mask = int(np.argmin(over[:, flat]))
        raise ValidationError(
            f"weighted system is not admissible: overline weight {worst:.3g} "
            f"for subset mask {mask} at pair ({iu[flat]},{iv[flat]})"
        )
    over = np.clip(over, 0.0, None)
    over /= over.sum(axis=0, keepdims=True)
    cum = np.cumsum(over, axis=0)
    r = pair_rng.random(len(iu))
    drawn = np.minimum((r[None, :] >= cum).sum(axis=0), (1 << k) - 1)
    mats = []
    for c in range(1, k + 1):
        bit = ((drawn >> (c - 1)) & 1).astype(np.uint8)
        mat = np.zeros((n, n), dtype=np.uint8)
        mat[iu, iv] = bit
        mat[iv, iu] = bit
        mats.append(mat)
    return GraphSystem(n, k, mats)


def sample_system(n: int, W: StepGraphonSystem, seed=0) -> GraphSystem:
    """G(n, W): both sampling stages, without materializing n x n weights.

    Statistically identical to composing sample_weighted and
    sample_graph_system; pairs with the same part labels share one
    categorical distribution, drawn from the part-level overline tables.
    """
    if n < 1:
        raise ValidationError("need at least one vertex")
    _, pair_rng = _seed_pair(seed)
    parts = sample_parts(n, W, seed)
    stack = np.stack([np.asarray(W.block(mask), dtype=float) for mask in all_masks(W.k)])
    over = _overline_stack(stack, W.k)
    worst = over.min()
    if worst < -1e-9:
        raise ValidationError(f"system is not admissible: overline value {worst:.3g}")
    over = np.clip(over, 0.0, None)
    over /= over.sum(axis=0, keepdims=True)
    cum = np.cumsum(over, axis=0)  # (2^k, m, m)
    iu, iv = np.triu_indices(n, 1)
    r = pair_rng.random(len(iu))
    pair_cum = cum[:, parts[iu], parts[iv]]  # (2^k, pairs)
    drawn = np.minimum((r[None, :] >= pair_cum).sum(axis=0), (1 << W.k) - 1)
    mats = []
    for c in range(1, W.k + 1):
        bit = ((drawn >> (c - 1)) & 1).astype(np.uint8)
        mat = np.zeros((n, n), dtype=np.uint8)
        mat[iu, iv] = bit
        mat[iv, iu] = bit
        mats.append(mat)
    return GraphSystem(n, W.k, mats)


@dataclass
class TraceRow:
    n: int
    seed: int
    lower: float
    upper: float


def convergence_trace(W: StepGraphonSystem, n_list, seeds=10, seed0: int = 0,
                      restarts: int = 8, max_edges: int = 2) -> list[TraceRow]:
    """Sample G(n, W) for each n and seed; bound its cut distance to W.

    Uses the interval contract: counting-lemma lower bounds over templates
    with at most ``max_edges`` edges, and a coupling-search upper bound.
    """
    family = default_template_family(W.k, max_edges=max_edges)
    seed_list = list(range(seed0, seed0 + seeds)) if isinstance(seeds, int) else list(seeds)
    rows = []
    for n in n_list:
        for sd in seed_list:
            G = sample_system(n, W, seed=sd)
            U = from_graph_system(G)
            lo = delta_box_lower(W, U, family)
            hi = delta_box_upper(W, U, restarts=restarts, seed=sd)
            rows.append(TraceRow(int(n), int(sd), float(lo), float(max(lo, hi))))
    return rows


def trace_to_csv(rows: list[TraceRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(["n", "seed", "delta_lower", "delta_upper"])
    for row in rows:
        writer.writerow([row.n, row.seed, f"{row.lower:.12f}", f"{row.upper:.12f}"])
    return buf.getvalue()
