"""Weak regularity partitions and equitable refinement.

The partitioner is the constructive Frieze-Kannan loop: find a color and a
vertex-set pair witnessing discrepancy against the current stepped system,
split every cell by the witness 4 ways, repeat.  The certificate is a
two-sided cut-norm interval for the residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cutnorm import cut_norm_exact, cut_norm_heuristic, cut_norm_upper
from .errors import ValidationError
from .graphon import GraphSystem, StepGraphonSystem, subdivide
from .masks import nonempty_masks


@dataclass
class RegularityResult:
    partition: list[list[int]]
    lower: float
    upper: float
    rounds: list[float] = field(default_factory=list)  # found discrepancy per round


def _stepped_tables(G: GraphSystem, partition: list[list[int]]):
    """Residual tables G_I minus its partition average, per color subset."""
    n = G.n
    cell_of = np.empty(n, dtype=int)
    for idx, cell in enumerate(partition):
        cell_of[np.asarray(cell, dtype=int)] = idx
    counts = np.bincount(cell_of, minlength=len(partition)).astype(float)
    weight = np.outer(counts, counts)
    residuals = {}
    indicator = np.zeros((len(partition), n))
    indicator[cell_of, np.arange(n)] = 1.0
    for mask in nonempty_masks(G.k):
        A = G.intersection(mask).astype(float)
        sums = indicator @ A @ indicator.T
        with np.errstate(invalid="ignore", divide="ignore"):
            means = np.where(weight > 0, sums / np.where(weight > 0, weight, 1.0), 0.0)
        residuals[mask] = A - means[np.ix_(cell_of, cell_of)]
    return residuals


def weak_regularity_partition(G: GraphSystem, max_parts: int, seed: int = 0,
                              tol: float = 0.05, restarts: int = 6) -> RegularityResult:
    """Frieze-Kannan refinement until max_parts or discrepancy < tol.

    Returns the partition with a certified cut-norm interval for
    d_box(G, stepped(G)).
    """
    if max_parts < 1:
        raise ValidationError("max_parts must be at least 1")
    n = G.n
    sizes = np.full(n, 1.0 / n)
    partition: list[list[int]] = [list(range(n))]
    rounds: list[float] = []
    cap = max(1, math.ceil(math.log2(max(max_parts, 2)))) * G.k
    rng = np.random.default_rng(seed)
    for round_idx in range(cap):
        residuals = _stepped_tables(G, partition)
        best = None
        for mask, table in residuals.items():
            res = cut_norm_heuristic([table], sizes, restarts=restarts,
                                     seed=int(rng.integers(0, 2**31)))
            if best is None or res.value > best[0]:
                best = (res.value, mask, res.S, res.T)
        disc, _, S, T = best
        rounds.append(float(disc))
        if disc < tol:
            break
        S_set, T_set = set(S), set(T)
        refined: list[list[int]] = []
        for cell in partition:
            buckets: dict[tuple[bool, bool], list[int]] = {}
            for v in cell:
                buckets.setdefault((v in S_set, v in T_set), []).append(v)
            refined.extend(buckets.values())
        if len(refined) > max_parts:
            break
        if len(refined) == len(partition):
            break
        partition = refined
    residuals = _stepped_tables(G, partition)
    tables = [residuals[mask] for mask in nonempty_masks(G.k)]
    lo = cut_norm_heuristic(tables, sizes, restarts=max(restarts, 8), seed=seed).value
    hi = max(lo, cut_norm_upper(tables, sizes))
    if n <= 16 and len(tables) <= 10:
        exact = cut_norm_exact(tables, sizes).value
        lo = hi = exact
    return RegularityResult(partition, float(lo), float(hi), rounds)


def stepped_system(G: GraphSystem, partition: list[list[int]]) -> StepGraphonSystem:
    """The step system averaging G over the vertex partition."""
    n = G.n
    cell_of = np.empty(n, dtype=int)
    for idx, cell in enumerate(partition):
        cell_of[np.asarray(cell, dtype=int)] = idx
    counts = np.bincount(cell_of, minlength=len(partition)).astype(float)
    weight = np.outer(counts, counts)
    indicator = np.zeros((len(partition), n))
    indicator[cell_of, np.arange(n)] = 1.0
    blocks = {}
    for mask in nonempty_masks(G.k):
        A = G.intersection(mask).astype(float)
        sums = indicator @ A @ indicator.T
        with np.errstate(invalid="ignore", divide="ignore"):
            blocks[mask] = np.where(weight > 0, sums / np.where(weight > 0, weight, 1.0), 0.0)
    return StepGraphonSystem(G.k, counts / counts.sum(), blocks)


def weak_regularity_bound(l2_norms, m1: int, m2: int) -> float:
    """Target residual bound for refining an m1-part partition to m2 parts:
    sqrt(s) * 8 * sum of L2 norms / sqrt(log(m2/m1)) for an s-table tuple."""
    l2_norms = list(l2_norms)
    if m2 <= m1:
        raise ValidationError("m2 must exceed m1")
    return math.sqrt(len(l2_norms)) * 8.0 * sum(l2_norms) / math.sqrt(math.log(m2 / m1))


def system_l2_norms(G: GraphSystem) -> list[float]:
    """L2 norms of the intersection graphons, one per nonempty color subset."""
    out = []
    for mask in nonempty_masks(G.k):
        A = G.intersection(mask).astype(float)
        out.append(math.sqrt(float((A**2).mean())))
    return out


@dataclass
class EquitablePartition:
    """m' equal-mass cells, each a list of (original part, mass) pieces."""

    cells: list[list[tuple[int, float]]]

    @property
    def m(self) -> int:
        return len(self.cells)

    def pieces(self) -> list[tuple[int, float]]:
        """All pieces in cell order; subdividing both the original partition
        and this one."""
        return [piece for cell in self.cells for piece in cell]

    def piece_cells(self) -> list[int]:
        return [idx for idx, cell in enumerate(self.cells) for _ in cell]


def equitable_refine(masses, m_prime: int) -> EquitablePartition:
    """Split-and-pool an arbitrary mass partition into m' equal cells.

    Each part is cut into full cells of mass 1/m' plus at most one
    leftover; leftovers are pooled in order and cut into the remaining
    cells, which may therefore cross original parts.
    """
    masses = [float(x) for x in masses]
    if m_prime <= len(masses):
        raise ValidationError("m' must exceed the current part count")
    if abs(sum(masses) - 1.0) > 1e-9:
        raise ValidationError("masses must sum to 1")
    unit = 1.0 / m_prime
    cells: list[list[tuple[int, float]]] = []
    leftovers: list[tuple[int, float]] = []
    for part, mass in enumerate(masses):
        full = int(math.floor(mass / unit + 1e-12))
        for _ in range(full):
            cells.append([(part, unit)])
        rem = mass - full * unit
        if rem > 1e-12:
            leftovers.append((part, rem))
    current: list[tuple[int, float]] = []
    acc = 0.0
    for part, rem in leftovers:
        while rem > 1e-12:
            take = min(rem, unit - acc)
            current.append((part, take))
            acc += take
            rem -= take
            if acc >= unit - 1e-12:
                cells.append(current)
                current, acc = [], 0.0
    if current:
        cells.append(current)
    if len(cells) != m_prime:
        raise ValidationError(f"refinement produced {len(cells)} cells, expected {m_prime}")
    return EquitablePartition(cells)


def apply_equitable(W: StepGraphonSystem, eq: EquitablePartition) -> StepGraphonSystem:
    """Step W onto the equitable cells (mass-weighted averaging)."""
    from .graphon import stepping

    fine = subdivide(W, eq.pieces())
    return stepping(fine, eq.piece_cells())


def refinement_bookkeeping_bound(n_tables: int, m: int, m_prime: int) -> float:
    """The 2 d(W, W_Q) additive slack: 2 * tables * m / m'."""
    return 2.0 * n_tables * m / m_prime
