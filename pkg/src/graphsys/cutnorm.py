"""Cut norms of table tuples and two-sided cut-distance bounds.

The cut norm of a tuple (W_1..W_s) of signed step tables is
sup_{S,T} sum_i |int_{S x T} W_i|.  For fixed T the objective is a sum of
absolute values of linear functions of the per-part inclusion fractions,
hence convex, hence maximized at 0/1 vertices; the same holds for S.  The
exact routine therefore enumerates part subsets for S and sign patterns
for the absolute values, which is exact and costs 2^m x 2^s.

The cut distance between systems is reported as an interval: certified
lower bounds come from density differences (counting lemma) or feasible
(S, T) witnesses, certified upper bounds from exact cut norms on small
refinements or from L1/spectral majorants.  Exact delta is out of scope.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .combinatorics import (
    Multigraph,
    PreColoring,
    multigraph_from_pairs,
    parallel_edges,
    path_graph,
    star_graph,
)
from .density import rainbow_density
from .errors import ScaleGuardError, ValidationError
from .graphon import StepGraphonSystem, common_refinement
from .masks import nonempty_masks


@dataclass
class CutNormResult:
    value: float
    S: tuple[int, ...]
    T: tuple[int, ...]


def _weighted(tables, sizes):
    sizes = np.asarray(sizes, dtype=float)
    mats = [sizes[:, None] * np.asarray(t, dtype=float) * sizes[None, :] for t in tables]
    return mats, sizes


def cut_norm_exact(tables, sizes) -> CutNormResult:
    """Exact tuple cut norm with an optimal (S, T) pair of part subsets."""
    mats, sizes = _weighted(tables, sizes)
    m = len(sizes)
    s = len(mats)
    if m > 16:
        raise ScaleGuardError("exact cut norm is limited to 16 parts; use the heuristic")
    if s > 10:
        raise ScaleGuardError("exact cut norm is limited to 10 tables")
    subsets = np.arange(1 << m, dtype=np.int64)
    member = ((subsets[:, None] >> np.arange(m)) & 1).astype(float)  # (2^m, m)
    best = CutNormResult(0.0, (), ())
    for signs in itertools.product((1.0, -1.0), repeat=s):
        C = sum(sign * mat for sign, mat in zip(signs, mats))
        rowsums = member @ C  # (2^m, m): column sums over S per subset
        gains = np.maximum(rowsums, 0.0).sum(axis=1)
        idx = int(np.argmax(gains))
        if gains[idx] > best.value:
            S = tuple(a for a in range(m) if (idx >> a) & 1)
            T = tuple(b for b in range(m) if rowsums[idx, b] > 0)
            best = CutNormResult(float(gains[idx]), S, T)
    return best


def cut_norm_heuristic(tables, sizes, restarts: int = 20, seed: int = 0) -> CutNormResult:
    """Alternating maximization over S and T with random restarts.

    Always a lower bound on the exact value; deterministic under the seed.
    """
    mats, sizes = _weighted(tables, sizes)
    m = len(sizes)
    rng = np.random.default_rng(seed)

    def objective(alpha, beta):
        return sum(abs(float(alpha @ mat @ beta)) for mat in mats)

    def improve(alpha, beta):
        val = objective(alpha, beta)
        while True:
            # optimal S for current T via the sign linearization
            x = np.array([float(alpha @ mat @ beta) for mat in mats])
            eps = np.where(x >= 0, 1.0, -1.0)
            col = sum(e * (mat @ beta) for e, mat in zip(eps, mats))
            alpha = (col > 0).astype(float)
            x = np.array([float(alpha @ mat @ beta) for mat in mats])
            eps = np.where(x >= 0, 1.0, -1.0)
            row = sum(e * (mat @ alpha) for e, mat in zip(eps, mats))
            beta = (row > 0).astype(float)
            new = objective(alpha, beta)
            if new <= val + 1e-15:
                return val if new < val else new, alpha, beta
            val = new

    starts = [np.ones(m), (np.asarray(sizes) > np.median(sizes)).astype(float)]
    for _ in range(restarts):
        starts.append(rng.integers(0, 2, size=m).astype(float))
    best = CutNormResult(0.0, (), ())
    alpha0 = np.ones(m)
    for beta0 in starts:
        val, alpha, beta = improve(alpha0.copy(), beta0.copy())
        if val > best.value:
            best = CutNormResult(
                float(val),
                tuple(int(a) for a in np.flatnonzero(alpha)),
                tuple(int(b) for b in np.flatnonzero(beta)),
            )
    return best


def cut_norm_upper(tables, sizes) -> float:
    """Certified upper bound: min of the L1 and rank-style spectral majorants."""
    sizes = np.asarray(sizes, dtype=float)
    l1 = 0.0
    spectral = 0.0
    s2 = float(np.sum(sizes**2))
    for t in tables:
        t = np.asarray(t, dtype=float)
        l1 += float(np.abs(sizes[:, None] * t * sizes[None, :]).sum())
        spectral += s2 * float(np.linalg.norm(t, 2))
    return min(l1, spectral)


def cut_norm_bounds(tables, sizes, restarts: int = 20, seed: int = 0) -> tuple[float, float]:
    """(lower, upper) enclosure of the tuple cut norm; equal when exact runs."""
    m = len(np.asarray(sizes))
    if m <= 16 and len(tables) <= 10:
        val = cut_norm_exact(tables, sizes).value
        return val, val
    lo = cut_norm_heuristic(tables, sizes, restarts=restarts, seed=seed).value
    return lo, max(lo, cut_norm_upper(tables, sizes))


def _difference_tables(W: StepGraphonSystem, U: StepGraphonSystem):
    if W.k != U.k:
        raise ValidationError("systems must share the color count")
    if W.m != U.m or np.abs(W.sizes - U.sizes).max() > 1e-9:
        raise ValidationError("d_box requires a common partition; couple the systems first")
    return [W.block(mask) - U.block(mask) for mask in nonempty_masks(W.k)]


def d_box(W: StepGraphonSystem, U: StepGraphonSystem) -> float:
    """Exact cut norm of the blockwise differences on a shared partition."""
    return cut_norm_exact(_difference_tables(W, U), W.sizes).value


def d_box_bounds(W: StepGraphonSystem, U: StepGraphonSystem, restarts: int = 20, seed: int = 0):
    return cut_norm_bounds(_difference_tables(W, U), W.sizes, restarts=restarts, seed=seed)


# -- coupling search for the upper bound -----------------------------------


def _part_signature(system: StepGraphonSystem, part: int, grid: int = 32) -> np.ndarray:
    """Permutation-invariant profile of a part: per-color row value quantiles."""
    qs = (np.arange(grid) + 0.5) / grid
    sig = []
    for mask in nonempty_masks(system.k):
        row = system.block(mask)[part]
        order = np.argsort(row)
        masses = system.sizes[order]
        cum = np.cumsum(masses)
        total = cum[-1] if cum[-1] > 0 else 1.0
        idx = np.searchsorted(cum / total, qs, side="left").clip(0, len(order) - 1)
        sig.append(row[order][idx])
    return np.concatenate(sig)


def _northwest_fill(sw: np.ndarray, su: np.ndarray) -> np.ndarray:
    """Monge-style coupling following the given part orders."""
    C = np.zeros((len(sw), len(su)))
    i = j = 0
    remaining_w = sw.astype(float).copy()
    remaining_u = su.astype(float).copy()
    while i < len(sw) and j < len(su):
        move = min(remaining_w[i], remaining_u[j])
        C[i, j] += move
        remaining_w[i] -= move
        remaining_u[j] -= move
        if remaining_w[i] <= 1e-15:
            i += 1
        if remaining_u[j] <= 1e-15:
            j += 1
    return C


def _candidate_couplings(W, U, restarts, rng):
    yield np.outer(W.sizes, U.sizes)  # independence overlay
    if W.m == U.m:
        # signature alignment recovers part permutations exactly
        sig_w = np.stack([_part_signature(W, a) for a in range(W.m)])
        sig_u = np.stack([_part_signature(U, b) for b in range(U.m)])
        cost = np.abs(sig_w[:, None, :] - sig_u[None, :, :]).mean(axis=2)
        cost = cost + np.abs(W.sizes[:, None] - U.sizes[None, :])
        rows, cols = linear_sum_assignment(cost)
        if np.abs(W.sizes[rows] - U.sizes[cols]).max() < 1e-12:
            C = np.zeros((W.m, U.m))
            C[rows, cols] = W.sizes[rows]
            yield C
    for _ in range(restarts):
        pw = rng.permutation(W.m)
        pu = rng.permutation(U.m)
        C = np.zeros((W.m, U.m))
        fill = _northwest_fill(W.sizes[pw], U.sizes[pu])
        C[np.ix_(pw, pu)] = fill
        yield C


def _coupling_objective(W, U, C, exact_limit: int = 16):
    Wr, Ur, _ = common_refinement(W, U, C)
    tables = [Wr.block(mask) - Ur.block(mask) for mask in nonempty_masks(W.k)]
    if Wr.m <= exact_limit and len(tables) <= 10:
        return cut_norm_exact(tables, Wr.sizes).value
    return cut_norm_upper(tables, Wr.sizes)


def delta_box_upper(W: StepGraphonSystem, U: StepGraphonSystem,
                    restarts: int = 200, seed: int = 0) -> float:
    """Certified upper bound on the cut distance via coupling search.

    Minimizes a certified d_box upper bound over candidate couplings
    (independence, signature alignment, random orders) refined by local
    marginal-preserving mass transfers; never below the true distance.
    """
    if W.k != U.k:
        raise ValidationError("systems must share the color count")
    rng = np.random.default_rng(seed)
    best = math.inf
    best_C = None
    n_candidates = max(1, restarts // 4) if W.m > 1 and U.m > 1 else 1
    for C in itertools.islice(_candidate_couplings(W, U, n_candidates, rng), n_candidates + 2):
        val = _coupling_objective(W, U, C)
        if val < best:
            best, best_C = val, C.copy()
        if best <= 1e-12:
            return float(max(best, 0.0))
    if W.m == 1 or U.m == 1:
        return float(best)  # the coupling is unique
    # local mass-transfer polish
    C = best_C.copy()
    stale = 0
    for _ in range(restarts):
        if stale >= 50:
            break
        i, ip = rng.integers(0, W.m, 2)
        j, jp = rng.integers(0, U.m, 2)
        if i == ip or j == jp:
            stale += 1
            continue
        room = min(C[i, jp], C[ip, j])
        if room <= 1e-15:
            stale += 1
            continue
        delta = room * rng.choice([1.0, 0.5])
        trial = C.copy()
        trial[i, j] += delta
        trial[ip, jp] += delta
        trial[i, jp] -= delta
        trial[ip, j] -= delta
        trial[trial < 0] = 0.0
        val = _coupling_objective(W, U, trial)
        if val < best - 1e-15:
            best, C = val, trial
            stale = 0
        else:
            stale += 1
    return float(best)


# -- lower bound via the counting lemma -------------------------------------


def default_template_family(k: int, max_edges: int = 3):
    """Connected multigraph templates with at most ``max_edges`` edges,
    paired with the empty pre-coloring and every injective total coloring."""
    shapes: list[Multigraph] = [multigraph_from_pairs(2, [(0, 1)])]
    if max_edges >= 2:
        shapes += [path_graph(2), parallel_edges(2)]
    if max_edges >= 3:
        shapes += [
            path_graph(3),
            star_graph(3),
            multigraph_from_pairs(3, [(0, 1), (1, 2), (0, 2)]),  # triangle
            parallel_edges(3),
            multigraph_from_pairs(3, [(0, 1), (0, 1), (1, 2)]),  # doubled edge + pendant
        ]
    family = []
    for H in shapes:
        if H.n_edges > k:
            continue
        family.append((H, PreColoring.empty(k)))
        for colors in itertools.permutations(range(1, k + 1), H.n_edges):
            try:
                psi = PreColoring.total(H, dict(zip(H.edge_ids(), colors)), k, rainbow=True)
            except ValidationError:
                continue
            family.append((H, psi))
    return family


def delta_box_lower(W: StepGraphonSystem, U: StepGraphonSystem, template_family=None) -> float:
    """Certified lower bound on the cut distance from density gaps.

    By the counting lemma, |t*(W) - t*(U)| <= |E(H)| delta for every
    rainbow pre-coloring tuple, so the max of the normalized gaps over the
    family is a true lower bound.
    """
    if W.k != U.k:
        raise ValidationError("systems must share the color count")
    if template_family is None:
        template_family = default_template_family(W.k)
    best = 0.0
    for H, psi in template_family:
        gap = abs(rainbow_density(H, psi, W) - rainbow_density(H, psi, U))
        best = max(best, gap / H.n_edges)
    return best


def delta_box_bounds(W: StepGraphonSystem, U: StepGraphonSystem,
                     restarts: int = 200, seed: int = 0, template_family=None):
    lo = delta_box_lower(W, U, template_family)
    hi = delta_box_upper(W, U, restarts=restarts, seed=seed)
    return lo, max(lo, hi)
