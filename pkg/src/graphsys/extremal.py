"""Extremal pipeline for rainbow trees: enumerate 0/1 step structures with
zero rainbow tree density, then maximin-optimize the per-color edge
densities over the simplex of part masses.

The zero-density test is purely combinatorial (a rainbow homomorphism
search against 0/1 tables with loops); tolerances never enter the
pipeline's core.  The optimizer is multistart projected subgradient ascent
with a pairwise golden-section polish.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .combinatorics import Multigraph, PreColoring
from .errors import ScaleGuardError, ValidationError
from .homsearch import find_rainbow_map


@dataclass(frozen=True)
class ZeroStructure:
    """Per color, a symmetric 0/1 table over parts; loops allowed."""

    k: int
    m: int
    tables: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        if len(self.tables) != self.k:
            raise ValidationError(f"expected {self.k} tables")
        for t in self.tables:
            if len(t) != self.m or any(len(row) != self.m for row in t):
                raise ValidationError("tables must be m x m")
            for a in range(self.m):
                for b in range(self.m):
                    if t[a][b] not in (0, 1):
                        raise ValidationError("table entries must be 0/1")
                    if t[a][b] != t[b][a]:
                        raise ValidationError("tables must be symmetric")

    @classmethod
    def from_arrays(cls, arrays) -> "ZeroStructure":
        arrays = [np.asarray(a, dtype=int) for a in arrays]
        m = arrays[0].shape[0]
        return cls(len(arrays), m, tuple(tuple(tuple(int(x) for x in row) for row in a) for a in arrays))

    def array(self, color: int) -> np.ndarray:
        return np.array(self.tables[color - 1], dtype=float)

    def encode(self) -> tuple[int, ...]:
        """One bitmask per color over the upper-triangle-with-diagonal cells."""
        out = []
        for t in self.tables:
            mask = 0
            idx = 0
            for a in range(self.m):
                for b in range(a, self.m):
                    if t[a][b]:
                        mask |= 1 << idx
                    idx += 1
            out.append(mask)
        return tuple(out)

    @classmethod
    def decode(cls, k: int, m: int, masks) -> "ZeroStructure":
        tabs = []
        for mask in masks:
            t = [[0] * m for _ in range(m)]
            idx = 0
            for a in range(m):
                for b in range(a, m):
                    if (mask >> idx) & 1:
                        t[a][b] = t[b][a] = 1
                    idx += 1
            tabs.append(tuple(tuple(row) for row in t))
        return cls(k, m, tuple(tabs))


def is_zero_structure(T: Multigraph, psi: PreColoring, S: ZeroStructure) -> bool:
    """True iff no vertex map and injective color extension lands every
    tree edge on a 1-cell; maps need not be injective and loops count."""
    psi.validate_for(T)
    tables = [np.array(t, dtype=np.uint8) for t in S.tables]

    def edge_ok(c, a, b):
        return bool(tables[c - 1][a, b])

    def support(c, a):
        return bool(tables[c - 1][a].any())

    hit = find_rainbow_map(T, psi, S.m, S.k, edge_ok, support, injective=False)
    return hit is None


def _cell_index(m: int):
    return [(a, b) for a in range(m) for b in range(a, m)]


def _bit_permutation(m: int, k: int, part_perm, color_perm):
    """Position map of the k * m(m+1)/2 structure bits under a symmetry."""
    cells = _cell_index(m)
    cell_pos = {cell: i for i, cell in enumerate(cells)}
    n_cells = len(cells)
    out = np.empty(k * n_cells, dtype=int)
    for c in range(k):
        for i, (a, b) in enumerate(cells):
            pa, pb = part_perm[a], part_perm[b]
            j = cell_pos[(min(pa, pb), max(pa, pb))]
            out[c * n_cells + i] = (color_perm[c]) * n_cells + j
    return out


def enumerate_zero_structures(T: Multigraph, psi: PreColoring, k: int, m: int,
                              maximal_only: bool = True, dedup: bool = True,
                              mode: str = "auto"):
    """All zero structures for (T, psi) at the given part count.

    Deduplicates under simultaneous part permutations and permutations of
    the colors outside the pre-coloring's image; keeps only maximal
    structures (no 0-cell can be flipped to 1 while staying zero) by
    default, which suffices for monotone objectives.
    """
    psi.validate_for(T)
    cells = _cell_index(m)
    bits = k * len(cells)
    if mode == "auto":
        mode = "exhaustive" if bits <= 24 else "pruned"
    if mode == "exhaustive" and bits > 24:
        raise ScaleGuardError(f"{bits} cells exceed the exhaustive limit of 24; use mode='pruned'")

    fixed_colors = sorted(set(psi.assignments.values()))
    free_colors = [c for c in range(k) if (c + 1) not in fixed_colors]

    # symmetry group: part perms x free-color perms
    perms = []
    for part_perm in itertools.permutations(range(m)):
        for color_sub in itertools.permutations(free_colors):
            color_perm = list(range(k))
            for src, dst in zip(free_colors, color_sub):
                color_perm[src] = dst
            perms.append(_bit_permutation(m, k, part_perm, color_perm))

    if mode == "exhaustive":
        candidates = _exhaustive_candidates(bits, perms, dedup)
    else:
        candidates = _pruned_candidates(T, psi, k, m, bits)

    structures = []
    seen: set[tuple[int, ...]] = set()
    for bitvec in candidates:
        S = _structure_from_bits(k, m, bitvec)
        if not is_zero_structure(T, psi, S):
            continue
        if maximal_only and not _is_maximal(T, psi, S, bitvec, k, m):
            continue
        if dedup:
            canon = _canonical_bits(bitvec, perms)
            if canon in seen:
                continue
            seen.add(canon)
            S = _structure_from_bits(k, m, canon)  # orbit representative
        structures.append(S)
    structures.sort(key=lambda s: s.encode())
    return structures


def _structure_from_bits(k: int, m: int, bitvec) -> ZeroStructure:
    cells = _cell_index(m)
    masks = []
    for c in range(k):
        mask = 0
        for i in range(len(cells)):
            if bitvec[c * len(cells) + i]:
                mask |= 1 << i
        masks.append(mask)
    return ZeroStructure.decode(k, m, masks)


def _canonical_bits(bitvec, perms) -> tuple[int, ...]:
    arr = np.asarray(bitvec, dtype=np.uint8)
    best = None
    for perm in perms:
        moved = np.empty_like(arr)
        moved[perm] = arr
        key = tuple(int(x) for x in moved)
        if best is None or key < best:
            best = key
    return best


def _exhaustive_candidates(bits: int, perms, dedup: bool):
    """All bit vectors, filtered to orbit minima when deduplicating."""
    count = 1 << bits
    vectors = ((np.arange(count, dtype=np.int64)[:, None] >> np.arange(bits)) & 1).astype(np.uint8)
    if not dedup or len(perms) == 1:
        keep = np.ones(count, dtype=bool)
    else:
        weights = (np.int64(1) << np.arange(bits, dtype=np.int64))
        packed = vectors.astype(np.int64) @ weights
        minimum = packed.copy()
        for perm in perms:
            moved = np.empty_like(vectors)
            moved[:, perm] = vectors
            np.minimum(minimum, moved.astype(np.int64) @ weights, out=minimum)
        keep = minimum == packed
    for idx in np.flatnonzero(keep):
        yield vectors[idx]


def _pruned_candidates(T: Multigraph, psi: PreColoring, k: int, m: int, bits: int):
    """DFS over cells; a partial assignment whose 1-cells already admit a
    rainbow homomorphism cannot extend to a zero structure."""
    bitvec = np.zeros(bits, dtype=np.uint8)

    def rec(pos):
        if pos == bits:
            yield bitvec.copy()
            return
        bitvec[pos] = 0
        yield from rec(pos + 1)
        bitvec[pos] = 1
        partial = bitvec.copy()
        partial[pos + 1:] = 0
        if is_zero_structure(T, psi, _structure_from_bits(k, m, partial)):
            yield from rec(pos + 1)
        bitvec[pos] = 0

    yield from rec(0)


def _is_maximal(T, psi, S, bitvec, k, m) -> bool:
    flipped = np.asarray(bitvec, dtype=np.uint8).copy()
    for i in range(len(flipped)):
        if flipped[i]:
            continue
        flipped[i] = 1
        if is_zero_structure(T, psi, _structure_from_bits(k, m, flipped)):
            return False
        flipped[i] = 0
    return True


# -- maximin optimization ---------------------------------------------------


@dataclass
class MinQuadraticProgram:
    """Quadratic forms with 0/1 coefficients, maximin-optimized over the
    standard simplex; f_i(x) = sum_{a,b} table_i[a,b] x_a x_b counts loop
    cells once and off-diagonal cells twice."""

    tables: list[np.ndarray]

    def __post_init__(self):
        mats = []
        m = None
        for t in self.tables:
            t = np.asarray(t, dtype=float)
            m = t.shape[0] if m is None else m
            if t.shape != (m, m) or not np.array_equal(t, t.T):
                raise ValidationError("coefficient tables must be square and symmetric")
            if not np.isin(t, (0.0, 1.0)).all():
                raise ValidationError("coefficients must be 0/1")
            mats.append(t)
        self.tables = mats

    @property
    def m(self) -> int:
        return self.tables[0].shape[0] if self.tables else 0

    @property
    def k(self) -> int:
        return len(self.tables)

    def values(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([float(x @ t @ x) for t in self.tables])

    def value(self, x: np.ndarray) -> float:
        vals = self.values(x)
        return float(vals.min()) if len(vals) else 0.0

    def to_json(self) -> str:
        return json.dumps(
            {"m": self.m, "forms": [t.astype(int).tolist() for t in self.tables]}, indent=2
        )

    @classmethod
    def from_json(cls, text: str) -> "MinQuadraticProgram":
        try:
            doc = json.loads(text)
            return cls([np.asarray(t, dtype=float) for t in doc["forms"]])
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"bad program JSON: {exc}") from exc


def build_program(S: ZeroStructure) -> MinQuadraticProgram:
    return MinQuadraticProgram([S.array(c) for c in range(1, S.k + 1)])


def export_program(P: MinQuadraticProgram) -> str:
    """Human-readable emission: one maximin objective over the simplex."""
    lines = [f"maximize  min(f_1..f_{P.k})  over  x_1+...+x_{P.m} = 1, x >= 0"]
    for i, t in enumerate(P.tables):
        monomials = []
        for a in range(P.m):
            if t[a, a]:
                monomials.append(f"x_{a + 1}^2")
            for b in range(a + 1, P.m):
                if t[a, b]:
                    monomials.append(f"2 x_{a + 1} x_{b + 1}")
        lines.append(f"f_{i + 1} = " + (" + ".join(monomials) if monomials else "0"))
    return "\n".join(lines) + "\n"


def _project_simplex(X: np.ndarray) -> np.ndarray:
    """Rowwise Euclidean projection onto the standard simplex."""
    n = X.shape[-1]
    U = -np.sort(-X, axis=-1)
    css = np.cumsum(U, axis=-1) - 1.0
    idx = np.arange(1, n + 1)
    rho = (U - css / idx > 0).sum(axis=-1)
    theta = np.take_along_axis(css, rho[..., None] - 1, axis=-1) / rho[..., None]
    return np.maximum(X - theta, 0.0)


@dataclass
class OptResult:
    value: float
    point: np.ndarray
    active: list[int]


def optimize_min_density(P: MinQuadraticProgram, restarts: int = 64, seed: int = 0,
                         iterations: int = 400) -> OptResult:
    """Multistart projected subgradient ascent on min_i f_i with a final
    pairwise golden-section polish; deterministic under the seed."""
    m, k = P.m, P.k
    if m > 32:
        raise ScaleGuardError("optimizer is limited to 32 parts")
    if k == 0 or m == 0:
        return OptResult(0.0, np.zeros(m), [])
    rng = np.random.default_rng(seed)
    A = np.stack(P.tables)  # (k, m, m)
    X = np.vstack([
        np.full((1, m), 1.0 / m),
        np.eye(m),
        rng.dirichlet(np.ones(m), size=restarts),
    ])
    best_x = X[0].copy()
    best_val = P.value(best_x)

    def batch_values(X):
        # f_i(x) per row: (k, rows)
        return np.einsum("rm,kmn,rn->kr", X, A, X)

    for t in range(1, iterations + 1):
        vals = batch_values(X)
        row_best = vals.min(axis=0)
        top = int(np.argmax(row_best))
        if row_best[top] > best_val:
            best_val = float(row_best[top])
            best_x = X[top].copy()
        active = vals.argmin(axis=0)
        grads = 2.0 * np.einsum("rmn,rn->rm", A[active], X)
        X = _project_simplex(X + (0.25 / math.sqrt(t)) * grads)
    vals = batch_values(X)
    row_best = vals.min(axis=0)
    top = int(np.argmax(row_best))
    if row_best[top] > best_val:
        best_val = float(row_best[top])
        best_x = X[top].copy()

    x = best_x
    val = P.value(x)
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(20):
        improved = False
        for i in range(m):
            for j in range(m):
                if i == j:
                    continue
                lo, hi = -x[i], x[j]
                if hi - lo < 1e-14:
                    continue

                def g(t):
                    y = x.copy()
                    y[i] += t
                    y[j] -= t
                    return P.value(y)

                a, b = lo, hi
                c = b - phi * (b - a)
                d = a + phi * (b - a)
                gc, gd = g(c), g(d)
                for _ in range(40):
                    if gc < gd:
                        a, c, gc = c, d, gd
                        d = a + phi * (b - a)
                        gd = g(d)
                    else:
                        b, d, gd = d, c, gc
                        c = b - phi * (b - a)
                        gc = g(c)
                t_star = (a + b) / 2.0
                if g(t_star) > val + 1e-14:
                    x[i] += t_star
                    x[j] -= t_star
                    x = np.maximum(x, 0.0)
                    x /= x.sum()
                    val = P.value(x)
                    improved = True
        if not improved:
            break
    vals = P.values(x)
    active = [i + 1 for i, v in enumerate(vals) if v <= vals.min() + 1e-10]
    return OptResult(float(vals.min()), x, active)


@dataclass
class PiStarResult:
    value: float
    structure: ZeroStructure | None
    point: np.ndarray | None
    n_structures: int

    def describe(self) -> str:
        return (
            f"value {self.value:.12f} over {self.n_structures} maximal zero structures"
        )


def pi_star_tree(T: Multigraph, psi: PreColoring | None, k: int, m: int,
                 restarts: int = 64, seed: int = 0,
                 structures=None) -> PiStarResult:
    """Lower bound on the rainbow Turan density of a tree at a fixed part
    count: the max over zero structures of the maximin edge density.

    Exact once m reaches the structure theorem's part bound; ties broken
    toward the lexicographically smallest structure encoding.
    """
    if not T.is_tree():
        raise ValidationError("the extremal pipeline applies to trees")
    psi = psi if psi is not None else PreColoring.empty(k)
    if structures is None:
        structures = enumerate_zero_structures(T, psi, k, m)
    best = PiStarResult(-1.0, None, None, len(structures))
    for S in structures:
        res = optimize_min_density(build_program(S), restarts=restarts, seed=seed)
        if res.value > best.value + 1e-12:
            best = PiStarResult(res.value, S, res.point, len(structures))
    if best.structure is None:
        return PiStarResult(0.0, None, None, len(structures))
    return best
