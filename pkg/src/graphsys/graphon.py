"""Step graphon systems and graph systems.

A step graphon system of order k on m parts stores, for every nonempty
color subset I of [k], a symmetric m x m block-value table in [0,1]; the
empty subset implicitly carries the all-ones table.  Part masses may be
zero (the extremal optimizer needs the closed simplex).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .masks import all_masks, colors_of, key_mask, mask_key, nonempty_masks, popcount

_SIZE_TOL = 1e-12
_VALUE_SLACK = 1e-12


def _check_table(tab: np.ndarray, m: int, name: str, lo=-1.0, hi=1.0):
    if tab.shape != (m, m):
        raise ValidationError(f"{name}: expected shape ({m},{m}), got {tab.shape}")
    if not np.allclose(tab, tab.T, atol=1e-12):
        raise ValidationError(f"{name}: table is not symmetric")
    if tab.min() < lo - _VALUE_SLACK or tab.max() > hi + _VALUE_SLACK:
        raise ValidationError(f"{name}: entries outside [{lo},{hi}]")


@dataclass
class StepGraphonSystem:
    k: int
    sizes: np.ndarray
    blocks: dict[int, np.ndarray]

    def __post_init__(self):
        self.sizes = np.asarray(self.sizes, dtype=float)
        if self.sizes.ndim != 1:
            raise ValidationError("sizes must be a vector")
        if self.sizes.min() < -_SIZE_TOL:
            raise ValidationError("part sizes must be nonnegative")
        if abs(self.sizes.sum() - 1.0) > 1e-12:
            raise ValidationError("part sizes must sum to 1")
        m = self.m
        expected = set(nonempty_masks(self.k))
        if set(self.blocks) != expected:
            raise ValidationError("blocks must be keyed by every nonempty color subset")
        for mask in sorted(self.blocks):
            tab = np.asarray(self.blocks[mask], dtype=float)
            _check_table(tab, m, f"W_{{{mask_key(mask)}}}", lo=0.0, hi=1.0)
            self.blocks[mask] = tab

    @property
    def m(self) -> int:
        return len(self.sizes)

    def block(self, mask: int) -> np.ndarray:
        """Table for a color subset; the empty subset is constant one."""
        if mask == 0:
            return np.ones((self.m, self.m))
        return self.blocks[mask]

    def permute_parts(self, perm) -> "StepGraphonSystem":
        idx = np.asarray(perm, dtype=int)
        return StepGraphonSystem(
            self.k,
            self.sizes[idx],
            {mask: tab[np.ix_(idx, idx)] for mask, tab in self.blocks.items()},
        )

    def to_json(self) -> str:
        doc = {
            "k": self.k,
            "m": self.m,
            "sizes": self.sizes.tolist(),
            "blocks": {mask_key(mask): self.blocks[mask].tolist() for mask in sorted(self.blocks)},
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "StepGraphonSystem":
        try:
            doc = json.loads(text)
            k = int(doc["k"])
            sizes = np.asarray(doc["sizes"], dtype=float)
            raw = {key_mask(key): np.asarray(tab, dtype=float) for key, tab in doc["blocks"].items()}
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"bad system JSON: {exc}") from exc
        if doc.get("classical"):
            singles = []
            for i in range(1, k + 1):
                mask = 1 << (i - 1)
                if mask not in raw:
                    raise ValidationError(f"classical system missing factor W_{i}")
                singles.append(raw[mask])
            return span(sizes, singles)
        return cls(k, sizes, raw)


@dataclass
class OverlineSystem:
    """Moebius inversion tables, one per color subset including the empty set."""

    k: int
    sizes: np.ndarray
    tables: dict[int, np.ndarray]

    @property
    def m(self) -> int:
        return len(self.sizes)

    def min_entry(self) -> tuple[float, int, tuple[int, int]]:
        """The smallest cell over all tables, with its subset and cell."""
        best = None
        for mask in sorted(self.tables):
            tab = self.tables[mask]
            idx = np.unravel_index(np.argmin(tab), tab.shape)
            val = float(tab[idx])
            if best is None or val < best[0]:
                best = (val, mask, (int(idx[0]), int(idx[1])))
        return best

    def reconstruct(self, mask: int) -> np.ndarray:
        """Sum of tables over supersets of ``mask``; equals W_mask."""
        from .masks import supersets

        out = np.zeros((self.m, self.m))
        for sup in supersets(mask, self.k):
            out += self.tables[sup]
        return out


@dataclass
class GraphSystem:
    """k symmetric 0/1 adjacency relations on a common vertex set."""

    n: int
    k: int
    adjacency: list[np.ndarray]

    def __post_init__(self):
        if len(self.adjacency) != self.k:
            raise ValidationError(f"expected {self.k} adjacency tables")
        mats = []
        for i, mat in enumerate(self.adjacency):
            mat = np.asarray(mat, dtype=np.uint8)
            if mat.shape != (self.n, self.n):
                raise ValidationError(f"G_{i + 1}: bad shape {mat.shape}")
            if not np.array_equal(mat, mat.T):
                raise ValidationError(f"G_{i + 1}: adjacency not symmetric")
            if mat.diagonal().any():
                raise ValidationError(f"G_{i + 1}: loops are not allowed")
            if mat.max(initial=0) > 1:
                raise ValidationError(f"G_{i + 1}: entries must be 0/1")
            mats.append(mat)
        self.adjacency = mats

    def intersection(self, mask: int) -> np.ndarray:
        """Adjacency of G_I = the intersection over colors in the mask."""
        out = np.ones((self.n, self.n), dtype=np.uint8)
        np.fill_diagonal(out, 0)
        for c in colors_of(mask):
            out &= self.adjacency[c - 1]
        return out

    def edge_count(self, color: int) -> int:
        return int(self.adjacency[color - 1].sum()) // 2

    def has_edge(self, color: int, u: int, v: int) -> bool:
        return bool(self.adjacency[color - 1][u, v])

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "k": self.k,
            "edges": {
                str(i + 1): [[int(u), int(v)] for u, v in zip(*np.triu_indices(self.n, 1)) if self.adjacency[i][u, v]]
                for i in range(self.k)
            },
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "GraphSystem":
        try:
            doc = json.loads(text)
            n, k = int(doc["n"]), int(doc["k"])
            mats = []
            for i in range(k):
                mat = np.zeros((n, n), dtype=np.uint8)
                for u, v in doc["edges"].get(str(i + 1), []):
                    mat[u, v] = mat[v, u] = 1
                mats.append(mat)
        except (KeyError, TypeError, IndexError, json.JSONDecodeError) as exc:
            raise ValidationError(f"bad graph system JSON: {exc}") from exc
        return cls(n, k, mats)


# -- constructions and transforms -----------------------------------------


def span(sizes, factors) -> StepGraphonSystem:
    """Classical system with W_I the cellwise product of the factors in I."""
    sizes = np.asarray(sizes, dtype=float)
    k = len(factors)
    m = len(sizes)
    tabs = []
    for i, f in enumerate(factors):
        f = np.asarray(f, dtype=float)
        _check_table(f, m, f"factor {i + 1}", lo=0.0, hi=1.0)
        tabs.append(f)
    blocks = {}
    for mask in nonempty_masks(k):
        prod = np.ones((m, m))
        for c in colors_of(mask):
            prod = prod * tabs[c - 1]
        blocks[mask] = prod
    return StepGraphonSystem(k, sizes, blocks)


def moebius_overline(W: StepGraphonSystem) -> OverlineSystem:
    """Invert W_I into the overline tables, top subset downward.

    The tables satisfy sum over supersets J of I of overline_J = W_I, and
    the full-subset table equals W_[k].
    """
    k, m = W.k, W.m
    tables: dict[int, np.ndarray] = {}
    order = sorted(all_masks(k), key=popcount, reverse=True)
    for mask in order:
        acc = W.block(mask).copy()
        for sup, tab in tables.items():
            if sup != mask and (sup & mask) == mask:
                acc -= tab
        tables[mask] = acc
    return OverlineSystem(k, W.sizes.copy(), tables)


def is_admissible(W: StepGraphonSystem, tol: float = 1e-9):
    """Whether every overline table is nonnegative (within ``tol``).

    Returns (verdict, witness); the witness is the most negative
    (value, subset mask, cell) triple when the verdict is False, else None.
    """
    if tol < 0:
        raise ValidationError("tolerance must be nonnegative")
    val, mask, cell = moebius_overline(W).min_entry()
    if val >= -tol:
        return True, None
    return False, (val, mask, cell)


def is_classical(W: StepGraphonSystem, tol: float = 1e-9) -> bool:
    """Whether W_I equals the product of its singleton factors, cellwise."""
    for mask in nonempty_masks(W.k):
        prod = np.ones((W.m, W.m))
        for c in colors_of(mask):
            prod = prod * W.block(1 << (c - 1))
        if np.abs(W.block(mask) - prod).max() > tol:
            return False
    return True


def stepping(W: StepGraphonSystem, coarsening) -> StepGraphonSystem:
    """Average blocks over merged parts; zero-mass merged cells get value 0."""
    coarsening = list(coarsening)
    if len(coarsening) != W.m:
        raise ValidationError("coarsening must assign every part")
    groups = sorted(set(coarsening))
    if groups != list(range(len(groups))):
        raise ValidationError("coarsening must map onto 0..m'-1")
    mp = len(groups)
    proj = np.zeros((mp, W.m))
    for part, cell in enumerate(coarsening):
        proj[cell, part] = W.sizes[part]
    new_sizes = proj.sum(axis=1)
    weight = np.outer(new_sizes, new_sizes)
    blocks = {}
    for mask in nonempty_masks(W.k):
        raw = proj @ W.block(mask) @ proj.T
        with np.errstate(invalid="ignore", divide="ignore"):
            avg = np.where(weight > 0, raw / np.where(weight > 0, weight, 1.0), 0.0)
        blocks[mask] = np.clip((avg + avg.T) / 2.0, 0.0, 1.0)
    total = new_sizes.sum()
    return StepGraphonSystem(W.k, new_sizes / total, blocks)


def from_graph_system(G: GraphSystem) -> StepGraphonSystem:
    """The step system with n equal parts and 0/1 intersection blocks."""
    sizes = np.full(G.n, 1.0 / G.n)
    blocks = {mask: G.intersection(mask).astype(float) for mask in nonempty_masks(G.k)}
    return StepGraphonSystem(G.k, sizes, blocks)


def subdivide(W: StepGraphonSystem, pieces) -> StepGraphonSystem:
    """Re-express W on finer parts; each piece is (original part, mass)."""
    pieces = list(pieces)
    masses = np.array([mass for _, mass in pieces], dtype=float)
    owners = [part for part, _ in pieces]
    per_part = np.zeros(W.m)
    for part, mass in pieces:
        if mass < -_SIZE_TOL:
            raise ValidationError("piece masses must be nonnegative")
        per_part[part] += mass
    if np.abs(per_part - W.sizes).max() > 1e-9:
        raise ValidationError("piece masses do not add up to the part sizes")
    idx = np.asarray(owners, dtype=int)
    blocks = {mask: W.block(mask)[np.ix_(idx, idx)] for mask in nonempty_masks(W.k)}
    return StepGraphonSystem(W.k, masses / masses.sum(), blocks)


def common_refinement(W: StepGraphonSystem, U: StepGraphonSystem, coupling):
    """Overlay two systems along a coupling of their part masses.

    ``coupling`` is a nonnegative m x m' table whose rows sum to W.sizes and
    whose columns sum to U.sizes (tolerance 1e-9).  Returns (W', U', cells)
    on the positive-mass refinement cells, values copied blockwise.
    """
    if W.k != U.k:
        raise ValidationError("systems must have the same color count")
    C = np.asarray(coupling, dtype=float)
    if C.shape != (W.m, U.m):
        raise ValidationError(f"coupling must be {W.m} x {U.m}")
    if C.min() < -_SIZE_TOL:
        raise ValidationError("coupling must be nonnegative")
    if np.abs(C.sum(axis=1) - W.sizes).max() > 1e-9:
        raise ValidationError("coupling rows must sum to the first system's sizes")
    if np.abs(C.sum(axis=0) - U.sizes).max() > 1e-9:
        raise ValidationError("coupling columns must sum to the second system's sizes")
    cells = [(i, j) for i in range(W.m) for j in range(U.m) if C[i, j] > 0]
    w_idx = np.array([i for i, _ in cells], dtype=int)
    u_idx = np.array([j for _, j in cells], dtype=int)
    masses = np.array([C[i, j] for i, j in cells])
    masses = masses / masses.sum()
    W2 = StepGraphonSystem(
        W.k, masses, {mask: W.block(mask)[np.ix_(w_idx, w_idx)] for mask in nonempty_masks(W.k)}
    )
    U2 = StepGraphonSystem(
        U.k, masses, {mask: U.block(mask)[np.ix_(u_idx, u_idx)] for mask in nonempty_masks(U.k)}
    )
    return W2, U2, cells
