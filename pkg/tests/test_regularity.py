import math

import numpy as np
import pytest

from conftest import random_span, random_system
from graphsys.cutnorm import d_box
from graphsys.errors import ValidationError
from graphsys.graphon import GraphSystem, StepGraphonSystem, from_graph_system, subdivide
from graphsys.masks import nonempty_masks
from graphsys.regularity import (
    EquitablePartition,
    apply_equitable,
    equitable_refine,
    refinement_bookkeeping_bound,
    stepped_system,
    system_l2_norms,
    weak_regularity_bound,
    weak_regularity_partition,
)
from graphsys.sampling import sample_system
from graphsys.graphon import span


def complete_bipartite(parts_a, parts_b, n):
    A = np.zeros((n, n), dtype=np.uint8)
    for u in parts_a:
        for v in parts_b:
            A[u, v] = A[v, u] = 1
    return A


def test_exact_step_graph_gets_zero_residual():
    G = GraphSystem(4, 1, [complete_bipartite((0, 1), (2, 3), 4)])
    res = weak_regularity_partition(G, 2, seed=0, tol=1e-6)
    assert sorted(map(sorted, res.partition)) == [[0, 1], [2, 3]]
    assert res.upper <= 1e-12


def test_single_edge_residual_is_exactly_one_eighth():
    E = np.array([[0, 1], [1, 0]], dtype=np.uint8)
    res = weak_regularity_partition(GraphSystem(2, 1, [E]), 1, seed=0, tol=0.5)
    # centered table [[-1/2, 1/2], [1/2, -1/2]] on two half parts
    assert np.isclose(res.lower, 0.125) and np.isclose(res.upper, 0.125)


def test_partition_count_and_monotone_discrepancy():
    G = sample_system(120, span([0.5, 0.5], [np.array([[0.9, 0.1], [0.1, 0.9]])]), seed=3)
    res = weak_regularity_partition(G, 16, seed=0, tol=0.0)
    assert len(res.partition) <= 16
    assert all(b <= a + 1e-9 for a, b in zip(res.rounds, res.rounds[1:]))
    assert res.lower <= res.upper + 1e-12


def test_certificate_below_target_bound():
    W = span([1.0], [np.array([[0.5]]), np.array([[0.5]])])
    G = sample_system(150, W, seed=1)
    res = weak_regularity_partition(G, 16, seed=0, tol=0.0)
    bound = weak_regularity_bound(system_l2_norms(G), 1, 16)
    assert res.upper <= bound


def test_weak_regularity_bound_formula():
    val = weak_regularity_bound([0.5, 0.5], 1, 64)
    assert np.isclose(val, math.sqrt(2) * 8 * 1.0 / math.sqrt(math.log(64)))
    with pytest.raises(ValidationError):
        weak_regularity_bound([1.0], 4, 4)


def test_stepped_system_matches_partition_averages():
    G = sample_system(30, span([0.5, 0.5], [np.array([[0.8, 0.2], [0.2, 0.8]])]), seed=5)
    res = weak_regularity_partition(G, 4, seed=0, tol=0.0)
    stepped = stepped_system(G, res.partition)
    assert stepped.m == len(res.partition)
    assert np.isclose(stepped.sizes.sum(), 1.0)


def test_equitable_refine_masses():
    eq = equitable_refine([0.5, 0.3, 0.2], 5)
    assert eq.m == 5
    for cell in eq.cells:
        assert np.isclose(sum(m for _, m in cell), 0.2)
    # already equitable: every cell is one whole original part
    eq2 = equitable_refine([0.25, 0.25, 0.25, 0.25], 8)
    assert eq2.m == 8
    with pytest.raises(ValidationError):
        equitable_refine([0.5, 0.5], 2)


def test_equitable_refinement_bound(rng):
    # d(W, W_P) <= 2 d(W, W_Q) + 2 * tables * m / m'
    for trial in range(10):
        k, m = 2, 3
        W = random_system(rng, k, m)
        m_prime = 7
        eq = equitable_refine(W.sizes, m_prime)
        stepped = apply_equitable(W, eq)
        pieces = eq.pieces()
        fine_W = subdivide(W, pieces)
        fine_P = subdivide(stepped, [(c, mass) for c, (_, mass) in zip(eq.piece_cells(), pieces)])
        lhs = d_box(fine_W, fine_P)
        slack = refinement_bookkeeping_bound(len(list(nonempty_masks(k))), m, m_prime)
        # Q = the original partition itself, so d(W, W_Q) = 0
        assert lhs <= slack + 1e-9


def test_apply_equitable_preserves_global_averages(rng):
    W = random_system(rng, 2, 3)
    eq = equitable_refine(W.sizes, 6)
    stepped = apply_equitable(W, eq)
    for mask in nonempty_masks(2):
        before = float(W.sizes @ W.block(mask) @ W.sizes)
        after = float(stepped.sizes @ stepped.block(mask) @ stepped.sizes)
        assert np.isclose(before, after, atol=1e-12)
