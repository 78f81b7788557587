import numpy as np
import pytest

from conftest import random_span, random_symmetric, random_system
from graphsys.cutnorm import (
    cut_norm_bounds,
    cut_norm_exact,
    cut_norm_heuristic,
    cut_norm_upper,
    d_box,
    d_box_bounds,
    default_template_family,
    delta_box_bounds,
    delta_box_lower,
    delta_box_upper,
)
from graphsys.density import rainbow_density
from graphsys.errors import ScaleGuardError, ValidationError
from graphsys.graphon import StepGraphonSystem, span, stepping
from graphsys.masks import nonempty_masks


def brute_force_cut_norm(tables, sizes):
    """Oracle: enumerate all subset pairs (S, T) directly."""
    m = len(sizes)
    sizes = np.asarray(sizes)
    mats = [sizes[:, None] * t * sizes[None, :] for t in tables]
    best = 0.0
    for smask in range(1 << m):
        alpha = np.array([(smask >> a) & 1 for a in range(m)], dtype=float)
        for tmask in range(1 << m):
            beta = np.array([(tmask >> b) & 1 for b in range(m)], dtype=float)
            val = sum(abs(float(alpha @ mat @ beta)) for mat in mats)
            best = max(best, val)
    return best


def test_exact_basic_values():
    res = cut_norm_exact([np.array([[0.6]])], [1.0])
    assert np.isclose(res.value, 0.6) and res.S == (0,) and res.T == (0,)
    halves = cut_norm_exact([np.array([[1.0, -1.0], [-1.0, 1.0]])], [0.5, 0.5])
    assert np.isclose(halves.value, 0.25)
    assert sorted(halves.S) == sorted(halves.T) and len(halves.S) == 1
    # absolute values add on a pair (A, -A)
    A = np.array([[0.2, -0.4], [-0.4, 0.35]])
    one = cut_norm_exact([A], [0.5, 0.5]).value
    two = cut_norm_exact([A, -A], [0.5, 0.5]).value
    assert np.isclose(two, 2 * one)


def test_exact_matches_bruteforce(rng):
    for _ in range(50):
        m = int(rng.integers(1, 6))
        s = int(rng.integers(1, 4))
        sizes = rng.dirichlet(np.ones(m))
        tables = [random_symmetric(rng, m, -1, 1) for _ in range(s)]
        assert np.isclose(
            cut_norm_exact(tables, sizes).value, brute_force_cut_norm(tables, sizes), atol=1e-12
        )


def test_exact_scale_guard():
    with pytest.raises(ScaleGuardError):
        cut_norm_exact([np.zeros((17, 17))], np.full(17, 1 / 17))


def test_heuristic_never_exceeds_exact_and_usually_matches(rng):
    hits = 0
    for trial in range(100):
        m = int(rng.integers(2, 11))
        s = int(rng.integers(1, 4))
        sizes = rng.dirichlet(np.ones(m))
        tables = [random_symmetric(rng, m, -1, 1) for _ in range(s)]
        exact = cut_norm_exact(tables, sizes).value
        heur = cut_norm_heuristic(tables, sizes, restarts=20, seed=trial).value
        assert heur <= exact + 1e-12
        if abs(heur - exact) < 1e-9:
            hits += 1
    assert hits >= 90


def test_heuristic_zero_and_rank_one():
    assert cut_norm_heuristic([np.zeros((3, 3))], [0.4, 0.3, 0.3]).value == 0.0
    v = np.array([0.2, 0.5, 0.9])
    rank1 = np.outer(v, v)
    res = cut_norm_heuristic([rank1], [1 / 3] * 3, restarts=5, seed=0)
    # monotone structure: the global optimum takes everything
    expect = float(np.full(3, 1 / 3) @ rank1 @ np.full(3, 1 / 3))
    assert np.isclose(res.value, expect)


def test_upper_bound_dominates_exact(rng):
    for _ in range(30):
        m = int(rng.integers(1, 8))
        tables = [random_symmetric(rng, m, -1, 1) for _ in range(int(rng.integers(1, 4)))]
        sizes = rng.dirichlet(np.ones(m))
        assert cut_norm_upper(tables, sizes) >= cut_norm_exact(tables, sizes).value - 1e-12


def test_norm_sum_sandwich(rng):
    # (1/#tables) sum of component norms <= tuple norm <= sum of norms
    for _ in range(30):
        m = int(rng.integers(1, 6))
        s = int(rng.integers(1, 4))
        sizes = rng.dirichlet(np.ones(m))
        tables = [random_symmetric(rng, m, -1, 1) for _ in range(s)]
        tuple_norm = cut_norm_exact(tables, sizes).value
        comps = [cut_norm_exact([t], sizes).value for t in tables]
        assert sum(comps) / len(comps) <= tuple_norm + 1e-12
        assert tuple_norm <= sum(comps) + 1e-12


def test_contraction_under_stepping(rng):
    # stepping is a contraction for the cut norm, exactly (m <= 10)
    for _ in range(30):
        k = int(rng.integers(1, 3))
        m = int(rng.integers(2, 7))
        W = random_system(rng, k, m)
        U = random_system(rng, k, m, shared_sizes=W.sizes)
        coarsening = [int(x) for x in rng.integers(0, max(1, m - 1), m)]
        # relabel onto a dense range
        labels = {c: i for i, c in enumerate(sorted(set(coarsening)))}
        coarsening = [labels[c] for c in coarsening]
        Wp, Up = stepping(W, coarsening), stepping(U, coarsening)
        full = d_box(W, U)
        stepped = d_box(Wp, Up)
        assert stepped <= full + 1e-10


def test_refining_partitions_are_monotone(rng):
    # for Q refining P, the Q-stepped norm dominates is bounded by the
    # P-stepped norm from above: ||W_Q|| >= is not claimed; we test
    # ||W_P|| <= ||W_Q|| <= ||W|| via coarsening chains
    for _ in range(20):
        m = 6
        W = random_system(rng, 1, m)
        U = random_system(rng, 1, m, shared_sizes=W.sizes)
        fine = [0, 0, 1, 1, 2, 2]
        coarse_of_fine = [0, 0, 0]
        Wq, Uq = stepping(W, fine), stepping(U, fine)
        Wp, Up = stepping(Wq, coarse_of_fine), stepping(Uq, coarse_of_fine)
        full = d_box(W, U)
        q = d_box(Wq, Uq)
        p = d_box(Wp, Up)
        assert p <= q + 1e-10 <= full + 2e-10


def test_d_box_values(rng):
    W = random_span(rng, 2, 3)
    assert d_box(W, W) == 0.0
    # a single-color constant shift of delta has d_box >= delta
    base = span([1.0], [np.array([[0.4]]), np.array([[0.6]])])
    shifted = StepGraphonSystem(
        2, [1.0], {1: np.array([[0.5]]), 2: base.block(2).copy(), 3: base.block(3).copy()}
    )
    assert d_box(base, shifted) >= 0.1 - 1e-12
    with pytest.raises(ValidationError):
        d_box(base, random_span(rng, 2, 2))


def test_delta_upper_on_permuted_systems(rng):
    for trial in range(5):
        W = random_span(rng, 2, 4)
        perm = rng.permutation(4)
        U = W.permute_parts(perm)
        assert delta_box_upper(W, U, restarts=40, seed=trial) <= 1e-9


def test_delta_upper_constant_across_part_counts():
    W = span([1.0], [np.array([[0.35]]), np.array([[0.8]])])
    U = span([0.2] * 5, [np.full((5, 5), 0.35), np.full((5, 5), 0.8)])
    assert delta_box_upper(W, U, restarts=10, seed=0) <= 1e-12


def test_delta_lower_basics(rng):
    W = random_span(rng, 2, 3)
    assert delta_box_lower(W, W) <= 1e-12
    base = span([1.0], [np.array([[0.4]]), np.array([[0.6]])])
    bumped = span([1.0], [np.array([[0.55]]), np.array([[0.6]])])
    assert delta_box_lower(base, bumped) >= 0.15 - 1e-9


def test_delta_sandwich_on_random_pairs(rng):
    for trial in range(100):
        k = int(rng.integers(1, 3))
        m = int(rng.integers(1, 5))
        m2 = int(rng.integers(1, 5))
        W = random_span(rng, k, m)
        U = random_span(rng, k, m2)
        lo, hi = delta_box_bounds(W, U, restarts=20, seed=trial)
        assert lo <= hi + 1e-12


def test_counting_lemma_bound(rng):
    # |t*(W) - t*(U)| <= |E(H)| d_box(W, U) on a shared partition
    for trial in range(60):
        k = int(rng.integers(1, 4))
        m = int(rng.integers(1, 5))
        W = random_system(rng, k, m)
        U = random_system(rng, k, m, shared_sizes=W.sizes)
        d = d_box(W, U)
        for H, psi in default_template_family(k):
            gap = abs(rainbow_density(H, psi, W) - rainbow_density(H, psi, U))
            assert gap <= H.n_edges * d + 1e-12


def test_d_box_triangle_inequality(rng):
    for _ in range(25):
        k, m = 2, int(rng.integers(1, 5))
        sizes = rng.dirichlet(np.ones(m))
        A = random_system(rng, k, m, shared_sizes=sizes)
        B = random_system(rng, k, m, shared_sizes=sizes)
        C = random_system(rng, k, m, shared_sizes=sizes)
        assert d_box(A, C) <= d_box(A, B) + d_box(B, C) + 1e-12


def test_bounds_interface(rng):
    W = random_span(rng, 2, 3)
    U = random_span(rng, 2, 3)
    U = StepGraphonSystem(2, W.sizes.copy(), {m_: U.block(m_).copy() for m_ in nonempty_masks(2)})
    lo, hi = d_box_bounds(W, U)
    assert np.isclose(lo, hi)  # exact regime
    big = random_span(rng, 2, 20)
    tables = [big.block(mask) for mask in nonempty_masks(2)]
    lo2, hi2 = cut_norm_bounds(tables, big.sizes, restarts=10, seed=0)
    assert lo2 <= hi2
