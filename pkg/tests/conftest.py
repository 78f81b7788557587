"""Shared generators for randomized tests.  Everything is seeded."""

import numpy as np
import pytest

from graphsys.graphon import StepGraphonSystem, span
from graphsys.masks import all_masks, nonempty_masks, popcount, supersets


def random_sizes(rng, m):
    return rng.dirichlet(np.ones(m))


def random_symmetric(rng, m, lo=0.0, hi=1.0):
    t = rng.uniform(lo, hi, (m, m))
    return (t + t.T) / 2.0


def random_span(rng, k, m):
    """A random classical system (span of random step factors)."""
    return span(random_sizes(rng, m), [random_symmetric(rng, m) for _ in range(k)])


def random_system(rng, k, m, shared_sizes=None):
    """A random general system; blocks are arbitrary tables in [0,1]."""
    sizes = shared_sizes if shared_sizes is not None else random_sizes(rng, m)
    blocks = {mask: random_symmetric(rng, m) for mask in nonempty_masks(k)}
    return StepGraphonSystem(k, sizes, blocks)


def random_admissible(rng, k, m, shared_sizes=None):
    """Admissible by construction: random nonnegative overline weights per
    cell summing to one, accumulated into the W_I tables."""
    sizes = shared_sizes if shared_sizes is not None else random_sizes(rng, m)
    n_masks = 1 << k
    over = rng.dirichlet(np.ones(n_masks), size=(m, m))  # (m, m, 2^k)
    over = (over + over.transpose(1, 0, 2)) / 2.0
    blocks = {}
    for mask in nonempty_masks(k):
        acc = np.zeros((m, m))
        for sup in supersets(mask, k):
            acc += over[:, :, sup]
        blocks[mask] = np.clip(acc, 0.0, 1.0)
    return StepGraphonSystem(k, sizes, blocks)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
