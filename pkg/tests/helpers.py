"""Shared problem builders for the solver tests."""

import numpy as np


def two_subspace_data(seed=0, dim=4, per_group=10):
    """Columns drawn from two orthogonal one-dimensional subspaces."""
    rng = np.random.default_rng(seed)
    scales1 = rng.uniform(0.5, 2.0, per_group)
    scales2 = rng.uniform(0.5, 2.0, per_group)
    X = np.zeros((dim, 2 * per_group))
    X[0, :per_group] = scales1
    X[1, per_group:] = scales2
    return X


def low_rank_data(seed=1, q=8, n=40, rank=3):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((q, rank)) @ rng.standard_normal((rank, n))


def block_labels(per_group):
    G = np.zeros((2, 2 * per_group))
    G[0, :per_group] = 1.0
    G[1, per_group:] = 1.0
    return G


def block_mass_fraction(C, per_group):
    total = float((C ** 2).sum())
    blocks = float((C[:per_group, :per_group] ** 2).sum()
                   + (C[per_group:, per_group:] ** 2).sum())
    return blocks / total
