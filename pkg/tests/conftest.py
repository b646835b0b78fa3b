"""Shared test fixtures and network builders."""

from __future__ import annotations

import numpy as np
import pytest

from netecon.network import IONetwork


def make_symmetric_stochastic(n: int, seed: int) -> IONetwork:
    """Random symmetric doubly-stochastic matrix (normal, real spectrum).

    Symmetric Sinkhorn scaling of a positive symmetric matrix converges to a
    symmetric matrix with unit row sums.
    """
    rng = np.random.default_rng(seed)
    a = rng.exponential(1.0, (n, n))
    a = a + a.T
    for _ in range(500):
        d = 1.0 / np.sqrt(a.sum(axis=1))
        a = d[:, None] * a * d[None, :]
        if np.max(np.abs(a.sum(axis=1) - 1.0)) < 1e-14:
            break
    a = a / a.sum(axis=1, keepdims=True)
    return IONetwork(n, a)


def make_circulant(n: int, seed: int) -> IONetwork:
    """Random row-stochastic circulant: normal with complex eigenvalues."""
    rng = np.random.default_rng(seed)
    row = rng.exponential(1.0, n)
    row = row / row.sum()
    w = np.array([np.roll(row, k) for k in range(n)])
    return IONetwork(n, w)


@pytest.fixture
def plain8():
    from netecon.network import build_plain_network

    return build_plain_network(8)
