import numpy as np
import pytest

from ssalab import GenSpec, PortableRng, SymMatrix, generate


@pytest.fixture
def rng():
    return PortableRng(20240701)


def random_spd(seed, n, eps=1e-3):
    """Generic SPD test matrix, deterministic in seed."""
    g = PortableRng(seed).normal_matrix(n, n)
    return SymMatrix(g.T @ g + eps * np.eye(n))


def random_sym(seed, n):
    """Generic symmetric (indefinite) test matrix."""
    g = PortableRng(seed).normal_matrix(n, n)
    return SymMatrix((g + g.T) / 2.0)


def instance(kind, dims, seed, eps=1e-3):
    return generate(GenSpec(kind, dims, seed, eps))
