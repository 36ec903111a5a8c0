import numpy as np
import pytest

import dynmaxflow as mf


@pytest.fixture
def diamond():
    """4-vertex instance with known max flow 5 (s=0, t=3)."""
    g = mf.EdgeListGraph.from_edges(
        4, [(0, 1, 3), (0, 2, 2), (1, 3, 2), (2, 3, 3), (1, 2, 1)])
    return mf.build_bicsr(g), 0, 3


def solved_instance(n, m, seed, params=None):
    g, s, t = mf.random_graph(n, m, seed=seed)
    csr = mf.build_bicsr(g)
    res = mf.solve_static(csr, s, t, params or mf.SolverParams())
    return csr, s, t, res
