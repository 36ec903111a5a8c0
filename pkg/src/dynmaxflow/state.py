"""Mutable solver state shared by the static and dynamic solvers.

Workers mutate ``cf`` and ``excess`` through atomic read-modify-write
during a phase; each ``height`` entry is written only by the worker that
owns the vertex (or by the level-synchronous BFS between phases). All
cross-phase visibility is established by the phase barriers.
"""

from dataclasses import dataclass

import numpy as np

from .graph import BiCsrGraph


@dataclass
class SolverState:
    cf: np.ndarray       # int64[m] residual capacities
    excess: np.ndarray   # int64[n] signed; negative = deficient
    height: np.ndarray   # int64[n] in [0, n]
    source: int
    sink: int
    n_vertices: int

    def copy(self) -> "SolverState":
        return SolverState(self.cf.copy(), self.excess.copy(), self.height.copy(),
                           self.source, self.sink, self.n_vertices)


def init_residuals(g: BiCsrGraph, source: int, sink: int) -> SolverState:
    """Fresh state: residuals mirror the capacities, excess and height zero."""
    return SolverState(
        cf=g.cap0.copy(),
        excess=np.zeros(g.n, dtype=np.int64),
        height=np.zeros(g.n, dtype=np.int64),
        source=source,
        sink=sink,
        n_vertices=g.n,
    )


def saturate_source(st: SolverState, g: BiCsrGraph) -> None:
    """Push the full remaining residual of every source-outgoing edge.

    On a fresh state this injects each edge's capacity; on a mid-dynamic
    state it injects only the unsaturated remainder, which keeps excess
    consistent with the constructed flow. Afterward every source-outgoing
    residual is exactly 0.
    """
    s = st.source
    lo, hi = int(g.offsets[s]), int(g.offsets[s + 1])
    if lo == hi:
        return
    idx = np.arange(lo, hi)
    deltas = st.cf[idx].copy()
    st.cf[idx] = 0
    st.cf[g.rev[idx]] += deltas
    st.excess[g.adj[idx]] += deltas  # neighbor ids are unique within a vertex
    st.excess[s] -= int(deltas.sum())


def active_mask(st: SolverState) -> np.ndarray:
    """Vertices eligible to push: positive excess, height below n, not s/t."""
    mask = (st.excess > 0) & (st.height < st.n_vertices)
    mask[st.source] = False
    mask[st.sink] = False
    return mask


def deficient_mask(st: SolverState) -> np.ndarray:
    """Vertices with negative excess (auxiliary sinks), excluding s/t."""
    mask = st.excess < 0
    mask[st.source] = False
    mask[st.sink] = False
    return mask
