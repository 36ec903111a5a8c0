"""Bidirectional CSR graph representation with paired reverse-edge indices.

Every (u, v) pair with an edge in either direction materializes both
directed slots, so a push can update the forward and reverse residual
entries with constant-time index arithmetic. Slots inserted only to
complete a pair carry capacity 0 and are flagged as non-original.
"""

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np


class GraphError(ValueError):
    """Malformed graph input (bad vertex id, negative capacity, ...)."""


@dataclass(frozen=True)
class EdgeListGraph:
    """Directed capacitated graph as parallel edge arrays.

    May contain self-loops and parallel edges; those are normalized away
    by :func:`build_bicsr`.
    """

    n: int
    us: np.ndarray
    vs: np.ndarray
    caps: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int]]) -> "EdgeListGraph":
        rows = list(edges)
        us = np.fromiter((e[0] for e in rows), dtype=np.int64, count=len(rows))
        vs = np.fromiter((e[1] for e in rows), dtype=np.int64, count=len(rows))
        caps = np.fromiter((e[2] for e in rows), dtype=np.int64, count=len(rows))
        return cls(n, us, vs, caps)

    @property
    def m(self) -> int:
        return int(self.us.shape[0])

    def edges(self) -> Iterator[tuple[int, int, int]]:
        for u, v, c in zip(self.us, self.vs, self.caps):
            yield int(u), int(v), int(c)

    def validate(self) -> None:
        if self.n <= 0:
            raise GraphError(f"vertex count must be positive, got {self.n}")
        for name, arr in (("source", self.us), ("target", self.vs)):
            bad = np.flatnonzero((arr < 0) | (arr >= self.n))
            if bad.size:
                i = int(bad[0])
                raise GraphError(
                    f"edge {i}: {name} vertex {int(arr[i])} out of range [0, {self.n})"
                )
        neg = np.flatnonzero(self.caps < 0)
        if neg.size:
            i = int(neg[0])
            raise GraphError(f"edge {i}: negative capacity {int(self.caps[i])}")


@dataclass
class BuildDiagnostics:
    self_loops_dropped: int = 0
    parallel_edges_merged: int = 0
    reverse_stubs_added: int = 0


@dataclass
class BiCsrGraph:
    """Immutable bidirectional CSR topology.

    ``cap0`` holds the current edge capacities and is the one array the
    dynamic update path mutates in place; everything else is fixed after
    construction and safe to share across worker threads.
    """

    n: int
    m: int
    offsets: np.ndarray      # int64[n+1]
    adj: np.ndarray          # int64[m] head vertex of each directed slot
    src: np.ndarray          # int64[m] tail vertex of each directed slot
    rev: np.ndarray          # int64[m] slot index of the paired reverse edge
    cap0: np.ndarray         # int64[m] capacity; 0 on inserted stubs
    is_original: np.ndarray  # bool[m] slot came from an input edge
    diagnostics: BuildDiagnostics = field(default_factory=BuildDiagnostics)
    _keys: np.ndarray | None = field(default=None, repr=False)

    @property
    def m_original(self) -> int:
        return int(self.is_original.sum())

    def sorted_keys(self) -> np.ndarray:
        """Ascending ``u * n + v`` slot keys, aligned with the slot order."""
        if self._keys is None:
            self._keys = self.src * np.int64(self.n) + self.adj
        return self._keys

    def edge_indices(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Slot indices for directed pairs; -1 where no such slot exists."""
        want = np.asarray(us, dtype=np.int64) * np.int64(self.n) + np.asarray(vs, dtype=np.int64)
        if self.m == 0:
            return np.full(want.shape, -1, dtype=np.int64)
        keys = self.sorted_keys()
        pos = np.minimum(np.searchsorted(keys, want), self.m - 1)
        return np.where(keys[pos] == want, pos, -1)

    def edge_index(self, u: int, v: int) -> int:
        return int(self.edge_indices(np.array([u]), np.array([v]))[0])

    def to_edge_list(self) -> EdgeListGraph:
        """Normalized edge list: original slots only, stubs dropped."""
        keep = self.is_original
        return EdgeListGraph(self.n, self.src[keep].copy(), self.adj[keep].copy(),
                             self.cap0[keep].copy())

    def copy(self) -> "BiCsrGraph":
        """Copy sharing the immutable topology but with private capacities."""
        return BiCsrGraph(self.n, self.m, self.offsets, self.adj, self.src,
                          self.rev, self.cap0.copy(), self.is_original,
                          self.diagnostics, self._keys)


def build_bicsr(g: EdgeListGraph) -> BiCsrGraph:
    """Normalize an edge list and assemble the bidirectional CSR arrays.

    Self-loops are dropped, parallel same-direction edges merged by
    summing capacities, and a zero-capacity stub is inserted wherever a
    reverse direction is missing. Adjacency within each vertex is sorted
    by neighbor id.
    """
    g.validate()
    n = np.int64(g.n)
    diag = BuildDiagnostics()

    keep = g.us != g.vs
    diag.self_loops_dropped = int((~keep).sum())
    us, vs, caps = g.us[keep], g.vs[keep], g.caps[keep]

    # Merge parallel edges: group by directed key, sum capacities.
    keys = us * n + vs
    ukeys, inv = np.unique(keys, return_inverse=True)
    merged_caps = np.zeros(ukeys.shape[0], dtype=np.int64)
    np.add.at(merged_caps, inv, caps)
    diag.parallel_edges_merged = int(keys.shape[0] - ukeys.shape[0])

    # Symmetric closure: add a zero-capacity candidate for each reverse
    # direction, then merge again (a candidate whose direction already
    # exists collapses into the real edge).
    mu, mv = ukeys // n, ukeys % n
    all_keys = np.concatenate([ukeys, mv * n + mu])
    all_caps = np.concatenate([merged_caps, np.zeros_like(merged_caps)])
    all_orig = np.concatenate([np.ones(ukeys.shape[0], bool), np.zeros(ukeys.shape[0], bool)])

    skeys, sinv = np.unique(all_keys, return_inverse=True)
    m = skeys.shape[0]
    cap0 = np.zeros(m, dtype=np.int64)
    np.add.at(cap0, sinv, all_caps)
    is_original = np.zeros(m, dtype=bool)
    np.logical_or.at(is_original, sinv, all_orig)
    diag.reverse_stubs_added = int(m - ukeys.shape[0])

    src = skeys // n
    adj = skeys % n
    offsets = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=g.n), out=offsets[1:])

    # skeys is ascending, so searching the swapped key locates the pair.
    rev = np.searchsorted(skeys, adj * n + src)

    return BiCsrGraph(g.n, int(m), offsets, adj, src, rev, cap0, is_original,
                      diag, skeys)


def reverse_edge(g: BiCsrGraph, i: int) -> int:
    """Slot index of the paired reverse edge; an involution."""
    if not 0 <= i < g.m:
        raise GraphError(f"edge index {i} out of range [0, {g.m})")
    return int(g.rev[i])
