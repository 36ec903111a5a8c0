"""Sequential reference algorithms and structural verifiers.

Correctness-only code paths: the max-flow oracle is a plain-Python
blocking-flow implementation from a different algorithmic family than
the solver, so the two share no failure modes. Verifiers return report
objects instead of raising, so a caller can print every violation at
once.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .graph import BiCsrGraph, EdgeListGraph
from .state import SolverState
from .solver import CutCertificate


def dinic_maxflow(g: EdgeListGraph, s: int, t: int) -> int:
    """Exact max flow via layered residual graphs and blocking flows.

    Intended for test-scale instances (a few thousand vertices).
    Self-loops are ignored; parallel edges are fine.
    """
    if s == t:
        raise ValueError("source and sink must differ")
    n = g.n
    adj = [[] for _ in range(n)]  # per vertex: [head, residual, reverse slot]

    for u, v, c in zip(g.us.tolist(), g.vs.tolist(), g.caps.tolist()):
        if u == v:
            continue
        adj[u].append([v, c, len(adj[v])])
        adj[v].append([u, 0, len(adj[u]) - 1])

    total = 0
    while True:
        level = [-1] * n
        level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for e in adj[u]:
                if e[1] > 0 and level[e[0]] < 0:
                    level[e[0]] = level[u] + 1
                    q.append(e[0])
        if level[t] < 0:
            return total
        it = [0] * n
        while True:
            pushed = _augment_in_level_graph(adj, level, it, s, t)
            if pushed == 0:
                break
            total += pushed


def _augment_in_level_graph(adj, level, it, s, t):
    """One augmenting path inside the level graph (iterative, current-arc)."""
    verts = [s]
    edges = []
    while True:
        u = verts[-1]
        if u == t:
            amt = min(e[1] for e in edges)
            for e in edges:
                e[1] -= amt
                adj[e[0]][e[2]][1] += amt
            return amt
        advanced = False
        while it[u] < len(adj[u]):
            e = adj[u][it[u]]
            if e[1] > 0 and level[e[0]] == level[u] + 1:
                verts.append(e[0])
                edges.append(e)
                advanced = True
                break
            it[u] += 1
        if not advanced:
            level[u] = -1  # dead end for this blocking-flow sweep
            verts.pop()
            if not verts:
                return 0
            edges.pop()


def exhaustive_min_cut(g: EdgeListGraph, s: int, t: int) -> int:
    """Minimum s-t cut by enumerating every bipartition; tiny graphs only."""
    free = [v for v in range(g.n) if v != s and v != t]
    if len(free) > 20:
        raise ValueError("exhaustive cut enumeration limited to 20 free vertices")
    us, vs, caps = g.us.tolist(), g.vs.tolist(), g.caps.tolist()
    best = None
    for bits in range(1 << len(free)):
        a = {s}
        for i, v in enumerate(free):
            if bits >> i & 1:
                a.add(v)
        cap = sum(c for u, v, c in zip(us, vs, caps) if u in a and v not in a)
        best = cap if best is None else min(best, cap)
    return best


@dataclass
class ConstructedFlow:
    """Per-slot flow assignment recovered from residual capacities."""

    f: np.ndarray  # int64[m]; positive entries only on original slots


def construct_flow(st: SolverState, g: BiCsrGraph) -> ConstructedFlow:
    """Recover the flow f = max(0, cap - cf) per directed slot.

    Residual-sum conservation guarantees at most one direction of each
    pair carries flow; a violated pair means the state is corrupt and is
    rejected.
    """
    pair_ok = st.cf + st.cf[g.rev] == g.cap0 + g.cap0[g.rev]
    if not bool(np.all(pair_ok)):
        i = int(np.flatnonzero(~pair_ok)[0])
        raise ValueError(
            f"residual-sum conservation violated on edge slot {i} "
            f"({int(g.src[i])}->{int(g.adj[i])}); state corrupt")
    return ConstructedFlow(np.maximum(g.cap0 - st.cf, 0))


@dataclass
class PreflowReport:
    ok: bool
    problems: list[str]
    imbalance: np.ndarray


def verify_preflow(flow: ConstructedFlow, g: BiCsrGraph, s: int, t: int,
                   expected_excess: np.ndarray | None = None) -> PreflowReport:
    """Check capacity bounds and per-vertex imbalance of a flow assignment.

    With ``expected_excess`` given, the imbalance at every vertex must
    equal it (what the solver tracks, valid for preflows and deficits);
    otherwise strict conservation at all non-terminal vertices is
    required.
    """
    problems = []
    f = flow.f
    over = np.flatnonzero(f > g.cap0)
    if over.size:
        i = int(over[0])
        problems.append(
            f"{over.size} edge(s) exceed capacity, first at slot {i}: "
            f"f={int(f[i])} > cap={int(g.cap0[i])}")
    neg = np.flatnonzero(f < 0)
    if neg.size:
        problems.append(f"{neg.size} negative flow entries, first at slot {int(neg[0])}")

    imbalance = np.zeros(g.n, dtype=np.int64)
    np.add.at(imbalance, g.adj, f)
    np.subtract.at(imbalance, g.src, f)
    if expected_excess is not None:
        bad = np.flatnonzero(imbalance != expected_excess)
        if bad.size:
            v = int(bad[0])
            problems.append(
                f"{bad.size} vertices where imbalance differs from tracked "
                f"excess, first v={v}: {int(imbalance[v])} != {int(expected_excess[v])}")
    else:
        interior = np.ones(g.n, dtype=bool)
        interior[s] = interior[t] = False
        bad = np.flatnonzero(interior & (imbalance != 0))
        if bad.size:
            problems.append(
                f"conservation violated at {bad.size} interior vertices, "
                f"first v={int(bad[0])}")
    return PreflowReport(not problems, problems, imbalance)


@dataclass
class CutReport:
    ok: bool
    problems: list[str]


def verify_cut(cert: CutCertificate, g: BiCsrGraph, st: SolverState,
               claimed_flow: int) -> CutReport:
    """Check a cut certificate against the claimed flow value.

    The cut capacity must equal the claimed flow, every original A-to-B
    edge must be saturated (cf == 0), constructed flow on B-to-A
    original edges must be zero, and s/t must sit on the A/B sides.
    """
    problems = []
    a = cert.a_mask
    if not a[st.source]:
        problems.append("source is not on cut side A")
    if a[st.sink]:
        problems.append("sink is not on cut side B")

    crossing = g.is_original & a[g.src] & ~a[g.adj]
    recomputed = int(g.cap0[crossing].sum())
    if recomputed != cert.cut_capacity:
        problems.append(
            f"stored cut capacity {cert.cut_capacity} != recomputed {recomputed}")
    if cert.cut_capacity != claimed_flow:
        problems.append(
            f"cut capacity {cert.cut_capacity} != claimed flow {claimed_flow}")

    unsat = np.flatnonzero(crossing & (st.cf != 0))
    if unsat.size:
        i = int(unsat[0])
        problems.append(
            f"{unsat.size} A->B edge(s) not saturated, first "
            f"{int(g.src[i])}->{int(g.adj[i])} cf={int(st.cf[i])}")

    try:
        f = construct_flow(st, g).f
    except ValueError as exc:
        problems.append(str(exc))
    else:
        backward = g.is_original & ~a[g.src] & a[g.adj]
        loaded = np.flatnonzero(backward & (f != 0))
        if loaded.size:
            i = int(loaded[0])
            problems.append(
                f"{loaded.size} B->A edge(s) carry flow, first "
                f"{int(g.src[i])}->{int(g.adj[i])} f={int(f[i])}")
    return CutReport(not problems, problems)


@dataclass
class DistanceLabels:
    d: np.ndarray


def residual_distances(st: SolverState, g: BiCsrGraph,
                       bases: np.ndarray) -> DistanceLabels:
    """Multi-source BFS distance from each vertex to the base set,
    traversing residual edges in their flow direction (independent of
    the solver's BFS kernel; used to check height[v] <= d[v])."""
    n = g.n
    d = np.full(n, n, dtype=np.int64)
    q = deque()
    for b in np.asarray(bases, dtype=np.int64):
        d[b] = 0
        q.append(int(b))
    offsets, adj, rev, cf = g.offsets, g.adj, g.rev, st.cf
    while q:
        u = q.popleft()
        du = d[u]
        for i in range(int(offsets[u]), int(offsets[u + 1])):
            v = int(adj[i])
            if d[v] == n and cf[rev[i]] > 0:
                d[v] = du + 1
                q.append(v)
    return DistanceLabels(d)
