"""Incremental max-flow recomputation after a batch of capacity updates.

Continues from the terminated state of a previous solve. The batch's
capacity deltas are folded into the residuals (reversing committed flow
wherever a new capacity drops below it), excess is recomputed from the
constructed flow, the source is re-saturated, and push-relabel rounds
run with the sink and every deficient vertex as height-0 bases. The
final flow is the excess collected at height 0, and it always matches a
from-scratch solve on the updated graph.

The push-pull mode splits the graph along the previous min cut,
saturates any crossing residual capacity the updates re-opened, and
drains the two sides with concurrent push and pull pipelines that by
construction touch disjoint vertices and edges, before a final
connecting pass over whatever remains.
"""

import threading
import time
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .graph import BiCsrGraph, EdgeListGraph
from .kernels import (bfs_heights, pull_relabel_chunk, pull_remove_invalid_chunk,
                      push_relabel_chunk, recompute_excess_kernel,
                      remove_invalid_chunk)
from .solver import (_NO_REGION, FlowResult, PhasePool, SolverError, SolverParams,
                     _push_rounds, _RunStats, active_worklist, extract_certificate,
                     operation_ceiling)
from .state import SolverState, active_mask, deficient_mask, saturate_source


class BatchError(ValueError):
    """Update batch references a missing edge or contains duplicates."""


@dataclass(frozen=True)
class UpdateBatch:
    """Edge re-weightings (u, v, new_cap) applied atomically as one batch."""

    us: np.ndarray
    vs: np.ndarray
    new_caps: np.ndarray

    @classmethod
    def from_updates(cls, updates: Iterable[tuple[int, int, int]]) -> "UpdateBatch":
        rows = list(updates)
        us = np.fromiter((r[0] for r in rows), dtype=np.int64, count=len(rows))
        vs = np.fromiter((r[1] for r in rows), dtype=np.int64, count=len(rows))
        caps = np.fromiter((r[2] for r in rows), dtype=np.int64, count=len(rows))
        return cls(us, vs, caps)

    def __len__(self) -> int:
        return int(self.us.shape[0])

    def updates(self):
        for u, v, c in zip(self.us, self.vs, self.new_caps):
            yield int(u), int(v), int(c)


def _resolve_batch(g: BiCsrGraph, batch: UpdateBatch) -> np.ndarray:
    """Edge slots targeted by the batch; rejects unknown edges, stubs,
    duplicates, and negative capacities."""
    if len(batch) == 0:
        return np.empty(0, dtype=np.int64)
    neg = np.flatnonzero(batch.new_caps < 0)
    if neg.size:
        k = int(neg[0])
        raise BatchError(
            f"update {k} ({int(batch.us[k])}->{int(batch.vs[k])}): "
            f"negative capacity {int(batch.new_caps[k])}")
    idx = g.edge_indices(batch.us, batch.vs)
    known = (idx >= 0) & g.is_original[np.maximum(idx, 0)]
    bad = np.flatnonzero(~known)
    if bad.size:
        k = int(bad[0])
        raise BatchError(
            f"update {k} targets edge {int(batch.us[k])}->{int(batch.vs[k])} "
            f"which is not an edge of the original graph")
    order = np.argsort(idx, kind="stable")
    dup = np.flatnonzero(idx[order][1:] == idx[order][:-1])
    if dup.size:
        k = int(order[dup[0] + 1])
        raise BatchError(
            f"duplicate update for edge {int(batch.us[k])}->{int(batch.vs[k])}")
    return idx


def apply_updates(st: SolverState, g: BiCsrGraph, batch: UpdateBatch) -> None:
    """Fold new capacities into the residuals.

    Each targeted edge gets cf += (new - old) and its stored capacity
    replaced. A residual driven negative (new capacity below the
    committed flow) is repaired by reversing that much flow: the excess
    moves to the reverse direction and cf becomes 0. Residual-sum
    conservation holds against the new capacities afterwards.
    """
    idx = _resolve_batch(g, batch)
    if idx.size == 0:
        return
    st.cf[idx] += batch.new_caps - g.cap0[idx]
    g.cap0[idx] = batch.new_caps
    negative = idx[st.cf[idx] < 0]
    if negative.size:
        amounts = st.cf[negative].copy()
        st.cf[g.rev[negative]] += amounts
        st.cf[negative] = 0
    if bool((st.cf[idx] < 0).any()) or bool((st.cf[g.rev[idx]] < 0).any()):
        raise SolverError("negative residual survived update repair; state corrupt")


def recompute_excess(st: SolverState, g: BiCsrGraph) -> None:
    """Rebuild excess from the constructed flow f = max(0, cap - cf)."""
    recompute_excess_kernel(g.offsets, g.adj, g.rev, st.cf, g.cap0, st.excess)


def _dynamic_bases(st: SolverState) -> np.ndarray:
    mask = deficient_mask(st)
    mask[st.sink] = True
    return np.flatnonzero(mask)


def backward_bfs_dynamic(st: SolverState, g: BiCsrGraph) -> None:
    """Global relabel with the sink and all deficient vertices at height 0.

    The source is pinned at height n; vertices that reach no base stay
    at n.
    """
    queue = np.empty(g.n, np.int64)
    bfs_heights(g.offsets, g.adj, g.rev, st.cf, st.height, _dynamic_bases(st),
                g.n, False, st.source, _NO_REGION, -1, queue)


def _require_terminated(st: SolverState, what: str) -> None:
    if bool(active_mask(st).any()):
        raise SolverError(f"{what} requires a terminated solver state")


def _collect_flow(st: SolverState) -> int:
    """Flow value at dynamic termination: total excess at height 0."""
    return int(st.excess[st.height == 0].sum())


def solve_dynamic(st: SolverState, g: BiCsrGraph, batch: UpdateBatch,
                  params: SolverParams | None = None) -> FlowResult:
    """Recompute the max flow after a capacity-update batch.

    Mutates ``st`` and ``g.cap0`` in place and leaves another terminated
    state behind, so batches can be chained. The result equals a
    from-scratch solve on the updated graph.
    """
    params = params or SolverParams()
    params.validate()
    _require_terminated(st, "solve_dynamic")
    apply_updates(st, g, batch)
    recompute_excess(st, g)
    saturate_source(st, g)
    stats = _RunStats()
    queue = np.empty(g.n, np.int64)
    with PhasePool(params.resolve_threads()) as pool:
        _push_rounds(st, g,
                     kernel_cycles=params.resolve_kernel_cycles(g),
                     mode=params.mode, pool=pool, queue=queue,
                     bases_fn=lambda: _dynamic_bases(st), forbidden=st.source,
                     ceiling=operation_ceiling(g.n, g.m_original),
                     stats=stats, instrument=params.instrument)
    flow = _collect_flow(st)
    cert = extract_certificate(st, g)
    if flow != cert.cut_capacity:
        raise SolverError(
            f"flow {flow} does not match cut capacity {cert.cut_capacity}")
    return FlowResult(flow, stats.rounds, stats.times, cert,
                      stats.pushes, stats.relabels, stats.repairs, st, g)


def _saturate_crossing(st: SolverState, g: BiCsrGraph, side_a: np.ndarray) -> int:
    """Push the full residual across every A-to-B edge of the prior cut.

    Updates may have re-opened capacity across the old min cut; once it
    is saturated again, no residual edge leads from the A side to the B
    side, which is what keeps the two pipelines disjoint.
    """
    idx = np.flatnonzero((st.cf > 0) & side_a[g.src] & ~side_a[g.adj])
    if idx.size:
        amounts = st.cf[idx].copy()
        st.cf[idx] = 0
        st.cf[g.rev[idx]] += amounts
        np.subtract.at(st.excess, g.src[idx], amounts)
        np.add.at(st.excess, g.adj[idx], amounts)
    return int(idx.size)


def _pipeline_worklist(st: SolverState, region: np.ndarray, my_region: int,
                       mode: str, pull: bool) -> np.ndarray:
    if mode == "topology":
        mask = region == my_region
        mask[st.source] = False
        mask[st.sink] = False
        return np.flatnonzero(mask)
    if pull:
        mask = (st.excess < 0) & (st.height < st.n_vertices) & (region == my_region)
    else:
        mask = active_mask(st) & (region == my_region)
    mask[st.source] = False
    mask[st.sink] = False
    return np.flatnonzero(mask)


def _push_pipeline(st: SolverState, g: BiCsrGraph, *, kernel_cycles: int,
                   mode: str, threads: int, region: np.ndarray,
                   stats: _RunStats, ceiling: int) -> None:
    """Drain overflow on the sink side toward the sink and the deficient
    vertices of that side. Never reads or writes the pull side."""
    n = g.n
    queue = np.empty(n, np.int64)
    with PhasePool(threads) as pool:
        while True:
            mask = deficient_mask(st) & (region == 0)
            mask[st.sink] = True
            bases = np.flatnonzero(mask)
            t0 = time.perf_counter()
            bfs_heights(g.offsets, g.adj, g.rev, st.cf, st.height, bases, n,
                        False, -1, region, 0, queue)
            stats.times["bfs"] += time.perf_counter() - t0
            if not bool((active_mask(st) & (region == 0)).any()):
                break
            work = _pipeline_worklist(st, region, 0, mode, pull=False)
            t0 = time.perf_counter()
            results = pool.run(push_relabel_chunk, work, g.offsets, g.adj,
                               g.rev, st.cf, st.excess, st.height, n,
                               kernel_cycles, region, 0)
            stats.times["push"] += time.perf_counter() - t0
            for p, r in results:
                stats.pushes += int(p)
                stats.relabels += int(r)
            t0 = time.perf_counter()
            repaired = pool.run(remove_invalid_chunk, work, g.offsets, g.adj,
                                g.rev, st.cf, st.excess, st.height, region, 0)
            stats.times["repair"] += time.perf_counter() - t0
            stats.repairs += int(sum(repaired))
            stats.rounds += 1
            stats.check_ceiling(ceiling)


def _pull_pipeline(st: SolverState, g: BiCsrGraph, *, kernel_cycles: int,
                   mode: str, threads: int, region: np.ndarray,
                   stats: _RunStats, ceiling: int) -> None:
    """Satisfy deficits on the source side by pulling flow from the
    overflowing vertices (and the source) of that side.

    Heights here are the pull ordering: distance from the supply bases
    along forward residual edges. Never reads or writes the push side.
    """
    n = g.n
    queue = np.empty(n, np.int64)
    with PhasePool(threads) as pool:
        while True:
            mask = (st.excess > 0) & (region == 1)
            mask[st.sink] = False
            mask[st.source] = True
            bases = np.flatnonzero(mask)
            t0 = time.perf_counter()
            bfs_heights(g.offsets, g.adj, g.rev, st.cf, st.height, bases, n,
                        True, -1, region, 1, queue)
            stats.times["bfs"] += time.perf_counter() - t0
            pull_active = (st.excess < 0) & (st.height < n) & (region == 1)
            pull_active[st.source] = False
            pull_active[st.sink] = False
            if not bool(pull_active.any()):
                break
            work = _pipeline_worklist(st, region, 1, mode, pull=True)
            t0 = time.perf_counter()
            results = pool.run(pull_relabel_chunk, work, g.offsets, g.adj,
                               g.rev, st.cf, st.excess, st.height, n,
                               kernel_cycles, region, 1)
            stats.times["push"] += time.perf_counter() - t0
            for p, r in results:
                stats.pushes += int(p)
                stats.relabels += int(r)
            t0 = time.perf_counter()
            repaired = pool.run(pull_remove_invalid_chunk, work, g.offsets,
                                g.adj, g.rev, st.cf, st.excess, st.height,
                                region, 1)
            stats.times["repair"] += time.perf_counter() - t0
            stats.repairs += int(sum(repaired))
            stats.rounds += 1
            stats.check_ceiling(ceiling)


def solve_dynamic_pushpull(st: SolverState, g: BiCsrGraph, batch: UpdateBatch,
                           params: SolverParams | None = None) -> FlowResult:
    """Dynamic recompute with concurrent push and pull pipelines.

    Requires the prior solve's terminal heights (they encode the cut
    certificate); the two pipelines run over the disjoint halves of that
    cut, then a final ordinary pass connects whatever overflow remains
    on the sink side with deficits on the source side. The flow value is
    identical to :func:`solve_dynamic`.
    """
    params = params or SolverParams()
    params.validate()
    _require_terminated(st, "solve_dynamic_pushpull")
    side_a = st.height == st.n_vertices
    if not side_a[st.source] or side_a[st.sink]:
        raise SolverError(
            "prior state carries no usable cut certificate; run a full solve first")

    apply_updates(st, g, batch)
    recompute_excess(st, g)
    saturate_source(st, g)
    stats = _RunStats()
    t0 = time.perf_counter()
    _saturate_crossing(st, g, side_a)
    stats.times["push"] += time.perf_counter() - t0

    region = side_a.astype(np.int8)  # 1 = pull side (source half), 0 = push side
    threads = params.resolve_threads()
    per_pipeline = max(1, threads // 2)
    kernel_cycles = params.resolve_kernel_cycles(g)
    ceiling = 2 * operation_ceiling(g.n, g.m_original)

    push_stats = _RunStats()
    pull_stats = _RunStats()
    if threads > 1:
        errors: list[BaseException] = []

        def runner(fn, pipeline_stats):
            def run():
                try:
                    fn(st, g, kernel_cycles=kernel_cycles, mode=params.mode,
                       threads=per_pipeline, region=region,
                       stats=pipeline_stats, ceiling=ceiling)
                except BaseException as exc:  # propagate after join
                    errors.append(exc)
            return run

        workers = [threading.Thread(target=runner(_push_pipeline, push_stats)),
                   threading.Thread(target=runner(_pull_pipeline, pull_stats))]
        for w in workers:
            w.start()
        for w in workers:
            w.join()
        if errors:
            raise errors[0]
    else:
        _push_pipeline(st, g, kernel_cycles=kernel_cycles, mode=params.mode,
                       threads=1, region=region, stats=push_stats, ceiling=ceiling)
        _pull_pipeline(st, g, kernel_cycles=kernel_cycles, mode=params.mode,
                       threads=1, region=region, stats=pull_stats, ceiling=ceiling)

    for s_ in (push_stats, pull_stats):
        stats.rounds += s_.rounds
        stats.pushes += s_.pushes
        stats.relabels += s_.relabels
        stats.repairs += s_.repairs
        for key, val in s_.times.items():
            stats.times[key] += val

    # Final pass: only residual connections from overflow on the sink side
    # to deficits on the source side can still carry flow.
    stats.round_base = stats.rounds
    queue = np.empty(g.n, np.int64)
    with PhasePool(threads) as pool:
        _push_rounds(st, g, kernel_cycles=kernel_cycles, mode=params.mode,
                     pool=pool, queue=queue,
                     bases_fn=lambda: _dynamic_bases(st), forbidden=st.source,
                     ceiling=ceiling, stats=stats, instrument=params.instrument)

    flow = _collect_flow(st)
    cert = extract_certificate(st, g)
    if flow != cert.cut_capacity:
        raise SolverError(
            f"flow {flow} does not match cut capacity {cert.cut_capacity}")
    return FlowResult(flow, stats.rounds, stats.times, cert,
                      stats.pushes, stats.relabels, stats.repairs, st, g)


def updated_edge_list(g: BiCsrGraph, batch: UpdateBatch) -> EdgeListGraph:
    """The updated graph as a fresh normalized edge list (for from-scratch
    solves and oracle comparisons); ``g`` is left untouched."""
    idx = _resolve_batch(g, batch)
    caps = g.cap0.copy()
    caps[idx] = batch.new_caps
    keep = g.is_original
    return EdgeListGraph(g.n, g.src[keep].copy(), g.adj[keep].copy(), caps[keep])
