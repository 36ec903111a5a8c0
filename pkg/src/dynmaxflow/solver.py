"""Static max-flow solver.

Repeats rounds of global relabel (level-synchronous backward BFS from the
sink), a bounded push-relabel phase over the worklist, and steep-edge
repair, until no active vertices remain. A phase is a parallel-for over
worklist chunks separated by full barriers; the outer loop is sequential.
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._accel import NUMBA_ENABLED
from .graph import BiCsrGraph
from .kernels import bfs_heights, push_relabel_chunk, remove_invalid_chunk
from .state import (SolverState, active_mask, deficient_mask, init_residuals,
                    saturate_source)


class SolverError(RuntimeError):
    """Operation ceiling exceeded or a terminal consistency check failed."""


MODES = ("data", "topology")

_NO_REGION = np.empty(0, np.int8)


def default_threads() -> int:
    return min(4, os.cpu_count() or 1)


def operation_ceiling(n: int, m_original: int) -> int:
    """Generous bound on total pushes + relabels for one solve.

    At most n relabels per vertex, n*E saturating pushes, and under
    4*n^2*(n+E) unsaturating pushes; exceeding the sum indicates a bug
    rather than a slow instance.
    """
    return n * n + n * m_original + 4 * n * n * (n + m_original)


@dataclass
class SolverParams:
    """Solver tuning knobs.

    kernel_cycles: max pushes/relabels per active vertex per phase; 0
        derives the average-degree default max(1, ceil(E/V)).
    mode: "data" runs only the active-vertex worklist; "topology"
        launches every non-terminal vertex and re-checks the active
        predicate per step.
    deterministic: single worker in vertex-id order, for reproducible
        traces. Flow values match parallel runs either way.
    threads: worker threads per phase (0 = small default). Forced to 1
        in deterministic mode and on the interpreted backend.
    instrument: optional callback(state, graph, round_index, label)
        invoked at round boundaries with label "bfs" or "repair".
    """

    kernel_cycles: int = 0
    mode: str = "data"
    deterministic: bool = False
    threads: int = 0
    instrument: Optional[Callable] = None

    def resolve_threads(self) -> int:
        if self.deterministic or not NUMBA_ENABLED:
            return 1
        return self.threads if self.threads > 0 else default_threads()

    def resolve_kernel_cycles(self, g: BiCsrGraph) -> int:
        if self.kernel_cycles > 0:
            return self.kernel_cycles
        if self.kernel_cycles < 0:
            raise ValueError("kernel_cycles must be >= 1 (or 0 for the default)")
        return max(1, -(-g.m_original // g.n))

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass
class CutCertificate:
    """Vertex bipartition by height threshold, proving the flow value.

    Side A is the set stuck at height n (contains the source); side B is
    everything below (contains the sink). cut_capacity sums original
    capacities of A-to-B edges.
    """

    a_mask: np.ndarray
    cut_capacity: int

    @property
    def partition_a(self) -> np.ndarray:
        return np.flatnonzero(self.a_mask)

    @property
    def partition_b(self) -> np.ndarray:
        return np.flatnonzero(~self.a_mask)


@dataclass
class FlowResult:
    flow_value: int
    rounds: int
    phase_times: dict[str, float]
    certificate: CutCertificate
    pushes: int = 0
    relabels: int = 0
    repairs: int = 0
    state: SolverState = None
    graph: BiCsrGraph = None


class PhasePool:
    """Splits a worklist into chunks across worker threads.

    Collecting every future's result before returning is the phase
    barrier the algorithm requires.
    """

    def __init__(self, threads: int):
        self.threads = max(1, threads)
        self._pool = ThreadPoolExecutor(max_workers=self.threads) if self.threads > 1 else None

    def run(self, fn, work: np.ndarray, *args) -> list:
        size = int(work.shape[0])
        if size == 0:
            return []
        k = min(self.threads, size)
        if k <= 1 or self._pool is None:
            return [fn(work, 0, size, *args)]
        bounds = [(size * j) // k for j in range(k + 1)]
        futures = [self._pool.submit(fn, work, bounds[j], bounds[j + 1], *args)
                   for j in range(k)]
        return [f.result() for f in futures]

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def backward_bfs(st: SolverState, g: BiCsrGraph) -> None:
    """Global relabel: heights become exact residual distances to the sink.

    Vertices that cannot reach the sink in the residual graph end at
    height n.
    """
    queue = np.empty(g.n, np.int64)
    bases = np.array([st.sink], dtype=np.int64)
    bfs_heights(g.offsets, g.adj, g.rev, st.cf, st.height, bases, g.n,
                False, -1, _NO_REGION, -1, queue)


def active_worklist(st: SolverState, mode: str = "data") -> np.ndarray:
    """Vertices a phase will launch: the active set, or everything but
    s and t in topology mode (the kernel re-checks the predicate)."""
    if mode == "topology":
        mask = np.ones(st.n_vertices, dtype=bool)
        mask[st.source] = False
        mask[st.sink] = False
        return np.flatnonzero(mask)
    return np.flatnonzero(active_mask(st))


def extract_certificate(st: SolverState, g: BiCsrGraph) -> CutCertificate:
    """Cut certificate of a terminated solve; rejects mid-run states."""
    if bool(active_mask(st).any()):
        raise SolverError("certificate requested before termination")
    a = st.height == st.n_vertices
    crossing = g.is_original & a[g.src] & ~a[g.adj]
    return CutCertificate(a, int(g.cap0[crossing].sum()))


@dataclass
class _RunStats:
    rounds: int = 0
    pushes: int = 0
    relabels: int = 0
    repairs: int = 0
    times: dict = field(default_factory=lambda: {"bfs": 0.0, "push": 0.0, "repair": 0.0})
    round_base: int = 0

    def check_ceiling(self, ceiling: int) -> None:
        if self.pushes + self.relabels > ceiling:
            raise SolverError(
                f"push/relabel count {self.pushes + self.relabels} exceeded the "
                f"termination ceiling {ceiling}; solver state is likely corrupt"
            )


def _push_rounds(st: SolverState, g: BiCsrGraph, *, kernel_cycles: int,
                 mode: str, pool: PhasePool, queue: np.ndarray,
                 bases_fn: Callable[[], np.ndarray], forbidden: int,
                 ceiling: int, stats: _RunStats,
                 instrument: Optional[Callable]) -> None:
    """Run (global relabel, push phase, repair) rounds until no active
    vertex remains. Shared by the static and dynamic solvers."""
    n = g.n
    local_round = 0
    while True:
        rnd = stats.round_base + local_round
        t0 = time.perf_counter()
        bfs_heights(g.offsets, g.adj, g.rev, st.cf, st.height, bases_fn(),
                    n, False, forbidden, _NO_REGION, -1, queue)
        stats.times["bfs"] += time.perf_counter() - t0
        if instrument is not None:
            instrument(st, g, rnd, "bfs")
        if not bool(active_mask(st).any()):
            break
        work = active_worklist(st, mode)
        t0 = time.perf_counter()
        results = pool.run(push_relabel_chunk, work, g.offsets, g.adj, g.rev,
                           st.cf, st.excess, st.height, n, kernel_cycles,
                           _NO_REGION, -1)
        stats.times["push"] += time.perf_counter() - t0
        for p, r in results:
            stats.pushes += int(p)
            stats.relabels += int(r)
        t0 = time.perf_counter()
        repaired = pool.run(remove_invalid_chunk, work, g.offsets, g.adj,
                            g.rev, st.cf, st.excess, st.height, _NO_REGION, -1)
        stats.times["repair"] += time.perf_counter() - t0
        stats.repairs += int(sum(repaired))
        stats.rounds += 1
        local_round += 1
        stats.check_ceiling(ceiling)
        if instrument is not None:
            instrument(st, g, rnd, "repair")


def _validate_endpoints(g: BiCsrGraph, source: int, sink: int) -> None:
    if not 0 <= source < g.n:
        raise ValueError(f"source {source} out of range [0, {g.n})")
    if not 0 <= sink < g.n:
        raise ValueError(f"sink {sink} out of range [0, {g.n})")
    if source == sink:
        raise ValueError("source and sink must differ")


def solve_static(g: BiCsrGraph, source: int, sink: int,
                 params: SolverParams | None = None) -> FlowResult:
    """Maximum flow on a static graph.

    Returns the flow value (the sink's excess at termination) together
    with the cut certificate whose capacity equals it, plus round and
    operation counters and per-phase wall-clock times. The terminal
    state is attached so a dynamic solve can continue from it.
    """
    params = params or SolverParams()
    params.validate()
    _validate_endpoints(g, source, sink)
    st = init_residuals(g, source, sink)
    saturate_source(st, g)
    stats = _RunStats()
    queue = np.empty(g.n, np.int64)
    bases = np.array([sink], dtype=np.int64)
    with PhasePool(params.resolve_threads()) as pool:
        _push_rounds(st, g,
                     kernel_cycles=params.resolve_kernel_cycles(g),
                     mode=params.mode, pool=pool, queue=queue,
                     bases_fn=lambda: bases, forbidden=-1,
                     ceiling=operation_ceiling(g.n, g.m_original),
                     stats=stats, instrument=params.instrument)
    flow = int(st.excess[sink])
    cert = extract_certificate(st, g)
    if flow != cert.cut_capacity:
        raise SolverError(
            f"flow {flow} does not match cut capacity {cert.cut_capacity}")
    return FlowResult(flow, stats.rounds, stats.times, cert,
                      stats.pushes, stats.relabels, stats.repairs, st, g)
