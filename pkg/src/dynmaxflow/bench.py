"""Update-batch generation and the dynamic-vs-static timing harness.

Batches re-weight a chosen fraction of the existing edges, with edges
out of the source and into the sink drawn with a configurable extra
weight so that batches actually move the flow value. The harness times
the two incremental solvers against a from-scratch solve on the updated
graph, checks that all three agree and pass their certificates, and
emits one CSV record per (spec, mode).
"""

import math
import statistics
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamic import UpdateBatch, solve_dynamic, solve_dynamic_pushpull, updated_edge_list
from .graph import BiCsrGraph, EdgeListGraph, GraphError, build_bicsr
from .io import ResultRecord
from .oracle import verify_cut
from .solver import FlowResult, SolverParams, solve_static

KINDS = {"inc": "inc", "incremental": "inc",
         "dec": "dec", "decremental": "dec",
         "mixed": "mixed"}


@dataclass(frozen=True)
class BatchSpec:
    """Recipe for one generated batch.

    pct: batch size as a percentage of the edge count (0 < pct <= 100).
    kind: "inc" (every new capacity strictly above the old), "dec"
        (strictly below), or "mixed" (half and half).
    bias: sampling weight multiplier for source-outgoing and
        sink-incoming edges (>= 1).
    """

    pct: float
    kind: str
    seed: int
    bias: float = 10.0

    def canonical_kind(self) -> str:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {sorted(set(KINDS))}, got {self.kind!r}")
        return KINDS[self.kind]

    def validate(self) -> None:
        if not 0 < self.pct <= 100:
            raise ValueError(f"pct must be in (0, 100], got {self.pct}")
        if self.bias < 1:
            raise ValueError(f"bias must be >= 1, got {self.bias}")
        self.canonical_kind()


def _weighted_sample(rng, pool: np.ndarray, weights: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return np.empty(0, dtype=np.int64)
    p = weights[pool] / weights[pool].sum()
    return rng.choice(pool, size=k, replace=False, p=p).astype(np.int64)


def generate_batch(g: EdgeListGraph, s: int, t: int, spec: BatchSpec) -> UpdateBatch:
    """Sample a deterministic update batch from the existing edges.

    ``g`` must be a normalized edge list (unique directed pairs, e.g.
    from ``BiCsrGraph.to_edge_list()``) so that distinct draws mean
    distinct edges. Incremental draws land in (old, 2*old + 10],
    decremental in [0, old); zero-capacity edges never receive
    decremental draws.
    """
    spec.validate()
    kind = spec.canonical_kind()
    m = g.m
    if m == 0:
        return UpdateBatch.from_updates([])
    keys = g.us * np.int64(g.n) + g.vs
    if np.unique(keys).size != m:
        raise GraphError("generate_batch expects a normalized edge list "
                         "(unique directed pairs)")
    k = math.ceil(spec.pct * m / 100)
    if k > m:
        warnings.warn(f"batch of {k} updates clamped to the {m} existing edges")
        k = m

    weights = np.ones(m, dtype=np.float64)
    weights[(g.us == s) | (g.vs == t)] *= spec.bias
    rng = np.random.default_rng(spec.seed)
    all_edges = np.arange(m, dtype=np.int64)
    positive = np.flatnonzero(g.caps > 0)

    def inc_caps(old: np.ndarray) -> np.ndarray:
        return rng.integers(old + 1, 2 * old + 11, dtype=np.int64)

    def dec_caps(old: np.ndarray) -> np.ndarray:
        return rng.integers(np.zeros_like(old), old, dtype=np.int64)

    if kind == "inc":
        pick = _weighted_sample(rng, all_edges, weights, k)
        new = inc_caps(g.caps[pick])
    elif kind == "dec":
        if positive.size < k:
            warnings.warn(f"decremental batch clamped to the {positive.size} "
                          f"positive-capacity edges")
            k = positive.size
        pick = _weighted_sample(rng, positive, weights, k)
        new = dec_caps(g.caps[pick])
    else:
        k_dec = min(k // 2, positive.size)
        dec_pick = _weighted_sample(rng, positive, weights, k_dec)
        rest = np.setdiff1d(all_edges, dec_pick)
        k_inc = min(k - k_dec, rest.size)
        inc_pick = _weighted_sample(rng, rest, weights, k_inc)
        pick = np.concatenate([dec_pick, inc_pick])
        new = np.concatenate([dec_caps(g.caps[dec_pick]), inc_caps(g.caps[inc_pick])])

    order = np.lexsort((g.vs[pick], g.us[pick]))
    return UpdateBatch(g.us[pick][order], g.vs[pick][order], new[order])


def random_graph(n: int, m: int, seed: int, cap_lo: int = 1,
                 cap_hi: int = 100) -> tuple[EdgeListGraph, int, int]:
    """Seeded random instance with s=0, t=n-1.

    A slice of the edge budget is forced out of the source and into the
    sink so instances routinely carry nonzero flow; self-loops and
    duplicate pairs are left for normalization to handle.
    """
    if n < 2:
        raise ValueError("need at least two vertices")
    rng = np.random.default_rng(seed)
    s, t = 0, n - 1
    k = min(n - 1, max(1, m // 8), m // 2)
    su = np.full(k, s, dtype=np.int64)
    sv = rng.integers(1, n, k, dtype=np.int64)
    tu = rng.integers(0, n - 1, k, dtype=np.int64)
    tv = np.full(k, t, dtype=np.int64)
    rest = m - 2 * k
    ru = rng.integers(0, n, rest, dtype=np.int64)
    rv = rng.integers(0, n, rest, dtype=np.int64)
    us = np.concatenate([su, tu, ru])
    vs = np.concatenate([sv, tv, rv])
    caps = rng.integers(cap_lo, cap_hi + 1, us.shape[0], dtype=np.int64)
    return EdgeListGraph(n, us, vs, caps), s, t


BENCH_MODES = ("dynamic", "pushpull", "static")


def run_benchmark(g: EdgeListGraph, s: int, t: int, specs: list[BatchSpec],
                  params: SolverParams | None = None, reps: int = 3,
                  instance: str = "graph") -> list[ResultRecord]:
    """Time solve_dynamic, solve_dynamic_pushpull, and a from-scratch
    static solve for each batch spec.

    Each mode runs ``reps`` times on fresh copies and reports per-phase
    medians. A record is verified when its certificate checks passed on
    every repetition and all three modes agreed on the flow value.
    """
    params = params or SolverParams()
    csr = build_bicsr(g)
    normalized = csr.to_edge_list()
    prior = solve_static(csr, s, t, params)
    records = []
    for spec in specs:
        batch = generate_batch(normalized, s, t, spec)
        flows: dict[str, int] = {}
        partial: list[tuple[str, dict, bool]] = []
        for mode in BENCH_MODES:
            samples = {"bfs": [], "push": [], "repair": [], "total": []}
            rounds = 0
            certs_ok = True
            for _ in range(max(1, reps)):
                if mode == "static":
                    updated = build_bicsr(updated_edge_list(csr, batch))
                    t0 = time.perf_counter()
                    res = solve_static(updated, s, t, params)
                    elapsed = time.perf_counter() - t0
                    used_graph = updated
                else:
                    gg = csr.copy()
                    stc = prior.state.copy()
                    solve = solve_dynamic if mode == "dynamic" else solve_dynamic_pushpull
                    t0 = time.perf_counter()
                    res = solve(stc, gg, batch, params)
                    elapsed = time.perf_counter() - t0
                    used_graph = gg
                samples["total"].append(elapsed)
                for key in ("bfs", "push", "repair"):
                    samples[key].append(res.phase_times[key])
                rounds = res.rounds
                certs_ok &= verify_cut(res.certificate, used_graph, res.state,
                                       res.flow_value).ok
            flows[mode] = res.flow_value
            med = {key: statistics.median(vals) * 1000.0 for key, vals in samples.items()}
            partial.append((mode, med, rounds, certs_ok))
        agree = len(set(flows.values())) == 1
        for mode, med, rounds, certs_ok in partial:
            records.append(ResultRecord(
                instance=instance, mode=mode, batch_kind=spec.canonical_kind(),
                batch_pct=spec.pct, flow_value=flows[mode], rounds=rounds,
                bfs_ms=med["bfs"], push_ms=med["push"], repair_ms=med["repair"],
                total_ms=med["total"], verified=bool(certs_ok and agree)))
    return records


def write_plot_data(records: list[ResultRecord], directory) -> list[str]:
    """Gnuplot-style data files, one per batch kind: columns are the
    batch percentage followed by the median total ms of each mode."""
    import os

    written = []
    kinds = sorted({r.batch_kind for r in records})
    for kind in kinds:
        rows: dict[float, dict[str, float]] = {}
        for r in records:
            if r.batch_kind == kind:
                rows.setdefault(r.batch_pct, {})[r.mode] = r.total_ms
        path = os.path.join(directory, f"{kind}.dat")
        with open(path, "w") as fh:
            fh.write("# pct " + " ".join(BENCH_MODES) + "\n")
            for pct in sorted(rows):
                cells = " ".join(f"{rows[pct].get(mode, float('nan')):.3f}"
                                 for mode in BENCH_MODES)
                fh.write(f"{pct:g} {cells}\n")
        written.append(path)
    return written
