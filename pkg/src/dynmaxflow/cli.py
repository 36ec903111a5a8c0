"""Command-line interface.

Subcommands: ``static`` (solve and verify one graph), ``dynamic`` (prior
solve, apply an update batch, compare against a from-scratch solve),
``gen-updates`` (emit a generated batch file), ``verify`` (full oracle
and certificate suite), ``bench`` (timing records as CSV), ``convert``
(whitespace edge list to DIMACS). Exit codes: 0 ok, 1 verification
failure, 2 usage or parse error.
"""

import argparse
import sys
import time

import numpy as np

from ._accel import NUMBA_ENABLED, backend_name
from .bench import BENCH_MODES, BatchSpec, generate_batch, run_benchmark, write_plot_data
from .dynamic import (BatchError, solve_dynamic, solve_dynamic_pushpull,
                      updated_edge_list)
from .graph import GraphError, build_bicsr
from .io import ParseError, parse_edge_list, parse_graph, parse_updates, write_graph, write_results, write_updates
from .oracle import construct_flow, dinic_maxflow, residual_distances, verify_cut, verify_preflow
from .solver import SolverError, SolverParams, solve_static

DINIC_LIMIT = 5000  # oracle is plain Python; skip it beyond this size


def _params(args) -> SolverParams:
    return SolverParams(kernel_cycles=args.kernel_cycles,
                        mode="topology" if args.topology_driven else "data",
                        deterministic=args.deterministic,
                        threads=args.threads)


def _phase_line(res) -> str:
    t = res.phase_times
    return (f"rounds {res.rounds}  bfs {t['bfs'] * 1e3:.1f} ms  "
            f"push {t['push'] * 1e3:.1f} ms  repair {t['repair'] * 1e3:.1f} ms")


def _check(label: str, ok: bool, detail: str = "") -> bool:
    print(f"{'ok  ' if ok else 'FAIL'} {label}" + (f": {detail}" if detail and not ok else ""))
    return ok


def _verify_solve(res, g, s, t, edge_list, label: str) -> bool:
    ok = _check(f"{label}: certificate", *_report(verify_cut(
        res.certificate, g, res.state, res.flow_value)))
    flow = construct_flow(res.state, g)
    ok &= _check(f"{label}: flow construction", *_report(verify_preflow(
        flow, g, s, t, expected_excess=res.state.excess)))
    bases = res.state.excess < 0  # deficient vertices are height-0 bases
    bases[s] = False
    bases[t] = True
    d = residual_distances(res.state, g, np.flatnonzero(bases)).d
    ok &= _check(f"{label}: heights bounded by residual distance",
                 bool(np.all(res.state.height <= d)))
    if g.n <= DINIC_LIMIT:
        want = dinic_maxflow(edge_list, s, t)
        ok &= _check(f"{label}: blocking-flow oracle agreement",
                     res.flow_value == want,
                     f"solver {res.flow_value} oracle {want}")
    else:
        print(f"skip {label}: oracle (n={g.n} above {DINIC_LIMIT})")
    return ok


def _report(rep) -> tuple[bool, str]:
    return rep.ok, "; ".join(rep.problems)


def cmd_static(args) -> int:
    edges, s, t = parse_graph(args.graph)
    g = build_bicsr(edges)
    t0 = time.perf_counter()
    res = solve_static(g, s, t, _params(args))
    elapsed = time.perf_counter() - t0
    print(f"flow_value {res.flow_value}")
    print(f"static {elapsed * 1e3:.1f} ms  {_phase_line(res)}")
    rep = verify_cut(res.certificate, g, res.state, res.flow_value)
    if not _check("certificate", *_report(rep)):
        return 1
    return 0


def cmd_dynamic(args) -> int:
    edges, s, t = parse_graph(args.graph)
    g = build_bicsr(edges)
    batch = parse_updates(args.updates, g)
    params = _params(args)
    prior = solve_static(g, s, t, params)
    print(f"prior_flow {prior.flow_value}")

    solve = solve_dynamic if args.mode == "push" else solve_dynamic_pushpull
    updated = build_bicsr(updated_edge_list(g, batch))
    t0 = time.perf_counter()
    res = solve(prior.state, g, batch, params)
    dyn_ms = (time.perf_counter() - t0) * 1e3
    print(f"flow_value {res.flow_value}")
    print(f"dynamic[{args.mode}] {dyn_ms:.1f} ms  {_phase_line(res)}")

    t0 = time.perf_counter()
    scratch = solve_static(updated, s, t, params)
    static_ms = (time.perf_counter() - t0) * 1e3
    print(f"static_from_scratch {static_ms:.1f} ms  {_phase_line(scratch)}")

    ok = _check("mode agreement", res.flow_value == scratch.flow_value,
                f"dynamic {res.flow_value} static {scratch.flow_value}")
    ok &= _check("certificate", *_report(verify_cut(res.certificate, g,
                                                    res.state, res.flow_value)))
    return 0 if ok else 1


def cmd_gen_updates(args) -> int:
    edges, s, t = parse_graph(args.graph)
    g = build_bicsr(edges)
    spec = BatchSpec(pct=args.pct, kind=args.kind, seed=args.seed, bias=args.bias)
    batch = generate_batch(g.to_edge_list(), s, t, spec)
    if args.output:
        write_updates(args.output, batch)
        print(f"wrote {len(batch)} updates to {args.output}")
    else:
        for u, v, c in batch.updates():
            print(f"u {u + 1} {v + 1} {c}")
    return 0


def cmd_verify(args) -> int:
    edges, s, t = parse_graph(args.graph)
    g = build_bicsr(edges)
    params = _params(args)
    res = solve_static(g, s, t, params)
    print(f"flow_value {res.flow_value}")
    ok = _verify_solve(res, g, s, t, edges, "static")
    if args.updates:
        batch = parse_updates(args.updates, g)
        updated_edges = updated_edge_list(g, batch)
        flows = {}
        for label, solve in (("dynamic", solve_dynamic),
                             ("pushpull", solve_dynamic_pushpull)):
            gg = g.copy()
            stc = res.state.copy()
            dres = solve(stc, gg, batch, params)
            flows[label] = dres.flow_value
            ok &= _verify_solve(dres, gg, s, t, updated_edges, label)
        ok &= _check("dynamic modes agree", len(set(flows.values())) == 1,
                     str(flows))
    return 0 if ok else 1


def cmd_bench(args) -> int:
    edges, s, t = parse_graph(args.graph)
    params = _params(args)
    pcts = [float(x) for x in args.pcts.split(",") if x]
    kinds = [k for k in args.kinds.split(",") if k]
    specs = [BatchSpec(pct=pct, kind=kind, seed=args.seed + i, bias=args.bias)
             for i, (kind, pct) in enumerate((k, p) for k in kinds for p in pcts)]
    records = run_benchmark(edges, s, t, specs, params, reps=args.reps,
                            instance=args.graph)
    metadata = {"backend": backend_name(), "reps": args.reps,
                "seed": args.seed, "threads": params.resolve_threads(),
                "timing": "median over reps"}
    if args.output:
        write_results(args.output, records, metadata)
        print(f"wrote {len(records)} records to {args.output}")
    else:
        write_results(sys.stdout, records, metadata)
    if args.plot_data:
        for path in write_plot_data(records, args.plot_data):
            print(f"wrote {path}")
    return 0 if all(r.verified for r in records) else 1


def cmd_convert(args) -> int:
    edges = parse_edge_list(args.edgelist, one_indexed=args.one_indexed)
    if not 0 <= args.source < edges.n or not 0 <= args.sink < edges.n:
        raise GraphError(f"source/sink out of range [0, {edges.n})")
    if args.source == args.sink:
        raise GraphError("source and sink must differ")
    write_graph(args.output, edges, args.source, args.sink)
    print(f"wrote {args.output} (n={edges.n}, m={edges.m})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dynmaxflow",
        description="Parallel push-relabel max flow with incremental "
                    "recomputation after batched capacity updates "
                    f"(backend: {backend_name()})")
    p.add_argument("--kernel-cycles", type=int, default=0, metavar="K",
                   help="pushes/relabels per active vertex per phase "
                        "(default: average degree)")
    p.add_argument("--threads", type=int, default=0, metavar="T",
                   help="worker threads per phase (default: small auto)")
    p.add_argument("--deterministic", action="store_true",
                   help="single worker in vertex-id order")
    p.add_argument("--topology-driven", action="store_true",
                   help="launch all vertices per phase instead of the "
                        "active worklist")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("static", help="solve a graph, verify, print the flow")
    sp.add_argument("graph")
    sp.set_defaults(func=cmd_static)

    dp = sub.add_parser("dynamic", help="prior solve, apply a batch, compare "
                                        "against a from-scratch solve")
    dp.add_argument("graph")
    dp.add_argument("updates")
    dp.add_argument("--mode", choices=("push", "pushpull"), default="push")
    dp.set_defaults(func=cmd_dynamic)

    gp = sub.add_parser("gen-updates", help="emit a generated update batch")
    gp.add_argument("graph")
    gp.add_argument("--pct", type=float, required=True,
                    help="batch size as a percentage of the edge count")
    gp.add_argument("--kind", choices=("inc", "dec", "mixed"), required=True)
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--bias", type=float, default=10.0,
                    help="extra sampling weight for source/sink-incident edges")
    gp.add_argument("-o", "--output", default=None)
    gp.set_defaults(func=cmd_gen_updates)

    vp = sub.add_parser("verify", help="run the full oracle and certificate suite")
    vp.add_argument("graph")
    vp.add_argument("updates", nargs="?", default=None)
    vp.set_defaults(func=cmd_verify)

    bp = sub.add_parser("bench", help="time dynamic vs pushpull vs static, emit CSV")
    bp.add_argument("graph")
    bp.add_argument("--pcts", default="1,5,10", help="comma-separated batch percentages")
    bp.add_argument("--kinds", default="inc,dec,mixed", help="comma-separated kinds")
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--bias", type=float, default=10.0)
    bp.add_argument("--reps", type=int, default=3,
                    help="repetitions per measurement (median reported)")
    bp.add_argument("-o", "--output", default=None)
    bp.add_argument("--plot-data", default=None, metavar="DIR",
                    help="also write gnuplot data files, one per kind")
    bp.set_defaults(func=cmd_bench)

    cp = sub.add_parser("convert", help="whitespace edge list to DIMACS")
    cp.add_argument("edgelist")
    cp.add_argument("--source", type=int, required=True, help="0-indexed source id")
    cp.add_argument("--sink", type=int, required=True, help="0-indexed sink id")
    cp.add_argument("--one-indexed", action="store_true",
                    help="edge list vertex ids start at 1")
    cp.add_argument("-o", "--output", required=True)
    cp.set_defaults(func=cmd_convert)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, GraphError, BatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
