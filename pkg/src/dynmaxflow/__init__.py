"""Parallel lock-free push-relabel max flow with incremental recomputation
after batched edge-capacity updates."""

from ._accel import DISABLE_ENV_VAR, NUMBA_ENABLED, backend_name
from .graph import BiCsrGraph, BuildDiagnostics, EdgeListGraph, GraphError, build_bicsr, reverse_edge
from .state import SolverState, active_mask, deficient_mask, init_residuals, saturate_source
from .solver import (CutCertificate, FlowResult, SolverError, SolverParams,
                     active_worklist, backward_bfs, extract_certificate,
                     operation_ceiling, solve_static)
from .dynamic import (BatchError, UpdateBatch, apply_updates, backward_bfs_dynamic,
                      recompute_excess, solve_dynamic, solve_dynamic_pushpull,
                      updated_edge_list)
from .oracle import (ConstructedFlow, CutReport, DistanceLabels, PreflowReport,
                     construct_flow, dinic_maxflow, exhaustive_min_cut,
                     residual_distances, verify_cut, verify_preflow)
from .io import (ParseError, ResultRecord, parse_edge_list, parse_graph,
                 parse_updates, read_results, write_graph, write_results,
                 write_updates)
from .bench import BatchSpec, generate_batch, random_graph, run_benchmark, write_plot_data

__version__ = "0.1.0"
