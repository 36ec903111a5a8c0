"""File formats: DIMACS-max graphs, update batches, and result CSV.

Graph files use the DIMACS max-flow dialect: one ``p max <n> <m>``
problem line, exactly one ``n <id> s`` and one ``n <id> t`` node line,
and ``a <u> <v> <cap>`` arc lines, with 1-indexed vertex ids (converted
to 0-indexed in memory). Update files carry ``u <from> <to> <new_cap>``
lines. ``c``-prefixed, ``#``-prefixed and blank lines are ignored in
both formats.
"""

import csv
from dataclasses import dataclass, fields

import numpy as np

from .dynamic import UpdateBatch
from .graph import BiCsrGraph, EdgeListGraph


class ParseError(ValueError):
    """Malformed input file; message carries the file path and line number."""

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


def _is_comment(line: str) -> bool:
    return not line or line.startswith("c") or line.startswith("#")


def parse_graph(path) -> tuple[EdgeListGraph, int, int]:
    """Read a DIMACS-max file; returns the edge list plus source and sink."""
    n = m = None
    source = sink = None
    us = vs = caps = None
    arcs = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if _is_comment(line):
                continue
            parts = line.split()
            kind = parts[0]
            if kind == "p":
                if n is not None:
                    raise ParseError(path, lineno, "duplicate problem line")
                if len(parts) != 4 or parts[1] != "max":
                    raise ParseError(path, lineno, f"expected 'p max <n> <m>', got {line!r}")
                try:
                    n, m = int(parts[2]), int(parts[3])
                except ValueError:
                    raise ParseError(path, lineno, f"bad problem line {line!r}") from None
                if n <= 0 or m < 0:
                    raise ParseError(path, lineno, f"bad sizes n={n} m={m}")
                us = np.empty(m, dtype=np.int64)
                vs = np.empty(m, dtype=np.int64)
                caps = np.empty(m, dtype=np.int64)
            elif kind == "n":
                if n is None:
                    raise ParseError(path, lineno, "node line before problem line")
                if len(parts) != 3 or parts[2] not in ("s", "t"):
                    raise ParseError(path, lineno, f"expected 'n <id> s|t', got {line!r}")
                try:
                    vid = int(parts[1])
                except ValueError:
                    raise ParseError(path, lineno, f"bad vertex id in {line!r}") from None
                if not 1 <= vid <= n:
                    raise ParseError(path, lineno, f"vertex id {vid} out of range [1, {n}]")
                if parts[2] == "s":
                    if source is not None:
                        raise ParseError(path, lineno, "duplicate source line")
                    source = vid - 1
                else:
                    if sink is not None:
                        raise ParseError(path, lineno, "duplicate sink line")
                    sink = vid - 1
            elif kind == "a":
                if n is None:
                    raise ParseError(path, lineno, "arc line before problem line")
                if arcs >= m:
                    raise ParseError(path, lineno, f"more than {m} arc lines")
                if len(parts) != 4:
                    raise ParseError(path, lineno, f"expected 'a <u> <v> <cap>', got {line!r}")
                try:
                    u, v, c = int(parts[1]), int(parts[2]), int(parts[3])
                except ValueError:
                    raise ParseError(path, lineno, f"bad arc line {line!r}") from None
                if not 1 <= u <= n or not 1 <= v <= n:
                    raise ParseError(path, lineno,
                                     f"arc endpoint out of range [1, {n}] in {line!r}")
                if c < 0:
                    raise ParseError(path, lineno, f"negative capacity in {line!r}")
                us[arcs] = u - 1
                vs[arcs] = v - 1
                caps[arcs] = c
                arcs += 1
            else:
                raise ParseError(path, lineno, f"unknown line kind {kind!r}")
    if n is None:
        raise ParseError(path, 0, "missing problem line")
    if source is None:
        raise ParseError(path, 0, "missing source node line")
    if sink is None:
        raise ParseError(path, 0, "missing sink node line")
    if arcs != m:
        raise ParseError(path, 0, f"header promised {m} arcs, found {arcs}")
    return EdgeListGraph(n, us, vs, caps), source, sink


def write_graph(path, g: EdgeListGraph, source: int, sink: int) -> None:
    with open(path, "w") as fh:
        fh.write(f"p max {g.n} {g.m}\n")
        fh.write(f"n {source + 1} s\n")
        fh.write(f"n {sink + 1} t\n")
        for u, v, c in zip(g.us.tolist(), g.vs.tolist(), g.caps.tolist()):
            fh.write(f"a {u + 1} {v + 1} {c}\n")


def parse_updates(path, g: BiCsrGraph) -> UpdateBatch:
    """Read an update file and validate every edge against the graph."""
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if _is_comment(line):
                continue
            parts = line.split()
            if parts[0] != "u" or len(parts) != 4:
                raise ParseError(path, lineno, f"expected 'u <from> <to> <new_cap>', got {line!r}")
            try:
                u, v, c = int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(path, lineno, f"bad update line {line!r}") from None
            if not 1 <= u <= g.n or not 1 <= v <= g.n:
                raise ParseError(path, lineno, f"vertex out of range [1, {g.n}] in {line!r}")
            if c < 0:
                raise ParseError(path, lineno, f"negative capacity in {line!r}")
            rows.append((u - 1, v - 1, c))
    batch = UpdateBatch.from_updates(rows)
    from .dynamic import _resolve_batch
    _resolve_batch(g, batch)  # existence + duplicate validation
    return batch


def write_updates(path, batch: UpdateBatch) -> None:
    with open(path, "w") as fh:
        for u, v, c in batch.updates():
            fh.write(f"u {u + 1} {v + 1} {c}\n")


def parse_edge_list(path, one_indexed: bool = False) -> EdgeListGraph:
    """Whitespace edge list converter input: ``u v cap`` per line.

    The vertex count is one past the largest id seen. Source and sink
    are supplied out of band (they are not part of this format).
    """
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if _is_comment(line):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(path, lineno, f"expected 'u v cap', got {line!r}")
            try:
                u, v, c = int(parts[0]), int(parts[1]), int(parts[2])
            except ValueError:
                raise ParseError(path, lineno, f"bad edge line {line!r}") from None
            if one_indexed:
                u, v = u - 1, v - 1
            if u < 0 or v < 0:
                raise ParseError(path, lineno, f"negative vertex id in {line!r}")
            if c < 0:
                raise ParseError(path, lineno, f"negative capacity in {line!r}")
            rows.append((u, v, c))
    if not rows:
        raise ParseError(path, 0, "no edges found")
    n = max(max(u, v) for u, v, _ in rows) + 1
    return EdgeListGraph.from_edges(n, rows)


@dataclass
class ResultRecord:
    """One benchmark measurement, serialized as a CSV row."""

    instance: str
    mode: str
    batch_kind: str
    batch_pct: float
    flow_value: int
    rounds: int
    bfs_ms: float
    push_ms: float
    repair_ms: float
    total_ms: float
    verified: bool


RESULT_FIELDS = [f.name for f in fields(ResultRecord)]


def write_results(path_or_file, records: list[ResultRecord],
                  metadata: dict | None = None) -> None:
    """CSV with a fixed header row; metadata rides in '#' comment lines."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        for key, val in (metadata or {}).items():
            fh.write(f"# {key}={val}\n")
        writer = csv.writer(fh)
        writer.writerow(RESULT_FIELDS)
        for r in records:
            writer.writerow([r.instance, r.mode, r.batch_kind, f"{r.batch_pct:g}",
                             r.flow_value, r.rounds, f"{r.bfs_ms:.3f}",
                             f"{r.push_ms:.3f}", f"{r.repair_ms:.3f}",
                             f"{r.total_ms:.3f}", str(r.verified).lower()])
    finally:
        if own:
            fh.close()


def read_results(path) -> list[ResultRecord]:
    records = []
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(line for line in fh if not line.startswith("#"))]
    header, body = rows[0], rows[1:]
    if header != RESULT_FIELDS:
        raise ParseError(path, 1, f"unexpected CSV header {header}")
    for row in body:
        records.append(ResultRecord(
            instance=row[0], mode=row[1], batch_kind=row[2],
            batch_pct=float(row[3]), flow_value=int(row[4]), rounds=int(row[5]),
            bfs_ms=float(row[6]), push_ms=float(row[7]), repair_ms=float(row[8]),
            total_ms=float(row[9]), verified=row[10] == "true"))
    return records
