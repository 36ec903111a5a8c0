"""Hot inner-loop kernels for the push-relabel and pull-relabel phases.

Each kernel processes a contiguous chunk ``work[lo:hi]`` of a worklist so
that a pool of threads can split one phase; ``cf``/``excess`` updates go
through atomic read-modify-write and each height entry is written only by
the worker owning that vertex. The kernels are compiled (nogil) when the
numba backend is active and run interpreted otherwise; see
:mod:`dynmaxflow._accel`.

Region masking: when ``my_region >= 0`` a kernel ignores neighbors whose
``region`` tag differs, which is how the concurrent push and pull
pipelines of the dynamic solver stay on disjoint halves of the graph.
Normal solves pass ``my_region = -1`` (no masking).
"""

from ._accel import atomic_add, atomic_exchange, jit_kernel


def _push_relabel_chunk(work, lo, hi, offsets, adj, rev, cf, excess, height,
                        n, kernel_cycles, region, my_region):
    """Up to kernel_cycles push/relabel steps per active vertex in the chunk.

    Per step: scan residual out-edges for the lowest neighbor snapshot
    (h_min, slot); push min(excess, cf) downhill, else relabel to
    h_min + 1 using the snapshot (never re-read). Returns (pushes,
    relabels).
    """
    pushes = 0
    relabels = 0
    for w in range(lo, hi):
        u = work[w]
        cnt = 0
        while cnt < kernel_cycles:
            cnt += 1
            e_u = excess[u]
            if e_u <= 0 or height[u] >= n:
                break
            best_i = -1
            best_h = n + 1
            for i in range(offsets[u], offsets[u + 1]):
                if cf[i] > 0:
                    v = adj[i]
                    if my_region >= 0 and region[v] != my_region:
                        continue
                    hv = height[v]
                    if hv < best_h:
                        best_h = hv
                        best_i = i
            if best_i < 0:
                # no residual out-edge in scope: nothing can ever leave u
                height[u] = n
                relabels += 1
                break
            if height[u] > best_h:
                d = min(e_u, cf[best_i])
                atomic_add(cf, best_i, -d)
                atomic_add(cf, rev[best_i], d)
                atomic_add(excess, u, -d)
                atomic_add(excess, adj[best_i], d)
                pushes += 1
            else:
                nh = best_h + 1
                if nh > n:
                    nh = n
                height[u] = nh
                relabels += 1
    return pushes, relabels


def _remove_invalid_chunk(work, lo, hi, offsets, adj, rev, cf, excess, height,
                          region, my_region):
    """Force the full residual across every steep out-edge (h(u) > h(v)+1).

    Restores height validity after a phase whose concurrent relabels may
    have outrun pushes landing on stale height reads. Heights are stable
    while this runs, so the scan condition is race-free.
    """
    repaired = 0
    for w in range(lo, hi):
        u = work[w]
        hu = height[u]
        for i in range(offsets[u], offsets[u + 1]):
            v = adj[i]
            if my_region >= 0 and region[v] != my_region:
                continue
            if cf[i] > 0 and hu > height[v] + 1:
                amt = atomic_exchange(cf, i, 0)
                if amt > 0:
                    atomic_add(cf, rev[i], amt)
                    atomic_add(excess, u, -amt)
                    atomic_add(excess, v, amt)
                    repaired += 1
    return repaired


def _pull_relabel_chunk(work, lo, hi, offsets, adj, rev, cf, excess, height,
                        n, kernel_cycles, region, my_region):
    """Mirror of the push kernel for deficient vertices.

    A deficient u scans incoming residual edges (v, u), pulls
    min(deficit, cf(v, u)) from the lowest pull-height neighbor by
    increasing flow on (v, u), or relabels in the pull height function.
    """
    pulls = 0
    relabels = 0
    for w in range(lo, hi):
        u = work[w]
        cnt = 0
        while cnt < kernel_cycles:
            cnt += 1
            deficit = -excess[u]
            if deficit <= 0 or height[u] >= n:
                break
            best_i = -1
            best_h = n + 1
            for i in range(offsets[u], offsets[u + 1]):
                if cf[rev[i]] > 0:
                    v = adj[i]
                    if my_region >= 0 and region[v] != my_region:
                        continue
                    hv = height[v]
                    if hv < best_h:
                        best_h = hv
                        best_i = i
            if best_i < 0:
                height[u] = n
                relabels += 1
                break
            if height[u] > best_h:
                ri = rev[best_i]
                d = min(deficit, cf[ri])
                atomic_add(cf, ri, -d)
                atomic_add(cf, best_i, d)
                atomic_add(excess, u, d)
                atomic_add(excess, adj[best_i], -d)
                pulls += 1
            else:
                nh = best_h + 1
                if nh > n:
                    nh = n
                height[u] = nh
                relabels += 1
    return pulls, relabels


def _pull_remove_invalid_chunk(work, lo, hi, offsets, adj, rev, cf, excess,
                               height, region, my_region):
    """Mirror repair: force-pull the full residual of steep incoming edges."""
    repaired = 0
    for w in range(lo, hi):
        u = work[w]
        hu = height[u]
        for i in range(offsets[u], offsets[u + 1]):
            v = adj[i]
            if my_region >= 0 and region[v] != my_region:
                continue
            ri = rev[i]
            if cf[ri] > 0 and hu > height[v] + 1:
                amt = atomic_exchange(cf, ri, 0)
                if amt > 0:
                    atomic_add(cf, i, amt)
                    atomic_add(excess, u, amt)
                    atomic_add(excess, v, -amt)
                    repaired += 1
    return repaired


def _bfs_heights(offsets, adj, rev, cf, height, bases, n, forward, forbidden,
                 region, my_region, queue):
    """Level-synchronous multi-source BFS; heights become exact distances.

    Backward mode (forward=False) discovers v from u along residual
    edges (v, u): distance to the base set moving with the flow.
    Forward mode discovers v from u along residual edges (u, v): the
    pull ordering growing from supply bases. Unreached vertices (and the
    ``forbidden`` vertex, if any) end at height n. FIFO order discovers
    level k+1 only from level k. Returns the number of reached vertices.
    """
    if my_region >= 0:
        for v in range(n):
            if region[v] == my_region:
                height[v] = n
    else:
        for v in range(n):
            height[v] = n
    tail = 0
    for b in range(bases.shape[0]):
        v = bases[b]
        height[v] = 0
        queue[tail] = v
        tail += 1
    if forbidden >= 0:
        height[forbidden] = n
    head = 0
    while head < tail:
        u = queue[head]
        head += 1
        du = height[u]
        for i in range(offsets[u], offsets[u + 1]):
            v = adj[i]
            if v == forbidden:
                continue
            if my_region >= 0 and region[v] != my_region:
                continue
            if height[v] != n:
                continue
            if forward:
                r = cf[i]
            else:
                r = cf[rev[i]]
            if r > 0:
                height[v] = du + 1
                queue[tail] = v
                tail += 1
    return tail


def _recompute_excess(offsets, adj, rev, cf, cap0, excess):
    """excess[u] = constructed inflow minus outflow, f(i) = max(0, cap0-cf)."""
    n = offsets.shape[0] - 1
    for u in range(n):
        acc = 0
        for i in range(offsets[u], offsets[u + 1]):
            ri = rev[i]
            fin = cap0[ri] - cf[ri]
            if fin > 0:
                acc += fin
            fout = cap0[i] - cf[i]
            if fout > 0:
                acc -= fout
        excess[u] = acc


push_relabel_chunk = jit_kernel(_push_relabel_chunk)
remove_invalid_chunk = jit_kernel(_remove_invalid_chunk)
pull_relabel_chunk = jit_kernel(_pull_relabel_chunk)
pull_remove_invalid_chunk = jit_kernel(_pull_remove_invalid_chunk)
bfs_heights = jit_kernel(_bfs_heights)
recompute_excess_kernel = jit_kernel(_recompute_excess)
