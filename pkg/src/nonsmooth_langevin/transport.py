"""Exact discrete optimal transport via a network simplex.

Solves min <C, P> over couplings P with fixed marginals a and b.  The
solver maintains a spanning-tree basis on the bipartite support graph:
northwest-corner initialization, block search for the entering arc, and
incremental re-rooting of the subtree detached by each pivot, so the cost
per pivot stays far below a full tree rebuild.  Optimality is certified by
reduced costs, with a tolerance relative to the largest cost entry.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["transport_cost"]


@njit(cache=True)
def _transport_simplex(C, a, b, rel_tol, max_pivots, block):
    n, m = C.shape
    N = n + m
    nb = N - 1
    nm = n * m
    ri = np.empty(nb, np.int64)
    cj = np.empty(nb, np.int64)
    fl = np.empty(nb, np.float64)

    # northwest-corner start: always emits exactly n+m-1 basic arcs
    ra = a.copy()
    rb = b.copy()
    i = 0
    j = 0
    for t in range(nb):
        ri[t] = i
        cj[t] = j
        amt = ra[i] if ra[i] < rb[j] else rb[j]
        fl[t] = amt
        ra[i] -= amt
        rb[j] -= amt
        if ra[i] == 0.0 and i < n - 1:
            i += 1
        elif rb[j] == 0.0 and j < m - 1:
            j += 1
        elif i < n - 1:
            i += 1
        elif j < m - 1:
            j += 1

    # doubly linked incidence lists; slot 2t is the row end of arc t, 2t+1 the col end
    head = np.full(N, -1, np.int64)
    nxt = np.full(2 * nb, -1, np.int64)
    prv = np.full(2 * nb, -1, np.int64)

    parent = np.empty(N, np.int64)
    parc = np.empty(N, np.int64)
    order = np.empty(N, np.int64)
    dual = np.empty(N, np.float64)
    mark = np.full(N, -1, np.int64)
    stamp_arr = np.zeros(N, np.int64)
    pathA = np.empty(N, np.int64)
    cyc_arc = np.empty(N, np.int64)
    cyc_sgn = np.empty(N, np.float64)

    for t in range(nb):
        for s in range(2):
            slot = 2 * t + s
            node = ri[t] if s == 0 else n + cj[t]
            nxt[slot] = head[node]
            if head[node] >= 0:
                prv[head[node]] = slot
            prv[slot] = -1
            head[node] = slot

    # initial tree: BFS from node 0, then duals in BFS order
    parent[0] = -1
    parc[0] = -1
    order[0] = 0
    seen = np.zeros(N, np.bool_)
    seen[0] = True
    tail = 1
    hd = 0
    while hd < tail:
        x = order[hd]
        hd += 1
        slot = head[x]
        while slot >= 0:
            t = slot >> 1
            y = (n + cj[t]) if (slot & 1) == 0 else ri[t]
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                parc[y] = t
                order[tail] = y
                tail += 1
            slot = nxt[slot]
    dual[0] = 0.0
    for k in range(1, N):
        y = order[k]
        t = parc[y]
        dual[y] = C[ri[t], cj[t]] - dual[parent[y]]

    cmax = 0.0
    for x in range(n):
        for y in range(m):
            cx = abs(C[x, y])
            if cx > cmax:
                cmax = cx
    tol = rel_tol * (cmax if cmax > 0.0 else 1.0)

    ptr = 0
    npiv = 0
    while npiv < max_pivots:
        # entering arc: scan blocks from a rotating pointer, keep the most
        # negative reduced cost seen in the first block that has one
        ei = -1
        ej = -1
        best = -tol
        scanned = 0
        f = ptr
        x = f // m
        y = f - x * m
        du = dual[x]
        while scanned < nm:
            red = C[x, y] - du - dual[n + y]
            if red < best:
                best = red
                ei = x
                ej = y
            scanned += 1
            y += 1
            if y == m:
                y = 0
                x += 1
                if x == n:
                    x = 0
                du = dual[x]
            if scanned % block == 0 and ei >= 0:
                break
        ptr = x * m + y
        if ei < 0:
            break

        # unique tree cycle closed by (ei, ej): walk both endpoints to
        # their lowest common ancestor, recording arc orientations
        xx = ei
        cnt = 0
        while xx != -1:
            mark[xx] = cnt
            pathA[cnt] = xx
            cnt += 1
            xx = parent[xx]
        yy = n + ej
        nc = 0
        while mark[yy] < 0:
            t = parc[yy]
            cyc_arc[nc] = t
            cyc_sgn[nc] = -1.0 if yy >= n else 1.0
            nc += 1
            yy = parent[yy]
        lca = yy
        xx = ei
        while xx != lca:
            t = parc[xx]
            cyc_arc[nc] = t
            cyc_sgn[nc] = -1.0 if xx < n else 1.0
            nc += 1
            xx = parent[xx]
        for k in range(cnt):
            mark[pathA[k]] = -1

        tmin = np.inf
        leave = -1
        for k in range(nc):
            if cyc_sgn[k] < 0.0 and fl[cyc_arc[k]] < tmin:
                tmin = fl[cyc_arc[k]]
                leave = cyc_arc[k]
        for k in range(nc):
            fl[cyc_arc[k]] += cyc_sgn[k] * tmin

        # child endpoint of the leaving arc roots the detached subtree
        cl = n + cj[leave]
        ch = cl if parc[cl] == leave else ri[leave]
        # which entering endpoint lies in the detached part
        inside = False
        xx = ei
        while xx != -1:
            if xx == ch:
                inside = True
                break
            xx = parent[xx]
        q = ei if inside else n + ej
        p = (n + ej) if inside else ei

        # unlink leaving arc
        for s in range(2):
            slot = 2 * leave + s
            node = ri[leave] if s == 0 else n + cj[leave]
            if prv[slot] >= 0:
                nxt[prv[slot]] = nxt[slot]
            else:
                head[node] = nxt[slot]
            if nxt[slot] >= 0:
                prv[nxt[slot]] = prv[slot]

        # re-root the detached subtree at q; entering arc is not linked
        # yet, so BFS stays inside the detached part.  Visit stamps grow
        # with the pivot count so they never need resetting.
        order[0] = q
        stamp = npiv + 1
        stamp_arr[q] = stamp
        tail = 1
        hd = 0
        while hd < tail:
            x = order[hd]
            hd += 1
            slot = head[x]
            while slot >= 0:
                t = slot >> 1
                y = (n + cj[t]) if (slot & 1) == 0 else ri[t]
                if stamp_arr[y] != stamp:
                    stamp_arr[y] = stamp
                    parent[y] = x
                    parc[y] = t
                    order[tail] = y
                    tail += 1
                slot = nxt[slot]
        parent[q] = p
        parc[q] = leave
        dual[q] = C[ei, ej] - dual[p]
        for k in range(1, tail):
            y = order[k]
            t = parc[y]
            dual[y] = C[ri[t], cj[t]] - dual[parent[y]]

        # entering arc takes over the leaving arc's slot
        ri[leave] = ei
        cj[leave] = ej
        fl[leave] = tmin
        for s in range(2):
            slot = 2 * leave + s
            node = ei if s == 0 else n + ej
            nxt[slot] = head[node]
            if head[node] >= 0:
                prv[head[node]] = slot
            prv[slot] = -1
            head[node] = slot
        npiv += 1

    obj = 0.0
    for t in range(nb):
        obj += fl[t] * C[ri[t], cj[t]]
    return obj, npiv


def transport_cost(C, a, b, rel_tol=1e-11, max_pivots=None, block=None):
    """Minimum cost of transporting marginal ``a`` onto ``b`` under ``C``.

    ``C`` is the (n, m) cost matrix, ``a`` and ``b`` nonnegative mass
    vectors with (nearly) equal totals.  Zero-mass atoms are stripped
    before solving; ``b`` is rescaled so the totals match exactly.  Raises
    ValueError on malformed marginals and RuntimeError if the pivot budget
    is exhausted before reaching optimality.
    """
    C = np.ascontiguousarray(C, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if C.ndim != 2 or a.shape != (C.shape[0],) or b.shape != (C.shape[1],):
        raise ValueError("cost matrix and marginals have inconsistent shapes")
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("marginals must be nonnegative")
    ta = float(a.sum())
    tb = float(b.sum())
    if ta <= 0 or tb <= 0:
        raise ValueError("marginals must carry positive mass")
    if abs(ta - tb) > 1e-9 * max(ta, tb):
        raise ValueError(f"marginal totals differ: {ta!r} vs {tb!r}")

    keep_a = a > 0
    keep_b = b > 0
    a = a[keep_a]
    b = b[keep_b] * (ta / tb)
    C = np.ascontiguousarray(C[np.ix_(keep_a, keep_b)])
    n, m = C.shape
    if n == 1 or m == 1:
        # plan is forced by the marginals
        return float(np.sum(C * np.outer(a, b)) / ta)

    if block is None:
        block = max(256, int(np.sqrt(n * m)))
    if max_pivots is None:
        max_pivots = 1000 * (n + m)
    obj, npiv = _transport_simplex(C, a, b, rel_tol, max_pivots, block)
    if npiv >= max_pivots:
        raise RuntimeError(f"transport solver hit the pivot budget ({max_pivots})")
    return float(obj)
