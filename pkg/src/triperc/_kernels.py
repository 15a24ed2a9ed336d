"""Compiled inner loops.

All kernels work on a ``(H, W)`` ``uint8`` state grid in local coordinates,
``states[iy, ix]``, 1 = open. Flat site index is ``iy * W + ix``.
"""

import numpy as np
from numba import njit

# Neighbor displacements (dx, dy), counter-clockwise in the Euclidean
# embedding: e1, e2, e2 - e1, -e1, -e2, e1 - e2.
CCW_DX = np.array([1, 0, -1, -1, 0, 1], dtype=np.int64)
CCW_DY = np.array([0, 1, 1, 0, -1, -1], dtype=np.int64)


@njit(cache=True, nogil=True, inline="always")
def _find(parent, i):
    # path halving
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True, nogil=True, inline="always")
def _union(parent, a, b):
    """Link the two roots, keeping the smaller index as the new root."""
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra < rb:
        parent[rb] = ra
        return ra
    parent[ra] = rb
    return rb


@njit(cache=True, nogil=True)
def uf_forest(states, color):
    """Disjoint-set forest of same-colored sites (path halving, link to smaller root)."""
    H, W = states.shape
    n = H * W
    parent = np.arange(n).astype(np.int32)
    for iy in range(H):
        for ix in range(W):
            if states[iy, ix] != color:
                continue
            i = iy * W + ix
            # backward neighbors in row-major order: (-1, 0), (0, -1), (1, -1)
            if ix > 0 and states[iy, ix - 1] == color:
                _union(parent, i, i - 1)
            if iy > 0:
                if states[iy - 1, ix] == color:
                    _union(parent, i, i - W)
                if ix + 1 < W and states[iy - 1, ix + 1] == color:
                    _union(parent, i, i - W + 1)
    return parent


@njit(cache=True, nogil=True)
def label(states, color):
    """Compact cluster labels (first-occurrence order) and cluster sizes."""
    H, W = states.shape
    parent = uf_forest(states, color)
    n = H * W
    labels = np.full(n, -1, dtype=np.int64)
    root_label = np.full(n, -1, dtype=np.int64)
    counts = np.zeros(n, dtype=np.int64)
    nlab = 0
    for i in range(n):
        if states[i // W, i % W] != color:
            continue
        r = _find(parent, i)
        if root_label[r] < 0:
            root_label[r] = nlab
            nlab += 1
        labels[i] = root_label[r]
        counts[root_label[r]] += 1
    return labels.reshape((H, W)), counts[:nlab]


@njit(cache=True, nogil=True)
def has_crossing(states, color, vertical):
    """Same-colored path from left to right column (or bottom to top row)."""
    H, W = states.shape
    parent = uf_forest(states, color)
    mark = np.zeros(H * W, dtype=np.bool_)
    if not vertical:
        for iy in range(H):
            if states[iy, 0] == color:
                mark[_find(parent, iy * W)] = True
        for iy in range(H):
            if states[iy, W - 1] == color and mark[_find(parent, iy * W + W - 1)]:
                return True
    else:
        for ix in range(W):
            if states[0, ix] == color:
                mark[_find(parent, ix)] = True
        for ix in range(W):
            i = (H - 1) * W + ix
            if states[H - 1, ix] == color and mark[_find(parent, i)]:
                return True
    return False


@njit(cache=True, nogil=True)
def _touch_marks(states, parent, color, vertical):
    """Per-root flags: touches the start (bit 1) / end (bit 2) segment."""
    H, W = states.shape
    marks = np.zeros(H * W, dtype=np.uint8)
    for iy in range(H):
        for ix in range(W):
            if states[iy, ix] != color:
                continue
            if vertical:
                lo = iy == 0
                hi = iy == H - 1
            else:
                lo = ix == 0
                hi = ix == W - 1
            if lo or hi:
                r = _find(parent, iy * W + ix)
                if lo:
                    marks[r] |= 1
                if hi:
                    marks[r] |= 2
    return marks


@njit(cache=True, nogil=True)
def pivotal_mask(states):
    """Sites pivotal for the left-right open crossing, in one linear sweep.

    With a crossing present, an open site is pivotal iff it touches (or lies
    on) a closed cluster reaching the top and one reaching the bottom: closing
    it then yields a closed top-bottom crossing. Without a crossing, a closed
    site is pivotal iff it touches open clusters reaching left and right.
    """
    H, W = states.shape
    out = np.zeros((H, W), dtype=np.uint8)
    lr = has_crossing(states, 1, False)
    if lr:
        other = 0
        vertical = True
        target = 1
    else:
        other = 1
        vertical = False
        target = 0
    parent = uf_forest(states, other)
    marks = _touch_marks(states, parent, other, vertical)
    for iy in range(H):
        for ix in range(W):
            if states[iy, ix] != target:
                continue
            if vertical:
                m = (1 if iy == 0 else 0) | (2 if iy == H - 1 else 0)
            else:
                m = (1 if ix == 0 else 0) | (2 if ix == W - 1 else 0)
            for k in range(6):
                jx = ix + CCW_DX[k]
                jy = iy + CCW_DY[k]
                if 0 <= jx < W and 0 <= jy < H and states[jy, jx] == other:
                    m |= marks[_find(parent, jy * W + jx)]
            if m == 3:
                out[iy, ix] = 1
    return out


@njit(cache=True, nogil=True)
def pivotal_count(states):
    """``(lr, number of pivotal sites)`` for the left-right open crossing."""
    mask = pivotal_mask(states)
    lr = has_crossing(states, 1, False)
    return lr, np.int64(mask.sum())


@njit(cache=True, nogil=True)
def origin_radius(u, p, iy0, ix0):
    """Sup-norm radius of the cluster of ``(iy0, ix0)`` in ``u < p`` (-1 if closed).

    Same as :func:`cluster_extent` on the thresholded grid without building it.
    """
    H, W = u.shape
    if not u[iy0, ix0] < p:
        return -1
    seen = np.zeros((H, W), dtype=np.bool_)
    stack = np.empty(H * W, dtype=np.int64)
    top = 1
    stack[0] = iy0 * W + ix0
    seen[iy0, ix0] = True
    radius = 0
    while top > 0:
        top -= 1
        i = stack[top]
        iy = i // W
        ix = i % W
        d = max(abs(iy - iy0), abs(ix - ix0))
        if d > radius:
            radius = d
        for k in range(6):
            jx = ix + CCW_DX[k]
            jy = iy + CCW_DY[k]
            if 0 <= jx < W and 0 <= jy < H and not seen[jy, jx] and u[jy, jx] < p:
                seen[jy, jx] = True
                stack[top] = jy * W + jx
                top += 1
    return radius


@njit(cache=True, nogil=True)
def cluster_extent(states, iy0, ix0):
    """Open cluster of a site: (size, touches region boundary, max sup-distance).

    Returns ``(0, False, -1)`` if the site is closed.
    """
    H, W = states.shape
    if states[iy0, ix0] != 1:
        return 0, False, -1
    seen = np.zeros((H, W), dtype=np.bool_)
    stack = np.empty(H * W, dtype=np.int64)
    top = 0
    stack[top] = iy0 * W + ix0
    top += 1
    seen[iy0, ix0] = True
    size = 0
    boundary = False
    radius = 0
    while top > 0:
        top -= 1
        i = stack[top]
        iy = i // W
        ix = i % W
        size += 1
        if iy == 0 or iy == H - 1 or ix == 0 or ix == W - 1:
            boundary = True
        d = max(abs(iy - iy0), abs(ix - ix0))
        if d > radius:
            radius = d
        for k in range(6):
            jx = ix + CCW_DX[k]
            jy = iy + CCW_DY[k]
            if 0 <= jx < W and 0 <= jy < H and not seen[jy, jx] and states[jy, jx] == 1:
                seen[jy, jx] = True
                stack[top] = jy * W + jx
                top += 1
    return size, boundary, radius


@njit(cache=True, nogil=True)
def _virtual_state(states, ix, iy):
    H, W = states.shape
    if ix < 0 or ix >= W:
        return 1
    if iy < 0 or iy >= H:
        return 0
    return states[iy, ix]


@njit(cache=True, nogil=True)
def lowest_crossing_walk(states):
    """Lowest left-right open crossing as an ``(m, 2)`` array of ``(ix, iy)``.

    Explores the interface between open sites (kept on the left, with the
    columns beside the box treated as open) and closed sites connected to the
    bottom (kept on the right, with the row below the box treated as closed),
    starting at the lower-left corner. The real open sites seen on the left
    since the last contact with the virtual left column are loop-erased in
    chronological order; the walk stops when an open site of the right column
    appears (crossing) or a closed site of the top row appears (no crossing,
    an ``(0, 2)`` array is returned).
    """
    H, W = states.shape
    n = H * W
    pos = np.full(n, -1, dtype=np.int64)
    path = np.empty(n, dtype=np.int64)
    m = 0
    lx = -1
    ly = 0
    k = 5
    max_steps = 12 * (H + 2) * (W + 2) + 16
    for _ in range(max_steps):
        k1 = (k + 1) % 6
        wx = lx + CCW_DX[k1]
        wy = ly + CCW_DY[k1]
        if _virtual_state(states, wx, wy) == 1:
            lx = wx
            ly = wy
            k = (k + 5) % 6
            if 0 <= lx < W and 0 <= ly < H:
                i = ly * W + lx
                if pos[i] >= 0:
                    j = pos[i]
                    for t in range(j + 1, m):
                        pos[path[t]] = -1
                    m = j + 1
                else:
                    pos[i] = m
                    path[m] = i
                    m += 1
                if lx == W - 1:
                    out = np.empty((m, 2), dtype=np.int64)
                    for t in range(m):
                        out[t, 0] = path[t] % W
                        out[t, 1] = path[t] // W
                    return out
            else:
                for t in range(m):
                    pos[path[t]] = -1
                m = 0
        else:
            k = k1
            if 0 <= wx < W and 0 <= wy < H and wy == H - 1:
                return np.empty((0, 2), dtype=np.int64)
    raise RuntimeError("exploration walk did not terminate")


@njit(cache=True, nogil=True)
def side_labels(H, W, px, py):
    """Classify sites relative to a left-right path given by local coordinates.

    Returns an ``int8`` grid: 0 below the path, 1 above, 2 on the path and -1
    for sites that could not be assigned (never happens for a valid crossing).
    Sides are found on the triangulated box: faces separated only by path
    bonds are merged, and a face component is below (above) when it touches
    a boundary edge of the lower (upper) arc between the path endpoints.
    Requires ``H >= 2`` and ``W >= 2``.
    """
    n = H * W
    pos = np.full(n, -1, dtype=np.int64)
    m = px.shape[0]
    for t in range(m):
        pos[py[t] * W + px[t]] = t
    y0 = py[0]
    y1 = py[m - 1]
    cw = W - 1
    ntri = 2 * cw * (H - 1)
    comp = np.full(ntri, -1, dtype=np.int64)
    flags = np.zeros(ntri, dtype=np.uint8)  # per component: 1 lower arc, 2 upper arc
    stack = np.empty(ntri, dtype=np.int64)
    ncomp = 0
    for t0 in range(ntri):
        if comp[t0] >= 0:
            continue
        comp[t0] = ncomp
        top = 0
        stack[top] = t0
        top += 1
        f = 0
        while top > 0:
            top -= 1
            t = stack[top]
            s = t % 2
            cell = t // 2
            i = cell % cw
            j = cell // cw
            # each entry: (site a, site b, neighbor triangle or -1, arc flag)
            for e in range(3):
                nb = -1
                arc = 0
                if s == 0:
                    if e == 0:
                        a = j * W + i + 1
                        b = (j + 1) * W + i
                        nb = 2 * (j * cw + i) + 1
                    elif e == 1:
                        a = j * W + i
                        b = j * W + i + 1
                        if j > 0:
                            nb = 2 * ((j - 1) * cw + i) + 1
                        else:
                            arc = 1
                    else:
                        a = j * W + i
                        b = (j + 1) * W + i
                        if i > 0:
                            nb = 2 * (j * cw + i - 1) + 1
                        else:
                            arc = 1 if j + 1 <= y0 else 2
                else:
                    if e == 0:
                        a = j * W + i + 1
                        b = (j + 1) * W + i
                        nb = 2 * (j * cw + i)
                    elif e == 1:
                        a = (j + 1) * W + i
                        b = (j + 1) * W + i + 1
                        if j < H - 2:
                            nb = 2 * ((j + 1) * cw + i)
                        else:
                            arc = 2
                    else:
                        a = j * W + i + 1
                        b = (j + 1) * W + i + 1
                        if i < W - 2:
                            nb = 2 * (j * cw + i + 1)
                        else:
                            arc = 1 if j + 1 <= y1 else 2
                pa = pos[a]
                pb = pos[b]
                if pa >= 0 and pb >= 0 and abs(pa - pb) == 1:
                    continue
                if nb >= 0:
                    if comp[nb] < 0:
                        comp[nb] = ncomp
                        stack[top] = nb
                        top += 1
                else:
                    f |= arc
        flags[ncomp] = f
        ncomp += 1
    out = np.full((H, W), -1, dtype=np.int8)
    for iy in range(H):
        for ix in range(W):
            if pos[iy * W + ix] >= 0:
                out[iy, ix] = 2
                continue
            if ix <= W - 2 and iy <= H - 2:
                t = 2 * (iy * cw + ix)
            elif ix >= 1 and iy <= H - 2:
                t = 2 * (iy * cw + ix - 1) + 1
            elif ix <= W - 2 and iy >= 1:
                t = 2 * ((iy - 1) * cw + ix) + 1
            else:
                t = 2 * ((iy - 1) * cw + ix - 1) + 1
            f = flags[comp[t]]
            if f == 1:
                out[iy, ix] = 0
            elif f == 2:
                out[iy, ix] = 1
    return out


@njit(cache=True, nogil=True)
def _add_edge(head, nxt, to, cap, ne, a, b):
    to[ne] = b
    cap[ne] = 1
    nxt[ne] = head[a]
    head[a] = ne
    to[ne + 1] = a
    cap[ne + 1] = 0
    nxt[ne + 1] = head[b]
    head[b] = ne + 1
    return ne + 2


@njit(cache=True, nogil=True)
def disjoint_arm_flow(allowed, targets, iy0, ix0):
    """Maximum number of site-disjoint paths from a center to distinct targets.

    ``allowed[iy, ix]`` marks sites paths may use (the center never is);
    ``targets[a]`` marks the sites ending arm ``a``. Each arm receives at
    most one path. Vertex capacities are enforced by node splitting; the
    value is found with BFS augmenting paths.
    """
    H, W = allowed.shape
    n = H * W
    na = targets.shape[0]
    center = iy0 * W + ix0
    nnodes = 2 * n + na + 1
    sink = 2 * n + na
    maxe = 2 * (n * (7 + na) + na) + 2
    head = np.full(nnodes, -1, dtype=np.int64)
    nxt = np.empty(maxe, dtype=np.int64)
    to = np.empty(maxe, dtype=np.int64)
    cap = np.empty(maxe, dtype=np.int64)
    ne = 0
    for iy in range(H):
        for ix in range(W):
            u = iy * W + ix
            is_center = u == center
            if not is_center and not allowed[iy, ix]:
                continue
            if not is_center:
                ne = _add_edge(head, nxt, to, cap, ne, 2 * u, 2 * u + 1)
                for a in range(na):
                    if targets[a, iy, ix]:
                        ne = _add_edge(head, nxt, to, cap, ne, 2 * u + 1, 2 * n + a)
            for k in range(6):
                jx = ix + CCW_DX[k]
                jy = iy + CCW_DY[k]
                if 0 <= jx < W and 0 <= jy < H and allowed[jy, jx]:
                    v = jy * W + jx
                    if v != center:
                        ne = _add_edge(head, nxt, to, cap, ne, 2 * u + 1, 2 * v)
    for a in range(na):
        ne = _add_edge(head, nxt, to, cap, ne, 2 * n + a, sink)
    source = 2 * center + 1
    flow = 0
    prev_edge = np.empty(nnodes, dtype=np.int64)
    queue = np.empty(nnodes, dtype=np.int64)
    for _ in range(na):
        prev_edge[:] = -2
        prev_edge[source] = -1
        qh = 0
        qt = 0
        queue[qt] = source
        qt += 1
        found = False
        while qh < qt and not found:
            u = queue[qh]
            qh += 1
            e = head[u]
            while e >= 0:
                if cap[e] > 0 and prev_edge[to[e]] == -2:
                    prev_edge[to[e]] = e
                    if to[e] == sink:
                        found = True
                        break
                    queue[qt] = to[e]
                    qt += 1
                e = nxt[e]
        if not found:
            break
        v = sink
        while v != source:
            e = prev_edge[v]
            cap[e] -= 1
            cap[e ^ 1] += 1
            v = to[e ^ 1]
        flow += 1
    return flow


@njit(cache=True, nogil=True)
def lr_threshold(u):
    """Smallest p at which ``u < p`` contains a left-right crossing.

    Sites are added in increasing order of their draw until one cluster joins
    the left and right columns; the draw of the joining site is returned.
    """
    H, W = u.shape
    n = H * W
    flat = u.ravel()
    order = np.argsort(flat)
    parent = np.arange(n).astype(np.int32)
    marks = np.zeros(n, dtype=np.uint8)
    added = np.zeros(n, dtype=np.bool_)
    for t in range(n):
        i = order[t]
        iy = i // W
        ix = i % W
        added[i] = True
        m = (1 if ix == 0 else 0) | (2 if ix == W - 1 else 0)
        for k in range(6):
            jx = ix + CCW_DX[k]
            jy = iy + CCW_DY[k]
            if 0 <= jx < W and 0 <= jy < H:
                j = jy * W + jx
                if added[j]:
                    m |= marks[_find(parent, j)]
                    _union(parent, i, j)
        r = _find(parent, i)
        marks[r] |= m
        if marks[r] == 3:
            return flat[i]
    return np.inf


@njit(cache=True, nogil=True)
def _fill_from_bits(states, bits):
    H, W = states.shape
    for i in range(H * W):
        states[i // W, i % W] = (bits >> i) & 1


@njit(cache=True, nogil=True)
def crossing_table(H, W, color, vertical, lo, hi):
    """Crossing indicator for every configuration index in ``[lo, hi)``."""
    out = np.empty(hi - lo, dtype=np.bool_)
    states = np.empty((H, W), dtype=np.uint8)
    for c in range(lo, hi):
        _fill_from_bits(states, c)
        out[c - lo] = has_crossing(states, color, vertical)
    return out


@njit(cache=True, nogil=True)
def flip_pivotal_counts(table, nsites):
    """Number of flip-pivotal sites per configuration, from a full indicator table."""
    ncfg = table.shape[0]
    out = np.zeros(ncfg, dtype=np.int64)
    for c in range(ncfg):
        cnt = 0
        for j in range(nsites):
            bit = np.int64(1) << j
            if table[c | bit] != table[c & ~bit]:
                cnt += 1
        out[c] = cnt
    return out


@njit(cache=True, nogil=True)
def popcounts(ncfg):
    out = np.empty(ncfg, dtype=np.int64)
    for c in range(ncfg):
        x = c
        k = 0
        while x:
            x &= x - 1
            k += 1
        out[c] = k
    return out


@njit(cache=True, nogil=True)
def minimal_b_all(path_masks, b_masks, b_sizes, nsites):
    """For every configuration: the present path with smallest B, and the AND of all B.

    ``best[c] = -1`` when no path is contained in the open set of ``c``.
    Each path is visited once per superset of its site mask.
    """
    ncfg = np.int64(1) << nsites
    full = ncfg - 1
    best = np.full(ncfg, -1, dtype=np.int64)
    meet = np.full(ncfg, full, dtype=np.int64)
    for p in range(path_masks.shape[0]):
        m = path_masks[p]
        comp = full & ~m
        sub = comp
        while True:
            c = m | sub
            meet[c] &= b_masks[p]
            if best[c] < 0 or b_sizes[p] < b_sizes[best[c]]:
                best[c] = p
            if sub == 0:
                break
            sub = (sub - 1) & comp
    return best, meet
