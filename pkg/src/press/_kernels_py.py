"""Pure-Python implementations of the hot kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature
and identical results; ``press.kernels`` picks one at import time. Inputs
are numpy arrays with the dtypes documented per function, outputs are
numpy arrays.
"""

from __future__ import annotations

import heapq

import numpy as np

NONE = -1
INF_UNITS = -1


def build_sp_tables(succ_ptr, succ_idx, weight, perturb, bbox):
    """All-pairs edge-to-edge shortest paths, one Dijkstra tree per source.

    Path keys are ``(sum of weights after the source, sum of perturbations)``
    compared lexicographically; residual ties go to the smaller predecessor
    id. Returns ``(sp_end, sp_next, sp_dist, sp_mbr)`` where ``sp_end`` is
    the predecessor of the target, ``sp_next`` the first edge after the
    source, ``sp_dist`` the integer distance (``-1`` if unreachable) and
    ``sp_mbr`` the bounding box of every edge on the path (NaN if
    unreachable).
    """
    n = len(weight)
    ptr = succ_ptr.tolist()
    idx = succ_idx.tolist()
    w = weight.tolist()
    h = perturb.tolist()
    boxes = bbox.tolist()
    sp_end = np.full((n, n), NONE, dtype=np.int32)
    sp_next = np.full((n, n), NONE, dtype=np.int32)
    sp_dist = np.full((n, n), INF_UNITS, dtype=np.int64)
    sp_mbr = np.full((n, n, 4), np.nan, dtype=np.float64)
    for s in range(n):
        dist_w = [None] * n
        dist_h = [0] * n
        pred = [NONE] * n
        nxt = [NONE] * n
        done = [False] * n
        mbr = [None] * n
        dist_w[s] = 0
        heap = [(0, 0, s)]
        while heap:
            dw, dh, u = heapq.heappop(heap)
            if done[u] or dw != dist_w[u] or dh != dist_h[u]:
                continue
            done[u] = True
            p = pred[u]
            if u == s:
                mbr[u] = boxes[u]
            else:
                nxt[u] = u if p == s else nxt[p]
                a, b = mbr[p], boxes[u]
                mbr[u] = [min(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), max(a[3], b[3])]
            for k in range(ptr[u], ptr[u + 1]):
                v = idx[k]
                if done[v]:
                    continue
                nw = dw + w[v]
                nh = dh + h[v]
                cur = dist_w[v]
                if cur is None or nw < cur or (nw == cur and nh < dist_h[v]):
                    dist_w[v] = nw
                    dist_h[v] = nh
                    pred[v] = u
                    heapq.heappush(heap, (nw, nh, v))
                elif nw == cur and nh == dist_h[v] and u < pred[v]:
                    pred[v] = u
        row_end = sp_end[s]
        row_next = sp_next[s]
        row_dist = sp_dist[s]
        row_mbr = sp_mbr[s]
        for v in range(n):
            if done[v]:
                row_end[v] = pred[v]
                row_next[v] = nxt[v]
                row_dist[v] = dist_w[v]
                row_mbr[v] = mbr[v]
    return sp_end, sp_next, sp_dist, sp_mbr


def sp_compress(path, sp_end):
    """Greedy shortest-path compression of an edge sequence.

    ``p[i]`` is dropped when the recorded shortest path from the last kept
    edge to ``p[i + 1]`` arrives through ``p[i]``.
    """
    p = path.tolist()
    n = len(p)
    if n <= 2:
        return np.asarray(p, dtype=np.int32)
    out = [p[0]]
    anchor = p[0]
    for i in range(1, n - 1):
        # an immediate repeat of the anchor (self-loop) is never implied
        if p[i] == anchor or sp_end[anchor, p[i + 1]] != p[i]:
            out.append(p[i])
            anchor = p[i]
    out.append(p[-1])
    return np.asarray(out, dtype=np.int32)


def sp_expand(compressed, sp_end):
    """Splice the recorded shortest path between every consecutive pair.

    A repeated edge (``a, a``) stands for a literal repetition and is copied.
    Raises ``ValueError`` when a pair is unreachable.
    """
    c = compressed.tolist()
    if not c:
        return np.zeros(0, dtype=np.int32)
    out = [c[0]]
    for k in range(len(c) - 1):
        a, b = c[k], c[k + 1]
        if a == b:
            out.append(b)
            continue
        seg = []
        x = b
        while x != a:
            seg.append(x)
            x = int(sp_end[a, x])
            if x == NONE or len(seg) > sp_end.shape[0]:
                raise ValueError(f"edges {a} and {b} are not connected (position {k})")
        seg.reverse()
        out.extend(seg)
    return np.asarray(out, dtype=np.int32)


def decompose(path, child_ptr, child_label, child_node, link, depth):
    """Aho-Corasick forward pass plus backward longest-match split.

    Returns ``(nodes, stack)``: the emitted trie nodes in path order and the
    matched node per position (bottom of the stack first).
    """
    p = path.tolist()
    ptr = child_ptr.tolist()
    labels = child_label.tolist()
    kids = child_node.tolist()
    lnk = link.tolist()
    dep = depth.tolist()
    stack = []
    node = 0
    i = 0
    n = len(p)
    while i < n:
        e = p[i]
        lo, hi = ptr[node], ptr[node + 1]
        child = NONE
        while lo < hi:
            mid = (lo + hi) // 2
            lab = labels[mid]
            if lab < e:
                lo = mid + 1
            elif lab > e:
                hi = mid
            else:
                child = kids[mid]
                break
        if child != NONE:
            stack.append(child)
            node = child
            i += 1
        elif lnk[node] != NONE:
            node = lnk[node]
        else:
            raise ValueError(f"edge {e} at position {i} is not in the trie alphabet")
    out = []
    skip = 0
    for node in reversed(stack):
        if skip == 0:
            out.append(node)
            skip = dep[node] - 1
        else:
            skip -= 1
    out.reverse()
    return np.asarray(out, dtype=np.int32), np.asarray(stack, dtype=np.int32)


def canonical_decode(data, bit_count, counts, symbols):
    """Decode ``bit_count`` bits of canonical Huffman codes.

    ``counts[L]`` is the number of codes of length ``L`` and ``symbols`` the
    symbols sorted by ``(length, symbol)``. Raises ``ValueError`` if the
    stream does not end on a code boundary.
    """
    buf = bytes(data)
    cnt = counts.tolist()
    sym = symbols.tolist()
    max_len = len(cnt) - 1
    out = []
    code = first = index = 0
    length = 0
    for pos in range(bit_count):
        bit = (buf[pos >> 3] >> (7 - (pos & 7))) & 1
        code |= bit
        length += 1
        if length > max_len:
            raise ValueError(f"invalid code ending at bit {pos}")
        c = cnt[length]
        if code - c < first:
            out.append(sym[index + code - first])
            code = first = index = 0
            length = 0
        else:
            index += c
            first += c
            first <<= 1
            code <<= 1
    if length:
        raise ValueError("bitstream ends inside a code")
    return np.asarray(out, dtype=np.int32)
