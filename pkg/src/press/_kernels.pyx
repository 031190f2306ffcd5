# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint8_t
from libc.stdlib cimport malloc, free

cnp.import_array()

DEF NONE = -1


cdef struct HeapItem:
    int64_t w
    int64_t h
    int32_t node


cdef inline bint _less(HeapItem a, HeapItem b) nogil:
    if a.w != b.w:
        return a.w < b.w
    if a.h != b.h:
        return a.h < b.h
    return a.node < b.node


cdef inline void _push(HeapItem* heap, Py_ssize_t* size, HeapItem item) nogil:
    cdef Py_ssize_t i = size[0]
    cdef Py_ssize_t parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(item, heap[parent]):
            heap[i] = heap[parent]
            i = parent
        else:
            break
    heap[i] = item


cdef inline HeapItem _pop(HeapItem* heap, Py_ssize_t* size) nogil:
    cdef HeapItem top = heap[0]
    cdef HeapItem last
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t child
    size[0] -= 1
    last = heap[size[0]]
    while True:
        child = 2 * i + 1
        if child >= size[0]:
            break
        if child + 1 < size[0] and _less(heap[child + 1], heap[child]):
            child += 1
        if _less(heap[child], last):
            heap[i] = heap[child]
            i = child
        else:
            break
    if size[0] > 0:
        heap[i] = last
    return top


def build_sp_tables(succ_ptr, succ_idx, weight, perturb, bbox):
    cdef const int32_t[:] ptr = np.ascontiguousarray(succ_ptr, dtype=np.int32)
    cdef const int32_t[:] idx = np.ascontiguousarray(succ_idx, dtype=np.int32)
    cdef const int64_t[:] w = np.ascontiguousarray(weight, dtype=np.int64)
    cdef const int64_t[:] hh = np.ascontiguousarray(perturb, dtype=np.int64)
    cdef const double[:, :] box = np.ascontiguousarray(bbox, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    end_arr = np.full((n, n), NONE, dtype=np.int32)
    next_arr = np.full((n, n), NONE, dtype=np.int32)
    dist_arr = np.full((n, n), -1, dtype=np.int64)
    mbr_arr = np.full((n, n, 4), np.nan, dtype=np.float64)
    cdef int32_t[:, :] sp_end = end_arr
    cdef int32_t[:, :] sp_next = next_arr
    cdef int64_t[:, :] sp_dist = dist_arr
    cdef double[:, :, :] sp_mbr = mbr_arr
    cdef Py_ssize_t cap = n + idx.shape[0] + 1
    cdef HeapItem* heap = <HeapItem*> malloc(cap * sizeof(HeapItem))
    cdef int64_t* dw = <int64_t*> malloc(n * sizeof(int64_t))
    cdef int64_t* dh = <int64_t*> malloc(n * sizeof(int64_t))
    cdef int32_t* pred = <int32_t*> malloc(n * sizeof(int32_t))
    cdef uint8_t* seen = <uint8_t*> malloc(n * sizeof(uint8_t))
    cdef uint8_t* done = <uint8_t*> malloc(n * sizeof(uint8_t))
    if heap == NULL or dw == NULL or dh == NULL or pred == NULL or seen == NULL or done == NULL:
        free(heap); free(dw); free(dh); free(pred); free(seen); free(done)
        raise MemoryError()
    cdef Py_ssize_t s, v, k, size
    cdef int32_t u, p
    cdef int64_t nw, nh
    cdef HeapItem item
    try:
        with nogil:
            for s in range(n):
                for v in range(n):
                    seen[v] = 0
                    done[v] = 0
                    pred[v] = NONE
                dw[s] = 0
                dh[s] = 0
                seen[s] = 1
                size = 0
                item.w = 0
                item.h = 0
                item.node = <int32_t>s
                _push(heap, &size, item)
                while size > 0:
                    item = _pop(heap, &size)
                    u = item.node
                    if done[u] or item.w != dw[u] or item.h != dh[u]:
                        continue
                    done[u] = 1
                    p = pred[u]
                    sp_end[s, u] = p
                    sp_dist[s, u] = dw[u]
                    if u == s:
                        for k in range(4):
                            sp_mbr[s, u, k] = box[u, k]
                    else:
                        if p == s:
                            sp_next[s, u] = u
                        else:
                            sp_next[s, u] = sp_next[s, p]
                        sp_mbr[s, u, 0] = min(sp_mbr[s, p, 0], box[u, 0])
                        sp_mbr[s, u, 1] = min(sp_mbr[s, p, 1], box[u, 1])
                        sp_mbr[s, u, 2] = max(sp_mbr[s, p, 2], box[u, 2])
                        sp_mbr[s, u, 3] = max(sp_mbr[s, p, 3], box[u, 3])
                    for k in range(ptr[u], ptr[u + 1]):
                        v = idx[k]
                        if done[v]:
                            continue
                        nw = dw[u] + w[v]
                        nh = dh[u] + hh[v]
                        if not seen[v] or nw < dw[v] or (nw == dw[v] and nh < dh[v]):
                            seen[v] = 1
                            dw[v] = nw
                            dh[v] = nh
                            pred[v] = u
                            item.w = nw
                            item.h = nh
                            item.node = <int32_t>v
                            _push(heap, &size, item)
                        elif nw == dw[v] and nh == dh[v] and u < pred[v]:
                            pred[v] = u
    finally:
        free(heap); free(dw); free(dh); free(pred); free(seen); free(done)
    return end_arr, next_arr, dist_arr, mbr_arr


def sp_compress(path, sp_end):
    cdef const int32_t[:] p = np.ascontiguousarray(path, dtype=np.int32)
    cdef const int32_t[:, :] end = sp_end
    cdef Py_ssize_t n = p.shape[0]
    if n <= 2:
        return np.asarray(p, dtype=np.int32).copy()
    out_arr = np.empty(n, dtype=np.int32)
    cdef int32_t[:] out = out_arr
    cdef Py_ssize_t i, m = 1
    cdef int32_t anchor = p[0]
    out[0] = anchor
    for i in range(1, n - 1):
        if p[i] == anchor or end[anchor, p[i + 1]] != p[i]:
            out[m] = p[i]
            m += 1
            anchor = p[i]
    out[m] = p[n - 1]
    return out_arr[:m + 1].copy()


def sp_expand(compressed, sp_end):
    cdef const int32_t[:] c = np.ascontiguousarray(compressed, dtype=np.int32)
    cdef const int32_t[:, :] end = sp_end
    cdef Py_ssize_t m = c.shape[0]
    cdef Py_ssize_t n_edges = end.shape[0]
    if m == 0:
        return np.zeros(0, dtype=np.int32)
    cdef Py_ssize_t cap = m + 16
    out_arr = np.empty(cap, dtype=np.int32)
    cdef int32_t[:] out = out_arr
    seg_arr = np.empty(n_edges + 1, dtype=np.int32)
    cdef int32_t[:] seg = seg_arr
    cdef Py_ssize_t k, j, length, size = 1
    cdef int32_t a, b, x
    out[0] = c[0]
    for k in range(m - 1):
        a = c[k]
        b = c[k + 1]
        if a == b:
            length = 1
            seg[0] = b
        else:
            length = 0
            x = b
            while x != a:
                if x == NONE or length >= n_edges:
                    raise ValueError(f"edges {a} and {b} are not connected (position {k})")
                seg[length] = x
                length += 1
                x = end[a, x]
        if size + length > cap:
            cap = 2 * (size + length)
            out_arr = np.resize(out_arr, cap)
            out = out_arr
        for j in range(length):
            out[size + j] = seg[length - 1 - j]
        size += length
    return out_arr[:size].copy()


def decompose(path, child_ptr, child_label, child_node, link, depth):
    cdef const int32_t[:] p = np.ascontiguousarray(path, dtype=np.int32)
    cdef const int32_t[:] ptr = child_ptr
    cdef const int32_t[:] labels = child_label
    cdef const int32_t[:] kids = child_node
    cdef const int32_t[:] lnk = link
    cdef const int32_t[:] dep = depth
    cdef Py_ssize_t n = p.shape[0]
    stack_arr = np.empty(n, dtype=np.int32)
    out_arr = np.empty(n, dtype=np.int32)
    cdef int32_t[:] stack = stack_arr
    cdef int32_t[:] out = out_arr
    cdef Py_ssize_t i = 0, lo, hi, mid, m = 0, k
    cdef int32_t node = 0, child, e, lab, skip = 0
    while i < n:
        e = p[i]
        lo = ptr[node]
        hi = ptr[node + 1]
        child = NONE
        while lo < hi:
            mid = (lo + hi) >> 1
            lab = labels[mid]
            if lab < e:
                lo = mid + 1
            elif lab > e:
                hi = mid
            else:
                child = kids[mid]
                break
        if child != NONE:
            stack[i] = child
            node = child
            i += 1
        elif lnk[node] != NONE:
            node = lnk[node]
        else:
            raise ValueError(f"edge {e} at position {i} is not in the trie alphabet")
    for k in range(n - 1, -1, -1):
        if skip == 0:
            out[m] = stack[k]
            m += 1
            skip = dep[stack[k]] - 1
        else:
            skip -= 1
    return out_arr[:m][::-1].copy(), stack_arr


def canonical_decode(data, Py_ssize_t bit_count, counts, symbols):
    cdef const uint8_t[:] buf = np.frombuffer(bytes(data), dtype=np.uint8)
    cdef const int64_t[:] cnt = np.ascontiguousarray(counts, dtype=np.int64)
    cdef const int32_t[:] sym = np.ascontiguousarray(symbols, dtype=np.int32)
    cdef Py_ssize_t max_len = cnt.shape[0] - 1
    if bit_count > buf.shape[0] * 8:
        raise ValueError("bit count exceeds buffer")
    out_arr = np.empty(bit_count, dtype=np.int32)
    cdef int32_t[:] out = out_arr
    cdef Py_ssize_t pos, m = 0, length = 0
    cdef int64_t code = 0, first = 0, index = 0, c
    for pos in range(bit_count):
        code |= (buf[pos >> 3] >> (7 - (pos & 7))) & 1
        length += 1
        if length > max_len:
            raise ValueError(f"invalid code ending at bit {pos}")
        c = cnt[length]
        if code - c < first:
            out[m] = sym[index + code - first]
            m += 1
            code = 0
            first = 0
            index = 0
            length = 0
        else:
            index += c
            first += c
            first <<= 1
            code <<= 1
    if length:
        raise ValueError("bitstream ends inside a code")
    return out_arr[:m].copy()
