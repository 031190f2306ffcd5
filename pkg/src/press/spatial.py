"""Lossless spatial path codec.

Stage one drops every edge implied by the recorded shortest path between
the edges kept around it. Stage two splits the remaining edge string into
frequent sub-strings mined from a training corpus (a depth-bounded trie with
suffix links) and writes one Huffman code per piece.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import CorruptStreamError, NetworkError, UnreachableError
from .huffman import HuffmanCodebook
from .network import SPIndex

NONE = -1
DEFAULT_THETA = 3


# -- shortest-path stage -------------------------------------------------------


def _as_path(path, n_edges):
    arr = np.asarray(path, dtype=np.int64)
    if arr.ndim != 1 or not len(arr):
        raise NetworkError("a spatial path needs at least one edge")
    if arr.min() < 0 or arr.max() >= n_edges:
        bad = [int(e) for e in arr if not 0 <= e < n_edges]
        raise NetworkError(f"edges not in network: {bad[:5]}")
    return arr.astype(np.int32)


def sp_compress(path, index: SPIndex) -> tuple:
    return tuple(kernels.sp_compress(_as_path(path, index.n_edges), index.sp_end).tolist())


def sp_decompress(compressed, index: SPIndex) -> tuple:
    arr = _as_path(compressed, index.n_edges)
    try:
        return tuple(kernels.sp_expand(arr, index.sp_end).tolist())
    except ValueError as exc:
        raise UnreachableError(str(exc)) from exc


# -- trie of frequent sub-trajectories ----------------------------------------


@dataclass(eq=False)
class Trie:
    """Node 0 is the root; ``label[0]`` is -1.

    Node ids follow first insertion, with unseen edges appended as
    zero-frequency depth-1 nodes in edge order.
    """

    theta: int
    n_edges: int
    parent: list
    label: list
    freq: list
    depth: list
    children: list = field(repr=False)  # per node: {edge: child}

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    def string(self, node: int) -> tuple:
        out = []
        while node > 0:
            out.append(self.label[node])
            node = self.parent[node]
        return tuple(reversed(out))

    def find(self, edges) -> int:
        """Node whose string is ``edges``, or -1."""
        node = 0
        for e in edges:
            node = self.children[node].get(e, NONE)
            if node == NONE:
                return NONE
        return node

    def total_frequency(self) -> int:
        return sum(self.freq[1:])

    @classmethod
    def from_arrays(cls, theta, n_edges, parent, label, freq):
        parent = [int(x) for x in parent]
        label = [int(x) for x in label]
        depth = [0] * len(parent)
        children = [dict() for _ in parent]
        for n in range(1, len(parent)):
            p = parent[n]
            if not 0 <= p < n:
                raise ValueError(f"node {n}: parent {p} must precede it")
            depth[n] = depth[p] + 1
            children[p][label[n]] = n
        return cls(int(theta), int(n_edges), parent, label, [int(x) for x in freq], depth, children)


def build_trie(corpus, theta: int, n_edges: int) -> Trie:
    """Count every sub-string of length up to ``theta`` starting at each position.

    ``corpus`` holds SP-compressed paths. Every node on an insertion path is
    incremented, so a node's frequency counts occurrences of its string as a
    prefix of some extracted window.
    """
    if theta < 1:
        raise ValueError("theta must be at least 1")
    corpus = [tuple(int(e) for e in p) for p in corpus]
    if not corpus:
        raise ValueError("empty training corpus")
    parent, label, freq, depth = [NONE], [NONE], [0], [0]
    children = [dict()]

    def child(node, e):
        nxt = children[node].get(e)
        if nxt is None:
            nxt = len(parent)
            parent.append(node)
            label.append(e)
            freq.append(0)
            depth.append(depth[node] + 1)
            children.append({})
            children[node][e] = nxt
        return nxt

    for path in corpus:
        for e in path:
            if not 0 <= e < n_edges:
                raise NetworkError(f"edge {e} not in network")
        for i in range(len(path)):
            node = 0
            for e in path[i:i + theta]:
                node = child(node, e)
                freq[node] += 1
    for e in range(n_edges):
        child(0, e)
    return Trie(theta, n_edges, parent, label, freq, depth, children)


def build_automaton(trie: Trie) -> list:
    """Suffix link per node: the node of the longest proper suffix in the trie."""
    link = [NONE] * trie.n_nodes
    link[0] = NONE
    queue = deque()
    for e, c in sorted(trie.children[0].items()):
        link[c] = 0
        queue.append(c)
    while queue:
        node = queue.popleft()
        for e, c in sorted(trie.children[node].items()):
            f = link[node]
            while f != NONE and e not in trie.children[f]:
                f = link[f]
            link[c] = 0 if f == NONE else trie.children[f][e]
            queue.append(c)
    return link


# -- trained model ----------------------------------------------------------------


class FstModel:
    """Trie, suffix links and codebook trained on one corpus.

    ``trie_dist`` and ``trie_mbr`` are filled in by the query layer and
    persisted with the model.
    """

    def __init__(self, trie: Trie, link=None, codebook=None, network_digest=b"",
                 trie_dist=None, trie_mbr=None):
        self.trie = trie
        self.link = list(link) if link is not None else build_automaton(trie)
        if codebook is None:
            codebook = HuffmanCodebook.from_frequencies(
                {n: trie.freq[n] for n in range(1, trie.n_nodes)}
            )
        self.codebook = codebook
        self.network_digest = bytes(network_digest)
        self.trie_dist = trie_dist
        self.trie_mbr = trie_mbr
        n = trie.n_nodes
        ptr = np.zeros(n + 1, dtype=np.int32)
        labels, kids = [], []
        for node in range(n):
            items = sorted(trie.children[node].items())
            labels.extend(e for e, _ in items)
            kids.extend(c for _, c in items)
            ptr[node + 1] = len(labels)
        self._child_ptr = ptr
        self._child_label = np.asarray(labels, dtype=np.int32)
        self._child_node = np.asarray(kids, dtype=np.int32)
        self._link = np.asarray(self.link, dtype=np.int32)
        self._depth = np.asarray(trie.depth, dtype=np.int32)
        self.strings = [()] + [trie.string(k) for k in range(1, n)]

    @property
    def theta(self) -> int:
        return self.trie.theta

    @property
    def n_edges(self) -> int:
        return self.trie.n_edges

    def code_length(self, node: int) -> int:
        return self.codebook.length(node)

    def decompose_with_stack(self, path):
        arr = _as_path(path, self.n_edges)
        try:
            nodes, stack = kernels.decompose(
                arr, self._child_ptr, self._child_label, self._child_node, self._link, self._depth
            )
        except ValueError as exc:
            raise NetworkError(str(exc)) from exc
        return nodes.tolist(), stack.tolist()


def train_model(corpus, index: SPIndex, theta: int = DEFAULT_THETA, already_compressed=False) -> FstModel:
    """SP-compress ``corpus`` (unless told otherwise) and mine an FST model."""
    paths = corpus if already_compressed else [sp_compress(p, index) for p in corpus]
    trie = build_trie(paths, theta, index.n_edges)
    return FstModel(trie, network_digest=index.network_digest)


def decompose(model: FstModel, path) -> list:
    """Split ``path`` into trie nodes whose strings concatenate back to it."""
    return model.decompose_with_stack(path)[0]


@dataclass(frozen=True)
class CompressedSpatial:
    bit_count: int
    data: bytes

    def __post_init__(self):
        if self.bit_count > len(self.data) * 8:
            raise CorruptStreamError("bit count exceeds the stored bytes")


def encode_nodes(nodes, model: FstModel) -> CompressedSpatial:
    data, n = model.codebook.encode(nodes)
    return CompressedSpatial(n, data)


def fst_encode(path, model: FstModel) -> CompressedSpatial:
    return encode_nodes(decompose(model, path), model)


def optimal_nodes(path, model: FstModel) -> list:
    """Minimum-bit split of ``path`` into trie strings (dynamic program)."""
    p = [int(e) for e in _as_path(path, model.n_edges)]
    n = len(p)
    inf = float("inf")
    cost = [inf] * (n + 1)
    back = [NONE] * (n + 1)
    cost[0] = 0
    children = model.trie.children
    lengths = model.codebook.codes
    theta = model.theta
    for j in range(n):
        if cost[j] == inf:
            continue
        node = 0
        for k in range(j, min(n, j + theta)):
            node = children[node].get(p[k], NONE)
            if node == NONE:
                break
            c = cost[j] + lengths[node][1]
            if c < cost[k + 1]:
                cost[k + 1] = c
                back[k + 1] = node
    if cost[n] == inf:
        raise NetworkError("path cannot be split into trie strings")
    out = []
    k = n
    while k > 0:
        node = back[k]
        out.append(node)
        k -= model.trie.depth[node]
    out.reverse()
    return out


def fst_encode_optimal(path, model: FstModel) -> CompressedSpatial:
    return encode_nodes(optimal_nodes(path, model), model)


def decode_nodes(compressed: CompressedSpatial, model: FstModel) -> list:
    nodes = model.codebook.decode(compressed.data, compressed.bit_count)
    if any(n == 0 for n in nodes):
        raise CorruptStreamError("stream decodes to the trie root")
    return nodes


def fst_decode(compressed: CompressedSpatial, model: FstModel) -> tuple:
    strings = model.strings
    out = []
    for n in decode_nodes(compressed, model):
        out.extend(strings[n])
    return tuple(out)


def hsc_compress(path, index: SPIndex, model: FstModel) -> CompressedSpatial:
    return fst_encode(sp_compress(path, index), model)


def hsc_decompress(compressed: CompressedSpatial, index: SPIndex, model: FstModel) -> tuple:
    sp = fst_decode(compressed, model)
    if not sp:
        raise CorruptStreamError("empty spatial stream")
    return sp_decompress(sp, index)
