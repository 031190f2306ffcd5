"""Hand-built fixtures and slow-but-obvious oracles shared by the tests."""

from __future__ import annotations

import heapq
import itertools
import random
from fractions import Fraction

from press.network import RoadNetwork

# criterion number -> (name, passed, detail); filled by the acceptance tests
ACCEPTANCE = {}


def record(number: int, name: str, passed: bool, detail: str = ""):
    ACCEPTANCE[number] = (name, passed, detail)


# Worked-example network: edge e_k of the hand-worked example is id k - 1 here.
GRID16_EDGES = {
    15: (9, 10, 2), 16: (10, 11, 3), 12: (10, 6, 2), 13: (11, 7, 3),
    9: (6, 7, 2), 6: (7, 3, 2), 3: (3, 4, 2), 10: (7, 8, 2),
    7: (8, 4, 2), 11: (11, 12, 4), 8: (12, 8, 4), 4: (2, 3, 3),
    5: (6, 2, 3), 1: (1, 2, 3), 2: (5, 6, 3), 14: (9, 5, 3),
}

# Three-trajectory training corpus over ten edges, in 0-based ids.
TOY_CORPUS = [(0, 4, 7, 5, 2), (0, 4, 1, 0, 3, 7), (1, 0, 3, 5)]
TOY_EDGES = 10

# Node numbering of the worked example, keyed by 1-based edge strings.
TOY_NODE_IDS = {
    (1,): 1, (1, 5): 2, (1, 5, 8): 3, (5,): 4, (5, 8): 5, (5, 8, 6): 6, (8, 6, 3): 9,
    (1, 5, 2): 10, (2, 1, 4): 15, (1, 4): 16, (1, 4, 6): 18, (4,): 20, (7,): 22, (10,): 24,
}

# <e1, e4, e7, e5, e8, e6, e3, e1, e5, e2, e10>
TOY_PATH = (0, 3, 6, 4, 7, 5, 2, 0, 4, 1, 9)


def e(*ks):
    """1-based example edge numbers to 0-based ids."""
    return tuple(k - 1 for k in ks)


def grid16_network() -> RoadNetwork:
    vertices = [(v, ((v - 1) % 4) * 100.0, -((v - 1) // 4) * 100.0) for v in range(1, 13)]
    edges = [(k - 1, u, v, w * 100.0) for k, (u, v, w) in GRID16_EDGES.items()]
    return RoadNetwork(vertices, edges)


def random_network(rng: random.Random, n_vertices=8, n_edges=20, grid=False):
    """Random strongly-unstructured digraph; may contain self-loops and parallel edges."""
    vertices = [(v, rng.uniform(0, 1000), rng.uniform(0, 1000)) for v in range(n_vertices)]
    edges = []
    for k in range(n_edges):
        u = rng.randrange(n_vertices)
        v = rng.randrange(n_vertices)
        w = rng.choice([1, 2, 3, 5]) * 100 if grid else rng.randint(1, 40) * 25
        edges.append((k, u, v, float(w)))
    return RoadNetwork(vertices, edges)


def random_walk(net: RoadNetwork, rng: random.Random, length: int, start=None):
    cur = rng.randrange(net.n_edges) if start is None else start
    out = [cur]
    while len(out) < length:
        succ = net.successors[cur]
        if not succ:
            break
        cur = rng.choice(succ)
        out.append(cur)
    return tuple(out)


def dijkstra_edge(net: RoadNetwork, src: int):
    """Plain edge-graph Dijkstra on integer units: cost excludes the source edge."""
    dist = {src: 0}
    heap = [(0, src)]
    while heap:
        d, x = heapq.heappop(heap)
        if d > dist.get(x, float("inf")):
            continue
        for y in net.successors[x]:
            nd = d + net.weight_units[y]
            if nd < dist.get(y, float("inf")):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist


def is_shortest(net: RoadNetwork, path, dist_cache=None) -> bool:
    """Whether consecutive-edge ``path`` is a minimum-cost route between its ends."""
    if len(path) <= 1:
        return True
    dists = dijkstra_edge(net, path[0])
    cost = sum(net.weight_units[x] for x in path[1:])
    return cost == dists.get(path[-1])


def min_anchor_subsequence(path, expand) -> int:
    """Exhaustive: smallest subsequence keeping both ends whose expansion is ``path``."""
    n = len(path)
    if n <= 2:
        return n
    inner = range(1, n - 1)
    for k in range(0, n - 1):
        for keep in itertools.combinations(inner, k):
            idx = (0, *keep, n - 1)
            sub = tuple(path[i] for i in idx)
            if expand(sub) == tuple(path):
                return len(sub)
    return n


def brute_suffix_link(strings, node):
    """Longest proper suffix of ``strings[node]`` present among the strings."""
    s = strings[node]
    lookup = {t: k for k, t in enumerate(strings)}
    for k in range(1, len(s) + 1):
        if s[k:] in lookup:
            return lookup[s[k:]]
    return 0


def all_splits(path, strings_to_node, theta):
    """Every decomposition of ``path`` into known strings (exponential)."""
    if not path:
        yield []
        return
    for k in range(1, min(theta, len(path)) + 1):
        node = strings_to_node.get(tuple(path[:k]))
        if node is not None:
            for rest in all_splits(path[k:], strings_to_node, theta):
                yield [node] + rest


def optimal_code_cost(freqs) -> int:
    """Weighted external path length of an optimal prefix code (sum of merges)."""
    w = [f for f in freqs]
    if len(w) == 1:
        return w[0]
    heapq.heapify(w)
    total = 0
    while len(w) > 1:
        a = heapq.heappop(w)
        b = heapq.heappop(w)
        total += a + b
        heapq.heappush(w, a + b)
    return total


def random_times(rng: random.Random, total: float, n: int, stop_p=0.15):
    """Random valid (d, t) sequence from 0 to ``total`` with some stops."""
    n = max(n, 2)
    steps = [0.0 if rng.random() < stop_p else rng.uniform(0.1, 1.0) for _ in range(n - 1)]
    s = sum(steps) or 1.0
    d = 0.0
    t = rng.uniform(0, 1000)
    out = [(0.0, t)]
    for st in steps:
        d = min(total, d + st * total / s)
        t += rng.choice([1.0, 2.5, 5.0, rng.uniform(0.5, 20)])
        out.append((round(d, 3), round(t, 3)))
    out[-1] = (total, out[-1][1])
    # rounding can break monotone distance near the end
    fixed = [out[0]]
    for dd, tt in out[1:]:
        fixed.append((max(dd, fixed[-1][0]), tt))
    return fixed


def interp_exact(xs, ys, x):
    """Earliest-breakpoint piecewise-linear value, with Fractions."""
    x = Fraction(x)
    xs = [Fraction(v) for v in xs]
    ys = [Fraction(v) for v in ys]
    for i, xi in enumerate(xs):
        if xi == x:
            return ys[i]
    for i in range(len(xs) - 1):
        if xs[i] < x < xs[i + 1]:
            return ys[i] + (ys[i + 1] - ys[i]) * (x - xs[i]) / (xs[i + 1] - xs[i])
    raise ValueError("outside domain")
