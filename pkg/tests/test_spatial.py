from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from press.errors import CorruptStreamError, NetworkError, UnreachableError
from press.huffman import HuffmanCodebook, huffman_lengths, pack_bits
from press.network import RoadNetwork, build_sp_index
from press.spatial import (
    CompressedSpatial, FstModel, build_automaton, build_trie, decompose, fst_decode,
    fst_encode, fst_encode_optimal, hsc_compress, hsc_decompress, optimal_nodes, sp_compress,
    sp_decompress, train_model,
)

from helpers import (
    TOY_CORPUS, TOY_EDGES, TOY_NODE_IDS, TOY_PATH, all_splits, brute_suffix_link, e,
    min_anchor_subsequence, random_network, random_walk,
)

TOY_CODES = {16: "0111", 22: "01010000", 4: "1111", 9: "01001", 10: "00110", 24: "0101001"}
TOY_BITS = "011101010000111101001001100101001"


def _one_based(s):
    return tuple(x + 1 for x in s)


@pytest.fixture(scope="module")
def toy():
    trie = build_trie(TOY_CORPUS, 3, TOY_EDGES)
    model = FstModel(trie)
    return trie, model


# -- shortest-path stage -------------------------------------------------------------


def test_worked_example_sp_compression(grid16):
    net, idx = grid16
    path = e(15, 12, 9, 6, 3)
    assert sp_compress(path, idx) == e(15, 3)
    assert sp_decompress(e(15, 3), idx) == path
    # a detour off the recorded path keeps its turning edge
    detour = e(15, 16, 13, 6, 3)
    small = sp_compress(detour, idx)
    assert sp_decompress(small, idx) == detour
    assert len(small) < len(detour)


def test_short_paths_pass_through(grid16):
    _, idx = grid16
    assert sp_compress((3,), idx) == (3,)
    assert sp_compress(e(15, 12), idx) == e(15, 12)
    with pytest.raises(ValueError):
        sp_compress((), idx)
    with pytest.raises(NetworkError):
        sp_compress((99,), idx)


def test_decompress_rejects_unreachable_pairs(grid16):
    _, idx = grid16
    with pytest.raises(UnreachableError):
        sp_decompress(e(1, 15), idx)


def test_repeated_self_loop_survives():
    # vertex 0 has a self-loop (edge 0) plus an exit (edge 1)
    net = RoadNetwork([(0, 0.0, 0.0), (1, 1.0, 0.0)], [(0, 0, 0, 1.0), (1, 0, 1, 1.0), (2, 1, 0, 1.0)])
    idx = build_sp_index(net)
    for path in [(0, 0), (0, 0, 0, 1), (2, 0, 0, 1), (1, 2, 0, 0, 0)]:
        assert sp_decompress(sp_compress(path, idx), idx) == path


@given(st.integers(0, 2**32), st.integers(1, 40))
def test_sp_round_trip(seed, length):
    rng = random.Random(seed)
    net = random_network(rng, n_vertices=rng.randint(3, 9), n_edges=rng.randint(5, 25), grid=rng.random() < 0.5)
    idx = build_sp_index(net)
    path = random_walk(net, rng, length)
    small = sp_compress(path, idx)
    assert small[0] == path[0] and small[-1] == path[-1]
    assert sp_decompress(small, idx) == path


def _expander(idx):
    def expand(sub):
        try:
            return sp_decompress(sub, idx)
        except UnreachableError:
            return None
    return expand


@pytest.mark.parametrize("seed", range(25))
def test_greedy_matches_exhaustive_minimum(seed):
    rng = random.Random(seed)
    net = random_network(rng, n_vertices=rng.randint(4, 8), n_edges=rng.randint(8, 20), grid=True)
    idx = build_sp_index(net)
    for _ in range(8):
        path = random_walk(net, rng, rng.randint(1, 10))
        assert len(sp_compress(path, idx)) == min_anchor_subsequence(path, _expander(idx))


# -- trie, automaton, decomposition ---------------------------------------------------


def test_worked_example_trie(toy):
    trie, _ = toy
    windows = []
    for p in TOY_CORPUS:
        windows += [tuple(p[i:i + 3]) for i in range(len(p))]
    prefixes = {w[:k] for w in windows for k in range(1, len(w) + 1)}
    strings = {trie.string(n) for n in range(1, trie.n_nodes)}
    assert strings == prefixes | {(x,) for x in range(TOY_EDGES)}
    assert trie.n_nodes == 28
    assert trie.total_frequency() == 36
    # hand-counted frequencies (1-based edge strings)
    assert trie.freq[trie.find(e(1, 4, 6))] == 1
    assert trie.freq[trie.find(e(2, 1, 4))] == 2
    assert trie.freq[trie.find(e(1))] == 4
    for unseen in (7, 9, 10):
        assert trie.freq[trie.find(e(unseen))] == 0
    assert trie.find(e(7, 1)) == -1


def test_theta_one_is_alphabet_only():
    trie = build_trie(TOY_CORPUS, 1, TOY_EDGES)
    assert trie.n_nodes == 1 + TOY_EDGES
    assert trie.total_frequency() == sum(len(p) for p in TOY_CORPUS)


def test_trie_rejects_bad_input():
    with pytest.raises(ValueError):
        build_trie([], 3, 4)
    with pytest.raises(ValueError):
        build_trie([(0,)], 0, 4)
    with pytest.raises(NetworkError):
        build_trie([(0, 7)], 3, 4)


def test_worked_example_links(toy):
    trie, model = toy
    link = model.link
    # node 15 <e2,e1,e4> links to node 16 <e1,e4>, which links to node 20 <e4>
    assert link[trie.find(e(2, 1, 4))] == trie.find(e(1, 4))
    assert link[trie.find(e(1, 4))] == trie.find(e(4))
    assert link[trie.find(e(4))] == 0


@given(st.integers(0, 2**32))
def test_links_match_brute_force(seed):
    rng = random.Random(seed)
    n_edges = rng.randint(2, 6)
    corpus = [tuple(rng.randrange(n_edges) for _ in range(rng.randint(1, 12))) for _ in range(rng.randint(1, 5))]
    trie = build_trie(corpus, rng.randint(1, 5), n_edges)
    strings = [trie.string(n) for n in range(trie.n_nodes)]
    link = build_automaton(trie)
    assert link[0] == -1
    for n in range(1, trie.n_nodes):
        assert link[n] == brute_suffix_link(strings, n)


def test_worked_example_stack_trace(toy):
    trie, model = toy
    nodes, stack = model.decompose_with_stack(TOY_PATH)
    named = [TOY_NODE_IDS[_one_based(trie.string(n))] for n in reversed(stack)]
    assert named == [24, 10, 2, 1, 9, 6, 5, 4, 22, 16, 1]
    assert [TOY_NODE_IDS[_one_based(trie.string(n))] for n in nodes] == [16, 22, 4, 9, 10, 24]


def test_worked_example_table(toy):
    trie, model = toy
    nodes = decompose(model, TOY_PATH)
    # the reference codes reproduce the reference bit string
    codes = {trie.find(e(*s)): TOY_CODES[TOY_NODE_IDS[s]] for s in TOY_NODE_IDS if TOY_NODE_IDS[s] in TOY_CODES}
    fixed = HuffmanCodebook.from_codes(codes)
    data, n = fixed.encode(nodes)
    assert n == 33
    assert pack_bits(TOY_BITS) == data
    assert fixed.decode(pack_bits(TOY_BITS), 33) == nodes
    # our tree agrees on five of the six lengths and gives <e5> 5 bits instead of 4
    ours = [model.code_length(x) for x in nodes]
    assert ours == [4, 8, 5, 5, 5, 7]
    # <e8> has the same frequency as <e5> and a 4-bit code; swapping the two
    # lengths is an equally optimal tree, and it encodes the path in 33 bits
    a, b = trie.find(e(5)), trie.find(e(8))
    assert trie.freq[a] == trie.freq[b] == 2 and model.code_length(b) == 4
    lengths = model.codebook.lengths()
    lengths[a], lengths[b] = lengths[b], lengths[a]
    freqs = {s: trie.freq[s] for s in lengths}
    cost = lambda ls: sum(freqs[s] * ls[s] for s in ls)
    assert cost(lengths) == cost(huffman_lengths(freqs))
    swapped = FstModel(trie, model.link, HuffmanCodebook.from_lengths(lengths))
    assert [swapped.code_length(x) for x in nodes] == [4, 8, 4, 5, 5, 7]
    enc = fst_encode(TOY_PATH, swapped)
    assert enc.bit_count == 33
    assert fst_decode(enc, swapped) == TOY_PATH


@given(st.integers(0, 2**32), st.integers(1, 30))
def test_decomposition_concatenates_back(seed, length):
    rng = random.Random(seed)
    n_edges = rng.randint(1, 8)
    corpus = [tuple(rng.randrange(n_edges) for _ in range(rng.randint(1, 15))) for _ in range(3)]
    model = FstModel(build_trie(corpus, rng.randint(1, 4), n_edges))
    path = tuple(rng.randrange(n_edges) for _ in range(length))
    nodes, stack = model.decompose_with_stack(path)
    assert len(stack) == len(path)
    assert tuple(x for n in nodes for x in model.strings[n]) == path
    assert fst_decode(fst_encode(path, model), model) == path


# -- greedy versus optimal split ------------------------------------------------------


def _abcde_model():
    # a..e = 0..4; abc, cde and de are cheap, everything else costs 8 bits
    trie = build_trie([(0, 1, 2), (2, 3, 4), (3, 4)], 3, 5)
    cheap = {trie.find(s) for s in [(0, 1, 2), (2, 3, 4), (3, 4)]}
    lengths = {n: (2 if n in cheap else 8) for n in range(1, trie.n_nodes)}
    return FstModel(trie, codebook=HuffmanCodebook.from_lengths(lengths))


def test_greedy_can_lose_to_the_optimal_split():
    model = _abcde_model()
    path = (0, 1, 2, 3, 4)
    greedy = decompose(model, path)
    best = optimal_nodes(path, model)
    assert [model.strings[n] for n in best] == [(0, 1, 2), (3, 4)]
    assert model.codebook.bit_length(best) == 4
    assert model.codebook.bit_length(greedy) > 4
    assert fst_decode(fst_encode_optimal(path, model), model) == path


@given(st.integers(0, 2**32), st.integers(1, 12))
def test_optimal_split_matches_exhaustive(seed, length):
    rng = random.Random(seed)
    n_edges = rng.randint(1, 5)
    corpus = [tuple(rng.randrange(n_edges) for _ in range(rng.randint(1, 10))) for _ in range(3)]
    theta = rng.randint(1, 4)
    model = FstModel(build_trie(corpus, theta, n_edges))
    path = tuple(rng.randrange(n_edges) for _ in range(length))
    lookup = {model.strings[n]: n for n in range(1, model.trie.n_nodes)}
    brute = min(model.codebook.bit_length(s) for s in all_splits(path, lookup, theta))
    best = optimal_nodes(path, model)
    assert model.codebook.bit_length(best) == brute
    assert brute <= model.codebook.bit_length(decompose(model, path))


# -- hybrid pipeline ---------------------------------------------------------------------


def test_hybrid_round_trip(small_world):
    net, idx, corpus, model, _ = small_world
    for tr in corpus:
        c = hsc_compress(tr.path, idx, model)
        assert hsc_decompress(c, idx, model) == tr.path


def test_training_is_deterministic(small_world):
    _, idx, corpus, model, _ = small_world
    again = train_model([t.path for t in corpus[:30]], idx, 3)
    assert again.trie.parent == model.trie.parent
    assert again.codebook.lengths() == model.codebook.lengths()


def test_corrupt_spatial_stream(small_world):
    _, idx, _, model, _ = small_world
    with pytest.raises(CorruptStreamError):
        CompressedSpatial(9, b"\x00")
    with pytest.raises(CorruptStreamError):
        hsc_decompress(CompressedSpatial(0, b""), idx, model)
    with pytest.raises(CorruptStreamError):
        hsc_decompress(CompressedSpatial(3, b"\xff"), idx, model)  # ends mid-code
