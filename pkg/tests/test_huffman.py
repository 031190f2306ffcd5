from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from press.errors import CorruptStreamError
from press.huffman import HuffmanCodebook, huffman_lengths, pack_bits, unpack_bits

from helpers import optimal_code_cost

freq_maps = st.dictionaries(st.integers(0, 500), st.integers(0, 1000), min_size=1, max_size=60)


def test_pack_unpack():
    assert pack_bits("1") == b"\x80"
    assert pack_bits("0000000011") == b"\x00\xc0"
    assert unpack_bits(b"\x00\xc0", 10) == "0000000011"


def test_single_symbol_gets_one_bit():
    cb = HuffmanCodebook.from_frequencies({7: 3})
    assert cb.length(7) == 1
    data, n = cb.encode([7, 7, 7])
    assert n == 3
    assert cb.decode(data, n) == [7, 7, 7]


@given(freq_maps)
def test_lengths_are_optimal(freqs):
    lengths = huffman_lengths(freqs)
    cost = sum(freqs[s] * lengths[s] for s in freqs)
    if len(freqs) > 1:
        assert cost == optimal_code_cost(list(freqs.values()))
        assert sum(Fraction(1, 2 ** n) for n in lengths.values()) == 1


@given(freq_maps)
def test_canonical_codes_are_prefix_free(freqs):
    cb = HuffmanCodebook.from_frequencies(freqs)
    codes = sorted(cb.bits(s) for s in freqs)
    for a, b in zip(codes, codes[1:]):
        assert not b.startswith(a)
    # lengths alone rebuild the same codebook
    again = HuffmanCodebook.from_lengths(cb.lengths())
    assert all(again.bits(s) == cb.bits(s) for s in freqs)


@given(freq_maps, st.data())
def test_round_trip(freqs, data):
    cb = HuffmanCodebook.from_frequencies(freqs)
    msg = data.draw(st.lists(st.sampled_from(sorted(freqs)), max_size=200))
    payload, n = cb.encode(msg)
    assert n == cb.bit_length(msg)
    assert cb.decode(payload, n) == msg


def test_deterministic_ties():
    freqs = {s: 1 for s in range(10)}
    assert huffman_lengths(freqs) == huffman_lengths(dict(reversed(list(freqs.items()))))


def test_long_codes_decode():
    # Fibonacci weights give a maximally skewed tree, deeper than 64 bits
    fib = [1, 1]
    while len(fib) < 80:
        fib.append(fib[-1] + fib[-2])
    cb = HuffmanCodebook.from_frequencies(dict(enumerate(fib)))
    assert max(cb.lengths().values()) > 64
    msg = [0, 1, 79, 40, 0, 2]
    assert cb.decode(*cb.encode(msg)) == msg


def test_corrupt_streams():
    cb = HuffmanCodebook.from_lengths({1: 1, 2: 2, 3: 3})  # codes 0, 10, 110; 111 unused
    with pytest.raises(CorruptStreamError):
        cb.decode(pack_bits("111"), 3)
    with pytest.raises(CorruptStreamError):
        cb.decode(pack_bits("11"), 2)  # stops mid-code
    with pytest.raises(CorruptStreamError):
        cb.decode(b"", 4)


def test_kraft_violation_rejected():
    with pytest.raises(ValueError):
        HuffmanCodebook.from_lengths({1: 1, 2: 1, 3: 1})
    with pytest.raises(ValueError):
        HuffmanCodebook.from_codes({1: "0", 2: "01"})


def test_explicit_codebook_decodes():
    cb = HuffmanCodebook.from_codes({1: "0", 2: "10", 3: "11"})
    assert cb.decode(pack_bits("011100"), 6) == [1, 3, 2, 1]
