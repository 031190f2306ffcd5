"""Huffman codebooks over integer symbols, packed MSB-first.

Trees are built with a stable priority so that equal frequencies always
give the same code lengths; codes are then assigned canonically in
``(length, symbol)`` order, which lets a codebook be stored as lengths only.
"""

from __future__ import annotations

import heapq

import numpy as np

from . import kernels
from .errors import CorruptStreamError


def huffman_lengths(freqs: dict) -> dict:
    """Code length per symbol for a Huffman tree over ``freqs``.

    Leaves are ordered by ``(frequency, symbol)``; merged nodes rank after
    every leaf of equal weight, in creation order.
    """
    symbols = sorted(freqs)
    if not symbols:
        return {}
    if len(symbols) == 1:
        return {symbols[0]: 1}
    n = len(symbols)
    heap = [(int(freqs[s]), k) for k, s in enumerate(symbols)]
    heapq.heapify(heap)
    parent = [0] * (2 * n - 1)
    seq = n
    while len(heap) > 1:
        w1, a = heapq.heappop(heap)
        w2, b = heapq.heappop(heap)
        parent[a] = parent[b] = seq
        heapq.heappush(heap, (w1 + w2, seq))
        seq += 1
    root = seq - 1
    depth = [0] * (2 * n - 1)
    for node in range(root - 1, -1, -1):
        depth[node] = depth[parent[node]] + 1
    return {s: depth[k] for k, s in enumerate(symbols)}


class HuffmanCodebook:
    """Prefix-free code over integer symbols.

    Build with :meth:`from_frequencies` or :meth:`from_lengths` for a
    canonical code, or :meth:`from_codes` for an explicit assignment.
    """

    def __init__(self, codes: dict, canonical: bool):
        self.codes = dict(codes)  # symbol -> (value, length)
        self.canonical = canonical
        self._bits = {s: format(v, f"0{n}b") for s, (v, n) in self.codes.items()}
        if canonical:
            max_len = max((n for _, n in self.codes.values()), default=0)
            counts = np.zeros(max_len + 1, dtype=np.int64)
            for _, n in self.codes.values():
                counts[n] += 1
            order = sorted(self.codes, key=lambda s: (self.codes[s][1], s))
            self._counts = counts
            self._symbols = np.asarray(order, dtype=np.int32)
        else:
            self._lookup = {bits: s for s, bits in self._bits.items()}
            if len(self._lookup) != len(self._bits):
                raise ValueError("duplicate codes")
            for bits in self._lookup:
                for k in range(1, len(bits)):
                    if bits[:k] in self._lookup:
                        raise ValueError(f"code {bits[:k]} is a prefix of {bits}")

    @classmethod
    def from_frequencies(cls, freqs: dict) -> HuffmanCodebook:
        return cls.from_lengths(huffman_lengths(freqs))

    @classmethod
    def from_lengths(cls, lengths: dict) -> HuffmanCodebook:
        """Canonical code for the given lengths (shorter first, then by symbol)."""
        codes = {}
        code = 0
        prev = 0
        for s in sorted(lengths, key=lambda s: (lengths[s], s)):
            n = int(lengths[s])
            if n < 1:
                raise ValueError(f"symbol {s}: code length must be positive")
            code <<= n - prev
            if code >> n:
                raise ValueError("lengths violate the Kraft inequality")
            codes[s] = (code, n)
            code += 1
            prev = n
        return cls(codes, canonical=True)

    @classmethod
    def from_codes(cls, codes: dict) -> HuffmanCodebook:
        """Explicit codebook from ``symbol -> '0101'`` strings."""
        return cls({s: (int(b, 2), len(b)) for s, b in codes.items()}, canonical=False)

    def __len__(self):
        return len(self.codes)

    def __contains__(self, symbol):
        return symbol in self.codes

    def length(self, symbol) -> int:
        return self.codes[symbol][1]

    def lengths(self) -> dict:
        return {s: n for s, (_, n) in self.codes.items()}

    def bits(self, symbol) -> str:
        return self._bits[symbol]

    def kraft_sum(self):
        from fractions import Fraction

        return sum(Fraction(1, 2 ** n) for _, n in self.codes.values())

    def bit_length(self, symbols) -> int:
        return sum(self.codes[s][1] for s in symbols)

    def encode(self, symbols):
        """Pack the codes of ``symbols``; returns ``(data, bit_count)``."""
        bits = "".join(self._bits[s] for s in symbols)
        return pack_bits(bits), len(bits)

    def decode(self, data: bytes, bit_count: int) -> list:
        if bit_count > len(data) * 8:
            raise CorruptStreamError("bit count exceeds the stored bytes")
        if self.canonical:
            try:
                out = kernels.canonical_decode(data, bit_count, self._counts, self._symbols)
            except ValueError as exc:
                raise CorruptStreamError(str(exc)) from exc
            return out.tolist()
        out = []
        cur = ""
        for ch in unpack_bits(data, bit_count):
            cur += ch
            s = self._lookup.get(cur)
            if s is not None:
                out.append(s)
                cur = ""
        if cur:
            raise CorruptStreamError("bitstream ends inside a code")
        return out


def pack_bits(bits: str) -> bytes:
    if not bits:
        return b""
    nbytes = (len(bits) + 7) // 8
    return int(bits.ljust(nbytes * 8, "0"), 2).to_bytes(nbytes, "big")


def unpack_bits(data: bytes, bit_count: int) -> str:
    if bit_count == 0:
        return ""
    return format(int.from_bytes(data, "big"), f"0{len(data) * 8}b")[:bit_count]
