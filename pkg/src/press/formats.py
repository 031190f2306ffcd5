"""Binary model and compressed-corpus containers, and the query batch format.

All integers are little-endian. A compressed corpus names its model by the
SHA-256 of the model file, and a model names its network by the network
digest, so mismatched inputs are caught before decoding.
"""

from __future__ import annotations

import hashlib
import io
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codec import CompressedTrajectory
from .errors import FormatError, ModelMismatchError
from .huffman import HuffmanCodebook
from .spatial import CompressedSpatial, FstModel, Trie, build_automaton

MODEL_MAGIC = b"PRESSMDL"
CORPUS_MAGIC = b"PRESSCMP"
VERSION = 1


class _Reader:
    def __init__(self, data: bytes, source):
        self.buf = memoryview(data)
        self.pos = 0
        self.source = source

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.buf):
            raise FormatError(f"truncated at byte {self.pos}", None, self.source)
        out = bytes(self.buf[self.pos:self.pos + n])
        self.pos += n
        return out

    def unpack(self, fmt: str):
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size))

    def array(self, dtype, count: int):
        dt = np.dtype(dtype).newbyteorder("<")
        return np.frombuffer(self.take(dt.itemsize * count), dtype=dt).astype(dtype)

    def done(self):
        if self.pos != len(self.buf):
            raise FormatError(f"{len(self.buf) - self.pos} trailing bytes", None, self.source)


def _header(r: _Reader, magic: bytes):
    if r.take(len(magic)) != magic:
        raise FormatError("bad magic header", None, r.source)
    (version,) = r.unpack("<H")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", None, r.source)


def _le(arr, dtype) -> bytes:
    return np.ascontiguousarray(arr, dtype=np.dtype(dtype).newbyteorder("<")).tobytes()


# -- model --------------------------------------------------------------------------


def model_to_bytes(model: FstModel) -> bytes:
    if not model.codebook.canonical:
        raise ValueError("only canonical codebooks can be serialized")
    trie = model.trie
    n = trie.n_nodes
    digest = model.network_digest.ljust(32, b"\0")[:32]
    lengths = np.zeros(n, dtype=np.uint8)
    for node, ln in model.codebook.lengths().items():
        if ln > 255:
            raise ValueError("code length does not fit the model format")
        lengths[node] = ln
    out = io.BytesIO()
    out.write(MODEL_MAGIC)
    out.write(struct.pack("<H", VERSION))
    out.write(digest)
    out.write(struct.pack("<III", trie.theta, trie.n_edges, n))
    out.write(_le(trie.parent, np.int32))
    out.write(_le(trie.label, np.int32))
    out.write(_le(trie.freq, np.int64))
    out.write(_le(model.link, np.int32))
    out.write(lengths.tobytes())
    has_tables = model.trie_dist is not None and model.trie_mbr is not None
    out.write(struct.pack("<B", int(has_tables)))
    if has_tables:
        out.write(_le(model.trie_dist, np.int64))
        out.write(_le(np.asarray(model.trie_mbr).reshape(-1), np.float64))
    return out.getvalue()


def model_from_bytes(data: bytes, source=None) -> FstModel:
    r = _Reader(data, source)
    _header(r, MODEL_MAGIC)
    digest = r.take(32)
    theta, n_edges, n = r.unpack("<III")
    if n < 1 + n_edges:
        raise FormatError("trie is missing depth-1 edge nodes", None, source)
    parent = r.array(np.int32, n)
    label = r.array(np.int32, n)
    freq = r.array(np.int64, n)
    link = r.array(np.int32, n)
    lengths = r.array(np.uint8, n)
    (has_tables,) = r.unpack("<B")
    dist = mbr = None
    if has_tables:
        dist = r.array(np.int64, n)
        mbr = r.array(np.float64, 4 * n).reshape(n, 4)
    r.done()
    try:
        trie = Trie.from_arrays(theta, n_edges, parent, label, freq)
        if build_automaton(trie) != link.tolist():
            raise ValueError("suffix links do not match the trie")
        codebook = HuffmanCodebook.from_lengths({k: int(lengths[k]) for k in range(1, n)})
    except ValueError as exc:
        raise FormatError(str(exc), None, source) from exc
    return FstModel(trie, link.tolist(), codebook, digest, dist, mbr)


def model_hash(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def save_model(model: FstModel, path) -> bytes:
    data = model_to_bytes(model)
    Path(path).write_bytes(data)
    return model_hash(data)


def load_model(path):
    """``(model, sha256 of the file)``."""
    path = Path(path)
    data = path.read_bytes()
    return model_from_bytes(data, path.name), model_hash(data)


# -- compressed corpus ----------------------------------------------------------------


def corpus_to_bytes(records, model_sha: bytes) -> bytes:
    records = list(records)
    out = io.BytesIO()
    out.write(CORPUS_MAGIC)
    out.write(struct.pack("<H", VERSION))
    out.write(model_sha)
    out.write(struct.pack("<I", len(records)))
    for ct in records:
        tid = ct.id.encode("utf-8")
        out.write(struct.pack("<H", len(tid)))
        out.write(tid)
        sp = ct.spatial
        out.write(struct.pack("<I", sp.bit_count))
        out.write(sp.data[: (sp.bit_count + 7) // 8].ljust((sp.bit_count + 7) // 8, b"\0"))
        out.write(struct.pack("<I", len(ct.temporal)))
        out.write(_le(np.asarray(ct.temporal, dtype=np.float64).reshape(-1), np.float64))
    return out.getvalue()


def corpus_from_bytes(data: bytes, model_sha: bytes | None = None, source=None) -> list:
    r = _Reader(data, source)
    _header(r, CORPUS_MAGIC)
    sha = r.take(32)
    if model_sha is not None and sha != model_sha:
        raise ModelMismatchError(f"{source or 'compressed file'} was written with a different model")
    (count,) = r.unpack("<I")
    out = []
    for _ in range(count):
        (n,) = r.unpack("<H")
        try:
            tid = r.take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError("trajectory id is not UTF-8", None, source) from exc
        (bits,) = r.unpack("<I")
        payload = r.take((bits + 7) // 8)
        (m,) = r.unpack("<I")
        vals = r.array(np.float64, 2 * m).reshape(m, 2)
        temporal = tuple((float(d), float(t)) for d, t in vals)
        out.append(CompressedTrajectory(tid, CompressedSpatial(bits, payload), temporal))
    r.done()
    return out


def save_compressed(records, model_sha: bytes, path) -> None:
    Path(path).write_bytes(corpus_to_bytes(records, model_sha))


def load_compressed(path, model_sha: bytes | None = None) -> list:
    path = Path(path)
    return corpus_from_bytes(path.read_bytes(), model_sha, path.name)


# -- query batches ------------------------------------------------------------------


@dataclass(frozen=True)
class Query:
    kind: str
    traj_id: str
    args: tuple
    text: str
    line: int


_ARITY = {"WHEREAT": 1, "WHENAT": 2, "RANGE": 6}


def parse_queries(text: str, source=None) -> list:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].upper()
        if kind not in _ARITY:
            raise FormatError(f"unknown query {parts[0]!r}", lineno, source)
        if len(parts) != 2 + _ARITY[kind]:
            raise FormatError(f"{kind} takes {_ARITY[kind]} numbers after the trajectory id", lineno, source)
        try:
            args = tuple(float(x) for x in parts[2:])
        except ValueError as exc:
            raise FormatError(f"bad number in {line!r}", lineno, source) from exc
        out.append(Query(kind, parts[1], args, line, lineno))
    return out


def load_queries(path) -> list:
    path = Path(path)
    return parse_queries(path.read_text(), path.name)
