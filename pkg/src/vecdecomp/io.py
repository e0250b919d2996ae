"""digraph6 / graph6 codecs, weight-vector files, report records and checkpoints."""
from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
import zlib
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

from .hosts import Host, HostError, colex, tournament_from_matrix
from .patterns import PatternCatalog, WeightVector, pattern_from_literal

DIGRAPH6_HEADER = b">>digraph6<<"
GRAPH6_HEADER = b">>graph6<<"
MAX_SHORT_ORDER = 62


class FormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# bit packing

def _pack(bits: Sequence[int]) -> bytes:
    out = bytearray()
    for start in range(0, len(bits), 6):
        chunk = list(bits[start:start + 6])
        chunk += [0] * (6 - len(chunk))
        val = 0
        for bit in chunk:
            val = (val << 1) | bit
        out.append(val + 63)
    return bytes(out)


def _unpack(data: bytes, nbits: int, what: str) -> list[int]:
    need = (nbits + 5) // 6
    if len(data) != need:
        raise FormatError(f"{what}: expected {need} data bytes, got {len(data)}")
    bits = []
    for byte in data:
        if not 63 <= byte <= 126:
            raise FormatError(f"{what}: byte {byte} outside [63, 126]")
        val = byte - 63
        bits.extend((val >> s) & 1 for s in range(5, -1, -1))
    if any(bits[nbits:]):
        raise FormatError(f"{what}: nonzero padding bits")
    return bits[:nbits]


def _size_byte(n: int) -> bytes:
    if not 0 <= n <= MAX_SHORT_ORDER:
        raise FormatError(f"order {n} needs the long size field; only n <= {MAX_SHORT_ORDER} is supported")
    return bytes([n + 63])


def _read_size(line: bytes, what: str) -> tuple[int, bytes]:
    if not line:
        raise FormatError(f"{what}: missing size byte")
    first = line[0]
    if first == 126:
        raise FormatError(f"{what}: long size field (n > {MAX_SHORT_ORDER}) is not supported")
    if not 63 <= first <= 125:
        raise FormatError(f"{what}: size byte {first} outside [63, 125]")
    return first - 63, line[1:]


def _clean(line) -> bytes:
    if isinstance(line, str):
        line = line.encode("ascii")
    return line.strip()


# ---------------------------------------------------------------------------
# digraph6

@dataclass(frozen=True)
class Digraph6Record:
    n: int
    bits: tuple[int, ...]
    line_number: int | None = None

    def arc(self, i: int, j: int) -> bool:
        return bool(self.bits[i * self.n + j])

    def is_tournament(self) -> bool:
        n = self.n
        return all(self.arc(i, j) != self.arc(j, i) for i in range(n) for j in range(i + 1, n))

    def to_host(self, name: str = "") -> Host:
        if not self.is_tournament():
            raise FormatError(f"record{self._where()} is not a tournament")
        adj = [[self.arc(i, j) for j in range(self.n)] for i in range(self.n)]
        return tournament_from_matrix(adj, name or f"digraph6{self._where()}")

    def _where(self) -> str:
        return f":{self.line_number}" if self.line_number is not None else ""


def decode_digraph6(line, line_number: int | None = None) -> Digraph6Record:
    """Decode one ``&``-prefixed digraph6 line (short size field only)."""
    raw = _clean(line)
    if raw.startswith(DIGRAPH6_HEADER):
        raw = raw[len(DIGRAPH6_HEADER):]
    where = f"digraph6 line {line_number}" if line_number is not None else "digraph6"
    if not raw.startswith(b"&"):
        raise FormatError(f"{where}: missing '&' prefix")
    n, data = _read_size(raw[1:], where)
    bits = _unpack(data, n * n, where)
    for i in range(n):
        if bits[i * n + i]:
            raise FormatError(f"{where}: loop at vertex {i}")
    return Digraph6Record(n, tuple(bits), line_number)


def encode_digraph6(host: Host) -> bytes:
    """'&', size byte, row-major adjacency bits packed six per byte."""
    if not host.kind.antisymmetric:
        raise FormatError("digraph6 encoding is implemented for tournaments / oriented hosts")
    n = host.n
    size = _size_byte(n)
    adj = host.adjacency()
    bits = [1 if adj[i][j] else 0 for i in range(n) for j in range(n)]
    return b"&" + size + _pack(bits)


# ---------------------------------------------------------------------------
# graph6

def decode_graph6(line) -> tuple[int, list[tuple[int, int]]]:
    """Return (n, edges) of a graph6 line; bits are the upper triangle in column order."""
    raw = _clean(line)
    if raw.startswith(GRAPH6_HEADER):
        raw = raw[len(GRAPH6_HEADER):]
    if raw.startswith(b"&") or raw.startswith(b":"):
        raise FormatError("not a graph6 line (digraph6 / sparse6 prefix)")
    n, data = _read_size(raw, "graph6")
    bits = _unpack(data, comb(n, 2), "graph6")
    edges = []
    t = 0
    for j in range(1, n):
        for i in range(j):
            if bits[t]:
                edges.append((i, j))
            t += 1
    return n, edges


def encode_graph6(n: int, edges: Iterable[tuple[int, int]]) -> bytes:
    es = {(min(u, v), max(u, v)) for u, v in edges}
    bits = [1 if (i, j) in es else 0 for j in range(1, n) for i in range(j)]
    return _size_byte(n) + _pack(bits)


def host_to_graph6(host: Host) -> bytes:
    if host.kind.antisymmetric:
        raise FormatError("graph6 encodes undirected hosts")
    edge = host.kind.edge_label
    edges = [(i, j) for j in range(host.n) for i in range(j) if host.pairs[colex(i, j)] == edge]
    return encode_graph6(host.n, edges)


# ---------------------------------------------------------------------------
# catalog files

@dataclass
class BaseCatalog:
    hosts: list[Host]
    complete: bool
    order: int
    digest: str
    path: str = ""


def read_digraph6_file(path) -> list[Digraph6Record]:
    out = []
    with open(path, "rb") as fh:
        for lineno, line in enumerate(fh, 1):
            raw = line.strip()
            if not raw or raw == DIGRAPH6_HEADER:
                continue
            out.append(decode_digraph6(raw, lineno))
    return out


def read_base_catalog(path, expected_order: int, expected_count: int | None = None) -> BaseCatalog:
    """Load a digraph6 tournament list; ``complete`` only when ``expected_count`` is asserted and met."""
    h = hashlib.sha256()
    hosts = []
    with open(path, "rb") as fh:
        for lineno, line in enumerate(fh, 1):
            raw = line.strip()
            if not raw or raw == DIGRAPH6_HEADER:
                continue
            h.update(raw + b"\n")
            rec = decode_digraph6(raw, lineno)
            if rec.n != expected_order:
                raise FormatError(f"{path}:{lineno}: order {rec.n}, expected {expected_order}")
            hosts.append(rec.to_host(f"{Path(path).name}:{lineno}"))
    complete = expected_count is not None and len(hosts) == expected_count
    return BaseCatalog(hosts, complete, expected_order, h.hexdigest(), str(path))


def write_digraph6_file(path, hosts: Iterable[Host], header: bool = False):
    with open(path, "wb") as fh:
        if header:
            fh.write(DIGRAPH6_HEADER)
        for t in hosts:
            fh.write(encode_digraph6(t) + b"\n")


def catalog_digest(hosts: Iterable[Host]) -> str:
    h = hashlib.sha256()
    for t in hosts:
        h.update(encode_digraph6(t) + b"\n")
    return h.hexdigest()


# ---------------------------------------------------------------------------
# rationals and weight vectors

def parse_rational(text) -> Fraction:
    """``p/q``, integers and decimals, converted exactly."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"not a rational number: {text!r}") from None


def fmt_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_vector(text: str, catalog: PatternCatalog) -> WeightVector:
    """Weight vector from ``pattern=rational`` entries separated by newlines or commas."""
    weights = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0]
        for item in line.split(","):
            item = item.strip()
            if not item:
                continue
            key, sep, val = item.partition("=")
            if not sep:
                raise FormatError(f"line {lineno}: expected pattern=value, got {item!r}")
            try:
                p = pattern_from_literal(key, catalog.kind, catalog.order)
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}") from None
            if p.id in weights:
                raise FormatError(f"line {lineno}: duplicate entry for {p.name}")
            weights[p.id] = parse_rational(val)
    try:
        return WeightVector(catalog, weights)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def format_vector(v: WeightVector) -> str:
    return "".join(f"{p.name}={fmt_rational(v[p])}\n" for p in v.catalog)


# ---------------------------------------------------------------------------
# reports

def write_jsonl(path, records: Iterable[dict], mode: str = "w"):
    with open(path, mode) as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_jsonl(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def certificate_hash(sol) -> str:
    if sol is None or sol.x is None:
        return ""
    h = hashlib.sha256()
    for part in (sol.x, sol.y):
        h.update(",".join(fmt_rational(t) for t in part).encode())
        h.update(b"|")
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# checkpoints

CHECKPOINT_MAGIC = b"VDCKPT"
CHECKPOINT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path, state: dict):
    """Versioned, digest-protected checkpoint, written atomically via rename."""
    payload = zlib.compress(json.dumps(state, sort_keys=True).encode())
    digest = hashlib.sha256(payload).digest()
    blob = CHECKPOINT_MAGIC + bytes([CHECKPOINT_VERSION]) + digest + payload
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path) -> dict:
    blob = Path(path).read_bytes()
    if not blob.startswith(CHECKPOINT_MAGIC):
        raise CheckpointError(f"{path}: not a checkpoint file")
    version = blob[len(CHECKPOINT_MAGIC)]
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: checkpoint version {version}, expected {CHECKPOINT_VERSION}")
    start = len(CHECKPOINT_MAGIC) + 1
    digest, payload = blob[start:start + 32], blob[start + 32:]
    if hashlib.sha256(payload).digest() != digest:
        raise CheckpointError(f"{path}: checkpoint digest mismatch (corrupted file)")
    return json.loads(zlib.decompress(payload))


def hosts_to_strings(hosts: Iterable[Host]) -> list[str]:
    return [encode_digraph6(t).decode("ascii") for t in hosts]


def hosts_from_strings(lines: Iterable[str], prefix: str = "") -> list[Host]:
    out = []
    for i, s in enumerate(lines):
        try:
            out.append(decode_digraph6(s).to_host(f"{prefix}{i}" if prefix else ""))
        except HostError as exc:
            raise FormatError(str(exc)) from None
    return out
