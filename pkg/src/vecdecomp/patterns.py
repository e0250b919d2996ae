"""Canonical k-vertex patterns and the weight vectors indexed by them.

A pattern is an isomorphism class of a complete graph on ``k`` vertices whose
pairs carry labels of one :class:`LabelKind`: graphs (edge / non-edge),
tournaments (orientation) or edge colourings over a fixed palette.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

MAX_PATTERN_ORDER = 7
DEFAULT_CATALOG_CAP = 4096


class PatternError(ValueError):
    pass


class CatalogLimitError(RuntimeError):
    """Raised when building a catalog would exceed the configured size cap."""


@dataclass(frozen=True)
class LabelKind:
    """How the pairs of a complete graph are labelled.

    Labels are small integers indexing ``labels``.  For the antisymmetric kind
    the label of an ordered pair ``(i, j)`` with ``i < j`` is 0 when ``i -> j``
    and 1 when ``j -> i``; reading the pair the other way flips it.
    """

    name: str
    labels: tuple[str, ...]

    def __post_init__(self):
        if self.name not in ("undirected", "antisymmetric", "colored"):
            raise PatternError(f"unknown label kind {self.name!r}")
        if not self.labels:
            raise PatternError("palette must be non-empty")
        if len(set(self.labels)) != len(self.labels):
            raise PatternError("palette has repeated colors")
        if self.name != "colored" and len(self.labels) != 2:
            raise PatternError(f"{self.name} kind has exactly two labels")

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def antisymmetric(self) -> bool:
        return self.name == "antisymmetric"

    def index(self, label) -> int:
        if isinstance(label, int) and not isinstance(label, bool):
            if 0 <= label < self.size:
                return label
            raise PatternError(f"label {label} out of range for {self}")
        try:
            return self.labels.index(label)
        except ValueError:
            raise PatternError(f"unknown label {label!r} for {self}") from None

    @property
    def edge_label(self) -> int:
        """Index of the label counted as an edge by e(H)."""
        if self.name == "undirected":
            return 1
        if self.name == "colored" and "blue" in self.labels:
            return self.labels.index("blue")
        raise PatternError(f"{self} has no edge/blue label")

    def __str__(self):
        if self.name == "colored":
            return f"colored({','.join(self.labels)})"
        return self.name


UNDIRECTED = LabelKind("undirected", ("non-edge", "edge"))
ANTISYMMETRIC = LabelKind("antisymmetric", ("forward", "backward"))
BICOLORED = LabelKind("colored", ("blue", "red"))


def colored(*palette: str) -> LabelKind:
    return LabelKind("colored", tuple(palette))


def parse_kind(text: str) -> LabelKind:
    """Parse ``undirected``, ``antisymmetric``/``tournament`` or ``colored:a,b,...``."""
    text = text.strip()
    if text in ("undirected", "graph"):
        return UNDIRECTED
    if text in ("antisymmetric", "tournament"):
        return ANTISYMMETRIC
    if text.startswith("colored"):
        _, _, rest = text.partition(":")
        rest = rest.strip().strip("()")
        palette = tuple(c.strip() for c in rest.split(",") if c.strip()) if rest else ("blue", "red")
        return colored(*palette)
    raise PatternError(f"unknown label kind {text!r}")


def pair_index(i: int, j: int, k: int) -> int:
    """Row-major index of pair (i, j), i < j, in the upper triangle of a k-vertex table."""
    return i * (2 * k - i - 1) // 2 + (j - i - 1)


def _permuted(labels: Sequence[int], perm: Sequence[int], k: int, anti: bool) -> tuple:
    # new vertex a is old vertex perm[a]
    out = []
    for a in range(k):
        pa = perm[a]
        for b in range(a + 1, k):
            pb = perm[b]
            if pa < pb:
                out.append(labels[pair_index(pa, pb, k)])
            else:
                lab = labels[pair_index(pb, pa, k)]
                out.append(1 - lab if anti else lab)
    return tuple(out)


@dataclass(frozen=True)
class Pattern:
    """A canonical k-vertex pair-labelled complete graph."""

    order: int
    kind: LabelKind
    labels: tuple[int, ...] = field(compare=False)
    id: bytes

    def label_at(self, i: int, j: int) -> int:
        if i == j:
            raise PatternError("no label on the diagonal")
        if i < j:
            return self.labels[pair_index(i, j, self.order)]
        lab = self.labels[pair_index(j, i, self.order)]
        return 1 - lab if self.kind.antisymmetric else lab

    def permuted(self, perm: Sequence[int]) -> tuple[int, ...]:
        """Raw labels of this pattern relabelled so new vertex a is old vertex perm[a]."""
        return _permuted(self.labels, perm, self.order, self.kind.antisymmetric)

    def literal(self) -> str:
        return "".join(str(x) for x in self.labels)

    @property
    def name(self) -> str:
        for alias, (k, kinds, _) in _ALIASES.items():
            if k == self.order and alias_pattern(alias, self.kind, strict=False) == self:
                return alias
        return self.literal()

    def __repr__(self):
        return f"Pattern({self.name}, k={self.order}, {self.kind})"


def _check_order(k: int):
    if k < 3:
        raise PatternError("patterns need k >= 3")
    if k > MAX_PATTERN_ORDER:
        raise PatternError(f"patterns on more than {MAX_PATTERN_ORDER} vertices are not supported")


def _validate(k: int, kind: LabelKind, labels: Sequence) -> tuple[int, ...]:
    _check_order(k)
    need = k * (k - 1) // 2
    if len(labels) != need:
        raise PatternError(f"expected {need} pair labels for k={k}, got {len(labels)}")
    return tuple(kind.index(x) for x in labels)


def _canonical_labels(k: int, kind: LabelKind, raw: tuple[int, ...]) -> tuple[int, ...]:
    anti = kind.antisymmetric
    return min(_permuted(raw, p, k, anti) for p in itertools.permutations(range(k)))


def canonical_pattern(k: int, kind: LabelKind, labels: Sequence) -> Pattern:
    """Canonical representative of the labelled k-vertex graph ``labels``.

    ``labels`` lists the pair labels in row-major upper-triangle order
    (0,1), (0,2), ..., (k-2,k-1); entries may be label names or indices.
    """
    raw = _validate(k, kind, labels)
    best = _canonical_labels(k, kind, raw)
    return Pattern(k, kind, best, bytes(best))


def label_count(p: Pattern, label) -> int:
    """Number of pairs of ``p`` carrying ``label``.

    For the antisymmetric kind the count is over pairs read as (i, j) with i < j
    in the canonical vertex order.
    """
    idx = p.kind.index(label)
    return sum(1 for x in p.labels if x == idx)


def edge_count(p: Pattern) -> int:
    """e(H): the number of edge (or blue) pairs."""
    return label_count(p, p.kind.edge_label)


@dataclass(frozen=True)
class PatternCatalog:
    order: int
    kind: LabelKind
    patterns: tuple[Pattern, ...]

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def __contains__(self, p) -> bool:
        return isinstance(p, Pattern) and p.id in self._ids

    @property
    def _ids(self) -> dict[bytes, int]:
        cache = self.__dict__.get("_id_cache")
        if cache is None:
            cache = {p.id: i for i, p in enumerate(self.patterns)}
            object.__setattr__(self, "_id_cache", cache)
        return cache

    def position(self, p: Pattern) -> int:
        return self._ids[p.id]

    def lookup(self) -> dict[tuple[int, ...], Pattern]:
        """Map every raw labelling of k vertices to its catalog member."""
        table = self.__dict__.get("_lookup")
        if table is None:
            table = {}
            anti = self.kind.antisymmetric
            k = self.order
            for p in self.patterns:
                for perm in itertools.permutations(range(k)):
                    table[_permuted(p.labels, perm, k, anti)] = p
            object.__setattr__(self, "_lookup", table)
        return table

    def classify(self, raw: Sequence[int]) -> Pattern:
        return self.lookup()[tuple(raw)]

    def alias(self, name: str) -> Pattern:
        return alias_pattern(name, self.kind, order=self.order)

    def automorphisms(self, p: Pattern) -> int:
        k = self.order
        return sum(1 for perm in itertools.permutations(range(k)) if p.permuted(perm) == p.labels)


def build_catalog(k: int, kind: LabelKind, cap: int = DEFAULT_CATALOG_CAP) -> PatternCatalog:
    """All isomorphism classes of k-vertex complete graphs labelled by ``kind``.

    The catalog is built by scanning every labelled graph, so ``cap`` bounds
    ``|labels| ** C(k, 2)``; the default admits binary kinds up to k = 5.
    """
    _check_order(k)
    npairs = k * (k - 1) // 2
    labelled = kind.size ** npairs
    if labelled > cap:
        raise CatalogLimitError(
            f"catalog for k={k}, {kind} scans {labelled} labelled graphs, cap is {cap}")
    anti = kind.antisymmetric
    seen: dict[tuple, Pattern] = {}
    classes: dict[bytes, Pattern] = {}
    for raw in itertools.product(range(kind.size), repeat=npairs):
        if raw in seen:
            continue
        p = canonical_pattern(k, kind, raw)
        classes[p.id] = p
        for perm in itertools.permutations(range(k)):
            seen[_permuted(p.labels, perm, k, anti)] = p
    patterns = sorted(classes.values(), key=lambda p: p.id)
    cat = PatternCatalog(k, kind, tuple(patterns))
    object.__setattr__(cat, "_lookup", seen)
    return cat


# alias -> (order, allowed kinds, labels given as "edge"-count rule or explicit labels)
_ALIASES = {
    "K3": (3, ("undirected", "colored"), "edges:3"),
    "P3": (3, ("undirected", "colored"), "edges:2"),
    "Q3": (3, ("undirected", "colored"), "edges:1"),
    "I3": (3, ("undirected", "colored"), "edges:0"),
    "T3": (3, ("antisymmetric",), (0, 0, 0)),
    "C3": (3, ("antisymmetric",), (0, 1, 0)),
}


def alias_pattern(name: str, kind: LabelKind, order: int | None = None, strict: bool = True):
    """Resolve a named pattern; also accepts Kk / Ik for complete / empty k-graphs."""
    k = None
    raw = None
    if name in _ALIASES:
        k, kinds, rule = _ALIASES[name]
        if kind.name not in kinds or (kind.name == "colored" and "blue" not in kind.labels):
            if strict:
                raise PatternError(f"alias {name} does not apply to kind {kind}")
            return None
        if isinstance(rule, tuple):
            raw = rule
        else:
            edges = int(rule.split(":")[1])
            raw = _graph_labels(k, kind, edges)
    elif len(name) >= 2 and name[0] in "KI" and name[1:].isdigit():
        k = int(name[1:])
        if kind.name == "antisymmetric" or (kind.name == "colored" and "blue" not in kind.labels):
            if strict:
                raise PatternError(f"alias {name} does not apply to kind {kind}")
            return None
        npairs = k * (k - 1) // 2
        raw = _graph_labels(k, kind, npairs if name[0] == "K" else 0)
    else:
        if strict:
            raise PatternError(f"unknown pattern alias {name!r}")
        return None
    if order is not None and order != k:
        if strict:
            raise PatternError(f"alias {name} has order {k}, expected {order}")
        return None
    return canonical_pattern(k, kind, raw)


def _graph_labels(k: int, kind: LabelKind, edges: int) -> tuple[int, ...]:
    npairs = k * (k - 1) // 2
    edge = kind.edge_label
    other = 1 - edge if kind.size == 2 else (0 if edge != 0 else 1)
    # for k = 3 the edges of a path/complement are determined up to isomorphism by their count
    return tuple(edge if i < edges else other for i in range(npairs))


def pattern_from_literal(text: str, kind: LabelKind, order: int | None = None) -> Pattern:
    """Parse a named alias or an explicit row-major label string such as ``"010"``."""
    text = text.strip()
    p = alias_pattern(text, kind, order=order, strict=False)
    if p is not None:
        return p
    if text.isdigit():
        npairs = len(text)
        k = (1 + math.isqrt(1 + 8 * npairs)) // 2
        if k * (k - 1) // 2 != npairs:
            raise PatternError(f"label string {text!r} is not an upper triangle")
        if order is not None and k != order:
            raise PatternError(f"label string {text!r} has order {k}, expected {order}")
        return canonical_pattern(k, kind, [int(c) for c in text])
    raise PatternError(f"cannot parse pattern {text!r} for kind {kind}")


class WeightVector(Mapping):
    """Rational weight per member of one catalog (the vector **v**)."""

    def __init__(self, catalog: PatternCatalog, weights: Mapping):
        self.catalog = catalog
        by_id: dict[bytes, Fraction] = {}
        for key, value in weights.items():
            p = self._resolve(key)
            if p.id in by_id:
                raise PatternError(f"duplicate weight for pattern {p.name}")
            by_id[p.id] = Fraction(value)
        missing = [p.name for p in catalog if p.id not in by_id]
        if missing:
            raise PatternError(f"weight vector is missing patterns: {', '.join(missing)}")
        self._w = {p.id: by_id[p.id] for p in catalog}

    def _resolve(self, key) -> Pattern:
        if isinstance(key, Pattern):
            p = key
        elif isinstance(key, bytes):
            p = next((q for q in self.catalog if q.id == key), None)
            if p is None:
                raise PatternError(f"unknown pattern id {key!r}")
        else:
            p = pattern_from_literal(str(key), self.catalog.kind, self.catalog.order)
        if p not in self.catalog:
            raise PatternError(f"pattern {p.name} is not in the catalog")
        return p

    @classmethod
    def from_sequence(cls, catalog: PatternCatalog, values: Sequence) -> "WeightVector":
        if len(values) != len(catalog):
            raise PatternError(f"expected {len(catalog)} weights, got {len(values)}")
        return cls(catalog, dict(zip(catalog.patterns, values)))

    @classmethod
    def constant(cls, catalog: PatternCatalog, value) -> "WeightVector":
        return cls(catalog, {p: value for p in catalog})

    def __getitem__(self, key) -> Fraction:
        return self._w[self._resolve(key).id]

    def __iter__(self):
        return iter(self.catalog.patterns)

    def __len__(self):
        return len(self._w)

    def values_list(self) -> list[Fraction]:
        return [self._w[p.id] for p in self.catalog]

    def by_id(self, pid: bytes) -> Fraction:
        return self._w[pid]

    def __eq__(self, other):
        if not isinstance(other, WeightVector):
            return NotImplemented
        return self.catalog.kind == other.catalog.kind and self._w == other._w

    def __hash__(self):
        return hash(tuple(sorted(self._w.items())))

    def digest(self) -> str:
        import hashlib
        h = hashlib.sha256(str(self.catalog.kind).encode())
        for pid, w in sorted(self._w.items()):
            h.update(pid + b"=" + f"{w.numerator}/{w.denominator};".encode())
        return h.hexdigest()[:16]

    def __repr__(self):
        body = ", ".join(f"{p.name}={self._w[p.id]}" for p in self.catalog)
        return f"WeightVector({body})"


@dataclass(frozen=True)
class Normalization:
    """Affine record with v = scale * v' + shift; ``scale`` is None for constant v."""

    scale: Fraction | None
    shift: Fraction

    @property
    def constant(self) -> bool:
        return self.scale is None


def normalize_vector(v: WeightVector) -> tuple[WeightVector, Normalization]:
    """Dilate and translate ``v`` so its coordinates span exactly [0, 1].

    A constant vector is returned unchanged with ``scale=None`` and
    ``shift`` equal to the constant.
    """
    vals = v.values_list()
    lo, hi = min(vals), max(vals)
    if lo == hi:
        return v, Normalization(None, lo)
    c = hi - lo
    out = WeightVector.from_sequence(v.catalog, [(x - lo) / c for x in vals])
    return out, Normalization(c, lo)


def random_raw_labels(k: int, kind: LabelKind, rng) -> tuple[int, ...]:
    npairs = k * (k - 1) // 2
    return tuple(int(x) for x in rng.integers(0, kind.size, size=npairs))


def iter_labelled(k: int, kind: LabelKind) -> Iterable[tuple[int, ...]]:
    return itertools.product(range(kind.size), repeat=k * (k - 1) // 2)
