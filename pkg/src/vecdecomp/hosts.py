"""Host objects: tournaments, bicoloured graphs and coloured complete graphs.

Pair labels are stored in colex order: pair (i, j) with i < j lives at index
``j * (j - 1) // 2 + i``.  Adding a vertex therefore appends its pairs, and the
first ``C(m, 2)`` entries always describe the subhost on vertices ``0..m-1``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .patterns import ANTISYMMETRIC, BICOLORED, LabelKind, UNDIRECTED

ABSENT = None
MAX_ENUM_ORDER = 8
DEFAULT_CANON_CAP = 12


class HostError(ValueError):
    pass


def colex(i: int, j: int) -> int:
    if i > j:
        i, j = j, i
    return j * (j - 1) // 2 + i


@dataclass(frozen=True)
class Host:
    """An n-vertex pair-labelled graph; ``pairs`` holds a label index or None per pair."""

    n: int
    kind: LabelKind
    pairs: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise HostError("negative order")
        if len(self.pairs) != comb(self.n, 2):
            raise HostError(f"pair table of length {len(self.pairs)} for n={self.n}")
        size = self.kind.size
        for lab in self.pairs:
            if lab is not None and not (0 <= lab < size):
                raise HostError(f"label {lab} invalid for kind {self.kind}")

    def label(self, i: int, j: int):
        """Label of the pair read from i to j (orientation flips for tournaments)."""
        if i == j:
            raise HostError("no label on the diagonal")
        lab = self.pairs[colex(i, j)]
        if lab is not None and i > j and self.kind.antisymmetric:
            return 1 - lab
        return lab

    def beats(self, i: int, j: int) -> bool:
        if not self.kind.antisymmetric:
            raise HostError("orientation is only defined for tournaments")
        return self.label(i, j) == 0

    @property
    def is_complete(self) -> bool:
        return None not in self.pairs

    @property
    def is_tournament(self) -> bool:
        return self.kind.antisymmetric and self.is_complete

    def present_pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for j in range(self.n) for i in range(j) if self.pairs[colex(i, j)] is not None]

    @property
    def num_present(self) -> int:
        return sum(1 for x in self.pairs if x is not None)

    def count_label(self, label) -> int:
        idx = self.kind.index(label)
        return sum(1 for x in self.pairs if x == idx)

    def adjacency(self) -> list[list[bool]]:
        """Boolean matrix; for tournaments a[i][j] is True iff i -> j, otherwise iff the pair is an edge."""
        n = self.n
        a = [[False] * n for _ in range(n)]
        for j in range(n):
            for i in range(j):
                lab = self.pairs[colex(i, j)]
                if lab is None:
                    continue
                if self.kind.antisymmetric:
                    if lab == 0:
                        a[i][j] = True
                    else:
                        a[j][i] = True
                elif lab == self.kind.edge_label:
                    a[i][j] = a[j][i] = True
        return a

    def subset_labels(self, subset: Sequence[int]) -> tuple:
        """Row-major upper-triangle labels of the induced sub-host on sorted ``subset``."""
        out = []
        for a in range(len(subset)):
            for b in range(a + 1, len(subset)):
                out.append(self.label(subset[a], subset[b]))
        return tuple(out)

    def out_degrees(self) -> list[int]:
        return [sum(1 for j in range(self.n) if j != i and self.label(i, j) == 0) for i in range(self.n)]

    def relabel(self, perm: Sequence[int], name: str | None = None) -> "Host":
        """Host whose vertex a is vertex perm[a] of this host."""
        n = self.n
        if sorted(perm) != list(range(n)):
            raise HostError("not a permutation")
        pairs = tuple(self.label(perm[i], perm[j]) for j in range(n) for i in range(j))
        return Host(n, self.kind, pairs, self.name if name is None else name)

    def with_name(self, name: str) -> "Host":
        return Host(self.n, self.kind, self.pairs, name)

    def __repr__(self):
        return f"Host(n={self.n}, kind={self.kind}, name={self.name!r})"


def tournament_from_pairs(n: int, arcs: Iterable[tuple[int, int]], name: str = "") -> Host:
    """Build a tournament from arcs ``(u, v)`` meaning u -> v; every pair must appear once."""
    table: list = [None] * comb(n, 2)
    for u, v in arcs:
        if u == v or not (0 <= u < n and 0 <= v < n):
            raise HostError(f"invalid arc {u}->{v} for n={n}")
        idx = colex(u, v)
        if table[idx] is not None:
            raise HostError(f"pair {{{u},{v}}} oriented twice")
        table[idx] = 0 if u < v else 1
    if None in table:
        missing = next((i, j) for j in range(n) for i in range(j) if table[colex(i, j)] is None)
        raise HostError(f"pair {missing} is not oriented")
    return Host(n, ANTISYMMETRIC, tuple(table), name or f"tournament(n={n})")


def tournament_from_matrix(adj: Sequence[Sequence], name: str = "") -> Host:
    n = len(adj)
    arcs = []
    for i in range(n):
        if adj[i][i]:
            raise HostError("loop in tournament")
        for j in range(i + 1, n):
            a, b = bool(adj[i][j]), bool(adj[j][i])
            if a == b:
                raise HostError(f"pair {{{i},{j}}} must be oriented exactly once")
            arcs.append((i, j) if a else (j, i))
    return tournament_from_pairs(n, arcs, name)


def transitive_tournament(n: int) -> Host:
    return Host(n, ANTISYMMETRIC, (0,) * comb(n, 2), f"transitive({n})")


def extend(t: Host, mask: int) -> Host:
    """Add vertex r = t.n; bit i of ``mask`` set means the new vertex beats vertex i."""
    if not t.is_tournament:
        raise HostError("extend needs a tournament")
    r = t.n
    if not (0 <= mask < (1 << r)):
        raise HostError(f"mask {mask} out of range for order {r}")
    # pair (i, r): label 0 is i -> r, label 1 is r -> i
    new = tuple((mask >> i) & 1 for i in range(r))
    return Host(r + 1, t.kind, t.pairs + new, f"{t.name}+{mask}" if t.name else f"ext({mask})")


def delete_vertex(h: Host, v: int) -> Host:
    """Induced subhost on all vertices but ``v``; the rest keep their relative order."""
    if h.n < 2:
        raise HostError("cannot delete from a host with fewer than 2 vertices")
    if not (0 <= v < h.n):
        raise HostError(f"vertex {v} out of range")
    keep = [u for u in range(h.n) if u != v]
    pairs = tuple(h.pairs[colex(keep[i], keep[j])] for j in range(len(keep)) for i in range(j))
    return Host(h.n - 1, h.kind, pairs, f"{h.name}-{v}")


@dataclass(frozen=True)
class BlowupSpec:
    parts: tuple[int, ...]
    inner: str = "transitive"
    seed: int | None = None

    def __post_init__(self):
        if not self.parts:
            raise HostError("blow-up needs at least one part")
        if any(a < 1 for a in self.parts):
            raise HostError("blow-up parts must be positive")
        if self.inner not in ("transitive", "random"):
            raise HostError(f"unknown inner orientation rule {self.inner!r}")
        if self.inner == "random" and self.seed is None:
            raise HostError("random inner orientation needs a seed")

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def intra_pairs(self) -> int:
        return sum(comb(a, 2) for a in self.parts)


def blowup_cyclic(spec: BlowupSpec | Sequence[int]) -> Host:
    """Parts arranged on a cycle with every edge directed from part i to part i+1."""
    if not isinstance(spec, BlowupSpec):
        spec = BlowupSpec(tuple(spec))
    part = []
    for idx, a in enumerate(spec.parts):
        part.extend([idx] * a)
    m = len(spec.parts)
    n = spec.n
    rng = np.random.default_rng(spec.seed) if spec.inner == "random" else None
    table = []
    for j in range(n):
        for i in range(j):
            pi, pj = part[i], part[j]
            if pi == pj:
                lab = 0 if rng is None else int(rng.integers(0, 2))
            elif (pi + 1) % m == pj:
                lab = 0
            elif (pj + 1) % m == pi:
                lab = 1
            else:
                # non-consecutive parts (m >= 4): orient from lower to higher part index
                lab = 0 if pi < pj else 1
            table.append(lab)
    sizes = ",".join(map(str, spec.parts))
    extra = f",seed={spec.seed}" if spec.inner == "random" else ""
    return Host(n, ANTISYMMETRIC, tuple(table), f"blowup([{sizes}],{spec.inner}{extra})")


def graph_to_bicolored(n: int, edges: Iterable[tuple[int, int]], name: str = "") -> Host:
    """Colour the edges of a simple graph blue and its non-edges red."""
    blue, red = BICOLORED.index("blue"), BICOLORED.index("red")
    table = [red] * comb(n, 2)
    seen = set()
    for u, v in edges:
        if u == v:
            raise HostError(f"loop at {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise HostError(f"edge ({u},{v}) out of range")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise HostError(f"multi-edge {key}")
        seen.add(key)
        table[colex(u, v)] = blue
    return Host(n, BICOLORED, tuple(table), name or f"bicolored(n={n},e={len(seen)})")


def complete_bipartite_bicolored(a: int, b: int) -> Host:
    edges = [(i, a + j) for i in range(a) for j in range(b)]
    return graph_to_bicolored(a + b, edges, f"K{{{a},{b}}}")


def graph_host(n: int, edges: Iterable[tuple[int, int]], name: str = "") -> Host:
    """Complete undirected-kind host with edge/non-edge labels."""
    h = graph_to_bicolored(n, edges, name)
    blue = BICOLORED.index("blue")
    return Host(n, UNDIRECTED, tuple(1 if x == blue else 0 for x in h.pairs), h.name)


def edge_host(n: int, edges: Iterable[tuple[int, int]], name: str = "") -> Host:
    """Undirected host whose present pairs are the edges; non-edges are absent."""
    h = graph_host(n, edges, name)
    edge = UNDIRECTED.edge_label
    return Host(n, UNDIRECTED, tuple(x if x == edge else None for x in h.pairs), h.name)


def random_host(kind: LabelKind, n: int, p=Fraction(1, 2), seed: int = 0) -> Host:
    """Seeded random complete host.

    Uses numpy's PCG64 stream seeded with ``seed``.  For two-label kinds each
    pair independently gets label "edge"/"blue" (or, for tournaments, the
    orientation lower -> higher) with probability ``p``; wider palettes are
    uniform.  Pairs are drawn in colex order.
    """
    p = Fraction(p)
    if not (0 <= p <= 1):
        raise HostError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    m = comb(n, 2)
    if kind.size == 2:
        if kind.antisymmetric:
            hit = 0
        else:
            hit = kind.edge_label
        u = rng.random(m)
        # exact endpoints; interior p compared as a double
        if p == 0:
            flags = np.zeros(m, dtype=bool)
        elif p == 1:
            flags = np.ones(m, dtype=bool)
        else:
            flags = u < float(p)
        table = tuple(hit if f else 1 - hit for f in flags)
    else:
        table = tuple(int(x) for x in rng.integers(0, kind.size, size=m))
    return Host(n, kind, table, f"random({kind},n={n},p={p},seed={seed})")


# ---------------------------------------------------------------------------
# canonical forms

def _refine(h: Host) -> list[int]:
    n = h.n
    nl = h.kind.size
    labels = [[h.label(i, j) if i != j else -2 for j in range(n)] for i in range(n)]
    sig = []
    for i in range(n):
        counts = [0] * (nl + 1)
        for j in range(n):
            if j != i:
                lab = labels[i][j]
                counts[nl if lab is None else lab] += 1
        sig.append(tuple(counts))
    colors = _rank(sig)
    while True:
        sig = []
        for i in range(n):
            nb = sorted((-1 if labels[i][j] is None else labels[i][j], colors[j])
                        for j in range(n) if j != i)
            sig.append((colors[i], tuple(nb)))
        new = _rank(sig)
        if len(set(new)) == len(set(colors)):
            return new
        colors = new


def _rank(sig: list) -> list[int]:
    order = {s: r for r, s in enumerate(sorted(set(sig)))}
    return [order[s] for s in sig]


def canonical_form(h: Host, cap: int = DEFAULT_CANON_CAP) -> bytes:
    """Isomorphism-invariant byte string: equal iff the hosts are isomorphic.

    Lexicographic minimum of the colex pair table over vertex orders that list
    the refined degree classes in a fixed order, found by a level-wise search
    that keeps only orders whose partial table equals the best prefix.
    """
    n = h.n
    if n > cap:
        raise HostError(f"canonical form limited to n <= {cap}")
    colors = _refine(h)
    slots = sorted(range(n), key=lambda v: colors[v])
    slot_color = [colors[v] for v in slots]
    enc = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                lab = h.label(i, j)
                enc[i][j] = 255 if lab is None else lab
    partials = [()]
    table: list[int] = []
    for depth in range(n):
        want = slot_color[depth]
        best_chunk = None
        nxt = []
        for order in partials:
            used = set(order)
            for v in range(n):
                if v in used or colors[v] != want:
                    continue
                chunk = tuple(enc[u][v] for u in order)
                if best_chunk is None or chunk < best_chunk:
                    best_chunk = chunk
                    nxt = [order + (v,)]
                elif chunk == best_chunk:
                    nxt.append(order + (v,))
        partials = nxt
        table.extend(best_chunk)
    header = bytes([n, len(h.kind.labels), 1 if h.kind.antisymmetric else 0])
    return header + bytes(slot_color) + bytes(table)


def canonical_host(h: Host) -> Host:
    """A labelled representative in canonical vertex order."""
    form = canonical_form(h)
    n = h.n
    table = form[3 + n:]
    pairs = tuple(None if x == 255 else x for x in table)
    return Host(n, h.kind, pairs, h.name)


def _order_one() -> Host:
    return Host(1, ANTISYMMETRIC, (), "T1")


def enumerate_nonisomorphic_tournaments(n: int, cap: int = MAX_ENUM_ORDER) -> list[Host]:
    """One tournament per isomorphism class, sorted by canonical form.

    Built order by order: every class representative is extended in all
    ``2^r`` ways and the results deduplicated by canonical form.
    """
    if n < 1:
        raise HostError("order must be at least 1")
    if n > cap:
        raise HostError(f"enumeration limited to n <= {cap}")
    level = {canonical_form(_order_one()): _order_one()}
    for r in range(1, n):
        nxt: dict[bytes, Host] = {}
        for t in level.values():
            for mask in range(1 << r):
                e = extend(t, mask)
                form = canonical_form(e)
                if form not in nxt:
                    nxt[form] = e
        level = nxt
    out = []
    for idx, form in enumerate(sorted(level)):
        out.append(canonical_host(level[form]).with_name(f"T{n}#{idx}"))
    return out


def all_labelled_tournaments(n: int) -> Iterable[Host]:
    m = comb(n, 2)
    for bits in range(1 << m):
        yield Host(n, ANTISYMMETRIC, tuple((bits >> i) & 1 for i in range(m)), f"labelled({n},{bits})")


def tournament_class_count(n: int) -> int:
    """Number of non-isomorphic n-tournaments by Burnside's lemma over S_n.

    A permutation fixes a tournament only when all its cycles are odd; it then
    fixes ``2 ** orbits`` of them, where the pair orbits number
    ``sum (c - 1) / 2`` within cycles and ``gcd(c_i, c_j)`` between cycles.
    """
    from math import factorial, gcd

    total = 0
    for cycle_type, count in _cycle_types(n):
        if any(c % 2 == 0 for c in cycle_type):
            continue
        orbits = sum((c - 1) // 2 for c in cycle_type)
        orbits += sum(gcd(a, b) for a, b in itertools.combinations(cycle_type, 2))
        total += count * (1 << orbits)
    return total // factorial(n)


def _cycle_types(n: int):
    from collections import Counter
    from math import factorial, prod

    def partitions(m, largest):
        if m == 0:
            yield ()
            return
        for part in range(min(m, largest), 0, -1):
            for rest in partitions(m - part, part):
                yield (part,) + rest

    for lam in partitions(n, n):
        mult = Counter(lam)
        size = factorial(n) // (prod(lam) * prod(factorial(v) for v in mult.values()))
        yield lam, size
