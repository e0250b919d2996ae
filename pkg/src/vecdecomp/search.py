"""Threshold-driven extension search over tournaments.

If an (r+1)-tournament has D* < t then deleting some vertex leaves an
r-tournament with D* < t (r-1)/(r+1).  Starting from a complete list of
small tournaments we keep those below the threshold, extend them by one
vertex in every possible way, and repeat; an empty top level certifies that
no tournament of the top order falls below the target.
"""
from __future__ import annotations

import hashlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import lp as lpmod
from .decomp import structure, solve_exact
from .hosts import Host, HostError, canonical_form, extend
from .io import (
    CheckpointError,
    decode_digraph6,
    encode_digraph6,
    fmt_rational,
    load_checkpoint,
    save_checkpoint,
)
from .lp import LpProblem
from .patterns import WeightVector

log = logging.getLogger(__name__)

DEFAULT_CHUNK = 4096
DEFAULT_GUARD = Fraction(1, 100)


class SearchError(RuntimeError):
    pass


class SearchInterrupted(SearchError):
    """Raised after a checkpoint has been written for an interrupted run."""

    def __init__(self, message: str, checkpoint: str | None):
        super().__init__(message)
        self.checkpoint = checkpoint


# ---------------------------------------------------------------------------
# thresholds

@dataclass(frozen=True)
class ThresholdSchedule:
    target: Fraction
    r_hi: int
    r_lo: int
    exact: dict
    override: dict = field(default_factory=dict)

    def threshold(self, r: int) -> Fraction:
        return self.override.get(r, self.exact[r])

    @property
    def orders(self) -> list[int]:
        return list(range(self.r_lo, self.r_hi + 1))

    def as_record(self) -> dict:
        return {
            "target": fmt_rational(self.target),
            "r_hi": self.r_hi,
            "r_lo": self.r_lo,
            "exact": {str(r): fmt_rational(t) for r, t in sorted(self.exact.items())},
            "override": {str(r): fmt_rational(t) for r, t in sorted(self.override.items())},
        }


def threshold_schedule(target, r_hi: int, r_lo: int, mode: str = "exact",
                       decimals: Sequence | dict | None = None) -> ThresholdSchedule:
    """Exact chain t_{r-1} = t_r (r-2)/r down from ``target`` at ``r_hi``.

    In ``paper-decimal`` mode, ``decimals`` (a list for orders r_lo..r_hi or a
    mapping order -> value) replaces the exact thresholds; every replacement
    must be at least the exact value, otherwise survivors could be lost.
    """
    target = Fraction(target)
    if r_lo < 3:
        raise SearchError("r_lo must be at least 3")
    if r_hi <= r_lo:
        raise SearchError("r_hi must exceed r_lo")
    exact = {r_hi: target}
    for r in range(r_hi, r_lo, -1):
        exact[r - 1] = exact[r] * (r - 2) / r
    override = {}
    if mode == "paper-decimal":
        if decimals is None:
            raise SearchError("paper-decimal mode needs decimal thresholds")
        if isinstance(decimals, dict):
            items = {int(r): Fraction(str(t)) if isinstance(t, float) else Fraction(t)
                     for r, t in decimals.items()}
        else:
            vals = list(decimals)
            if len(vals) != r_hi - r_lo + 1:
                raise SearchError(f"expected {r_hi - r_lo + 1} decimal thresholds, got {len(vals)}")
            items = {r: Fraction(str(t)) if isinstance(t, float) else Fraction(t)
                     for r, t in zip(range(r_lo, r_hi + 1), vals)}
        for r, t in items.items():
            if r not in exact:
                raise SearchError(f"order {r} is outside the schedule")
            if t < exact[r]:
                raise SearchError(
                    f"threshold {t} at order {r} is below the exact chain value {exact[r]}; unsound")
            override[r] = t
    elif mode != "exact":
        raise SearchError(f"unknown schedule mode {mode!r}")
    return ThresholdSchedule(target, r_hi, r_lo, exact, override)


# ---------------------------------------------------------------------------
# frontiers

class Frontier:
    """A multiset of same-order tournaments, either listed or all extensions of parents."""

    def __init__(self, order: int, hosts: Sequence[Host] | None = None,
                 parents: Sequence[Host] | None = None):
        self.order = order
        self.hosts = list(hosts) if hosts is not None else None
        self.parents = list(parents) if parents is not None else None
        if (self.hosts is None) == (self.parents is None):
            raise SearchError("a frontier is either listed or generated from parents")
        if self.parents is not None and any(p.n != order - 1 for p in self.parents):
            raise SearchError("parents must have order one less than the frontier")

    def __len__(self):
        if self.hosts is not None:
            return len(self.hosts)
        return len(self.parents) << (self.order - 1)

    def slice(self, start: int, stop: int) -> list[Host]:
        if self.hosts is not None:
            return self.hosts[start:stop]
        shift = self.order - 1
        out = []
        for idx in range(start, min(stop, len(self))):
            out.append(extend(self.parents[idx >> shift], idx & ((1 << shift) - 1)))
        return out


def extend_frontier(survivors: Sequence[Host]) -> Frontier:
    """All 2^r one-vertex extensions of every survivor, by survivor then mask."""
    if not survivors:
        raise SearchError("no survivors to extend")
    r = survivors[0].n
    if any(s.n != r for s in survivors):
        raise SearchError("survivors must share one order")
    return Frontier(r + 1, parents=survivors)


# ---------------------------------------------------------------------------
# evaluation

@dataclass
class EvalSettings:
    k: int = 3
    presolve: bool = True
    guard: Fraction = DEFAULT_GUARD
    hint: bool = True


class Evaluator:
    """Computes D* for many complete hosts of one order."""

    def __init__(self, n: int, k: int, v: WeightVector, settings: EvalSettings):
        self.n, self.k, self.v = n, k, v
        self.settings = settings
        self.table = v.catalog.lookup()
        self.exact_calls = 0
        self.float_calls = 0
        self._st = None

    def _structure(self, host: Host):
        if self._st is None:
            self._st = structure(host, self.k)
        return self._st

    def costs(self, host: Host) -> list[Fraction]:
        st = self._structure(host)
        table, v = self.table, self.v
        return [v.by_id(table[host.subset_labels(X)].id) for X in st.subsets]

    def exact(self, host: Host) -> Fraction:
        st = self._structure(host)
        p = LpProblem(st.A, st.b, tuple(self.costs(host)), st.names)
        self.exact_calls += 1
        sol = solve_exact(p, self.settings.hint)
        if sol.status != lpmod.OPTIMAL:
            raise SearchError(f"LP for {host.name} returned {sol.status}")
        return sol.value

    def float_value(self, host: Host) -> float:
        st = self._structure(host)
        A, b = st.sparse
        c = np.array([float(x) for x in self.costs(host)])
        self.float_calls += 1
        res = lpmod.solve_float(A, b, c)
        if res.status != lpmod.OPTIMAL:
            raise SearchError(f"float LP for {host.name} returned {res.status}")
        return res.value


@dataclass
class ChunkResult:
    index: int
    size: int
    survivors: list  # (position in frontier, exact value)
    exact_min: Fraction | None
    float_min: float | None
    float_near_min: list  # (position, float value) within guard of float_min
    exact_solves: int
    float_solves: int


def _eval_chunk(index: int, start: int, hosts: Sequence[Host], v: WeightVector,
                threshold: Fraction, settings: EvalSettings) -> ChunkResult:
    if not hosts:
        return ChunkResult(index, 0, [], None, None, [], 0, 0)
    ev = Evaluator(hosts[0].n, settings.k, v, settings)
    survivors = []
    exact_min = None
    fmin = None
    near: list = []
    g = float(settings.guard)
    t = float(threshold)
    for off, h in enumerate(hosts):
        pos = start + off
        if settings.presolve:
            fv = ev.float_value(h)
            if fv >= t + g:
                if fmin is None or fv < fmin:
                    fmin = fv
                    near = [(q, w) for q, w in near if w < fmin + g]
                if fv < fmin + g:
                    near.append((pos, fv))
                continue
        val = ev.exact(h)
        if val < threshold:
            survivors.append((pos, val))
        if exact_min is None or val < exact_min:
            exact_min = val
    return ChunkResult(index, len(hosts), survivors, exact_min, fmin, near,
                       ev.exact_calls, ev.float_calls)


def _eval_chunk_task(args):
    index, start, lines, v, threshold, settings = args
    hosts = [decode_digraph6(s).to_host() for s in lines]
    return _eval_chunk(index, start, hosts, v, threshold, settings)


@dataclass
class SearchLevel:
    order: int
    frontier_size: int
    threshold: Fraction
    below: int
    lowest: Fraction | None
    distinct_below: int | None = None
    exact_solves: int = 0
    float_solves: int = 0
    seconds: float = 0.0

    def as_record(self) -> dict:
        return {
            "order": self.order,
            "frontier_size": self.frontier_size,
            "threshold": fmt_rational(self.threshold),
            "below_threshold": self.below,
            "distinct_below": self.distinct_below,
            "lowest_value": None if self.lowest is None else fmt_rational(self.lowest),
            "exact_solves": self.exact_solves,
            "float_solves": self.float_solves,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SearchLevel":
        return cls(rec["order"], rec["frontier_size"], Fraction(rec["threshold"]), rec["below_threshold"],
                   None if rec["lowest_value"] is None else Fraction(rec["lowest_value"]),
                   rec.get("distinct_below"), rec.get("exact_solves", 0), rec.get("float_solves", 0))


class _LevelState:
    """Merges chunk results in chunk order."""

    def __init__(self):
        self.done = 0
        self.survivors: list[tuple[int, Fraction]] = []
        self.exact_min: Fraction | None = None
        self.float_min: float | None = None
        self.near: list[tuple[int, float]] = []
        self.exact_solves = 0
        self.float_solves = 0

    def merge(self, res: ChunkResult, guard: float):
        self.done += 1
        self.survivors.extend(res.survivors)
        if res.exact_min is not None and (self.exact_min is None or res.exact_min < self.exact_min):
            self.exact_min = res.exact_min
        if res.float_min is not None:
            if self.float_min is None or res.float_min < self.float_min:
                self.float_min = res.float_min
            self.near = [(q, w) for q, w in self.near + res.float_near_min if w < self.float_min + guard]
        self.exact_solves += res.exact_solves
        self.float_solves += res.float_solves

    def as_record(self) -> dict:
        return {
            "done": self.done,
            "survivors": [[q, fmt_rational(v)] for q, v in self.survivors],
            "exact_min": None if self.exact_min is None else fmt_rational(self.exact_min),
            "float_min": self.float_min,
            "near": [[q, w] for q, w in self.near],
            "exact_solves": self.exact_solves,
            "float_solves": self.float_solves,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "_LevelState":
        s = cls()
        s.done = rec["done"]
        s.survivors = [(q, Fraction(v)) for q, v in rec["survivors"]]
        s.exact_min = None if rec["exact_min"] is None else Fraction(rec["exact_min"])
        s.float_min = rec["float_min"]
        s.near = [(q, w) for q, w in rec["near"]]
        s.exact_solves = rec["exact_solves"]
        s.float_solves = rec["float_solves"]
        return s


def _chunks(frontier: Frontier, chunk_size: int):
    total = len(frontier)
    for index, start in enumerate(range(0, total, chunk_size)):
        yield index, start, min(start + chunk_size, total)


def _finish_level(frontier: Frontier, state: _LevelState, threshold: Fraction, v: WeightVector,
                  settings: EvalSettings, dedup: bool, seconds: float):
    survivors = [(frontier.slice(q, q + 1)[0], val) for q, val in state.survivors]
    lowest = state.exact_min
    if state.float_min is not None and (lowest is None or state.float_min < float(lowest) + float(settings.guard)):
        # float-decided hosts might hold the minimum; settle them exactly
        ev = Evaluator(frontier.order, settings.k, v, settings)
        for q, _ in state.near:
            val = ev.exact(frontier.slice(q, q + 1)[0])
            state.exact_solves += 1
            if lowest is None or val < lowest:
                lowest = val
    distinct = None
    if dedup:
        distinct = len({canonical_form(h) for h, _ in survivors})
    level = SearchLevel(frontier.order, len(frontier), threshold, len(survivors), lowest, distinct,
                        state.exact_solves, state.float_solves, seconds)
    return survivors, level


def run_level(frontier: Frontier | Sequence[Host], v: WeightVector, threshold, *, k: int = 3,
              presolve: bool = False, guard=DEFAULT_GUARD, hint: bool = True, dedup: bool = False,
              workers: int = 1, chunk_size: int = DEFAULT_CHUNK):
    """Evaluate D* on a frontier; survivors are the hosts with D* strictly below ``threshold``.

    Returns ``(survivors, level)`` where survivors is a list of ``(host, D*)``
    in frontier order.
    """
    if not isinstance(frontier, Frontier):
        hosts = list(frontier)
        if hosts and any(h.n != hosts[0].n for h in hosts):
            raise SearchError("frontier hosts must share one order")
        frontier = Frontier(hosts[0].n if hosts else 0, hosts=hosts)
    settings = EvalSettings(k, presolve, Fraction(guard), hint)
    threshold = Fraction(threshold)
    state = _LevelState()
    t0 = time.perf_counter()
    for res in _map_chunks(frontier, 0, v, threshold, settings, workers, chunk_size):
        state.merge(res, float(settings.guard))
    return _finish_level(frontier, state, threshold, v, settings, dedup, time.perf_counter() - t0)


def _map_chunks(frontier: Frontier, first_chunk: int, v, threshold, settings, workers, chunk_size):
    jobs = [c for c in _chunks(frontier, chunk_size) if c[0] >= first_chunk]
    if workers <= 1:
        for index, start, stop in jobs:
            try:
                yield _eval_chunk(index, start, frontier.slice(start, stop), v, threshold, settings)
            except (lpmod.LpError, HostError) as exc:
                raise SearchError(f"chunk {index} at order {frontier.order}: {exc}") from exc
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        args = ((index, start, [encode_digraph6(h).decode() for h in frontier.slice(start, stop)],
                 v, threshold, settings) for index, start, stop in jobs)
        # map preserves submission order, so merging stays deterministic
        yield from pool.map(_eval_chunk_task, args)


# ---------------------------------------------------------------------------
# pipeline

@dataclass
class SearchReport:
    schedule: ThresholdSchedule
    levels: list[SearchLevel]
    verdict: str
    witness: Host | None = None
    base_complete: bool = False
    top_order: int = 0
    survivors: list = field(default_factory=list)  # (host, value) at the last executed level

    def table_rows(self) -> list[list]:
        rows = []
        for lv in self.levels:
            rows.append([lv.order, lv.frontier_size, fmt_rational(lv.threshold), lv.below,
                         "" if lv.distinct_below is None else lv.distinct_below,
                         "" if lv.lowest is None else fmt_rational(lv.lowest)])
        return rows

    TABLE_HEADER = ["order", "frontier_size", "threshold", "below_threshold", "distinct_below", "lowest_value"]

    def as_record(self) -> dict:
        return {
            "schedule": self.schedule.as_record(),
            "levels": [lv.as_record() for lv in self.levels],
            "verdict": self.verdict,
            "witness": None if self.witness is None else encode_digraph6(self.witness).decode(),
            "base_complete": self.base_complete,
            "top_order": self.top_order,
            "survivors": [[encode_digraph6(h).decode(), fmt_rational(val)] for h, val in self.survivors],
        }

    def same_result(self, other: "SearchReport") -> bool:
        """Equality ignoring wall-clock fields."""
        a, b = self.as_record(), other.as_record()
        return a == b


def _config_digest(schedule: ThresholdSchedule, v: WeightVector, k: int, base_digest: str,
                   settings: dict) -> str:
    h = hashlib.sha256()
    h.update(repr(sorted(schedule.as_record().items())).encode())
    h.update(v.digest().encode())
    h.update(str(k).encode())
    h.update(base_digest.encode())
    h.update(repr(sorted(settings.items())).encode())
    return h.hexdigest()


def run_pipeline(base: Sequence[Host], schedule: ThresholdSchedule, v: WeightVector, *,
                 base_complete: bool = False, k: int = 3, stop_order: int | None = None,
                 presolve: bool = False, guard=DEFAULT_GUARD, hint: bool = True, dedup: bool = False,
                 workers: int = 1, chunk_size: int = DEFAULT_CHUNK,
                 checkpoint: str | None = None, resume: bool = False,
                 stop_after_chunks: int | None = None,
                 progress: Callable[[str], None] | None = None) -> SearchReport:
    """Run the level chain from ``schedule.r_lo`` up to ``stop_order`` (default ``r_hi``).

    The verdict is ``certified`` when some executed level has no survivors
    and the base is flagged complete, ``refuted`` when the top order has a
    survivor (a tournament below the target), ``incomplete`` otherwise.
    With ``checkpoint`` set, state is saved after every chunk; ``resume``
    continues from it.  ``stop_after_chunks`` simulates an interruption.
    """
    base = list(base)
    top = schedule.r_hi if stop_order is None else stop_order
    if not (schedule.r_lo <= top <= schedule.r_hi):
        raise SearchError(f"stop order {top} outside [{schedule.r_lo}, {schedule.r_hi}]")
    if not base:
        raise SearchError("empty base frontier")
    if any(h.n != schedule.r_lo for h in base):
        raise SearchError(f"base frontier must have order {schedule.r_lo}")
    if any(not h.is_tournament for h in base):
        raise SearchError("base frontier must consist of tournaments")
    settings = EvalSettings(k, presolve, Fraction(guard), hint)
    base_digest = hashlib.sha256(b"".join(encode_digraph6(h) + b"\n" for h in base)).hexdigest()
    cfg = {"presolve": presolve, "guard": fmt_rational(Fraction(guard)), "dedup": dedup,
           "chunk_size": chunk_size, "stop_order": top, "base_complete": base_complete}
    digest = _config_digest(schedule, v, k, base_digest, cfg)
    say = progress or (lambda msg: log.info(msg))

    levels: list[SearchLevel] = []
    order = schedule.r_lo
    parents: list[Host] | None = None
    final_survivors: list = []
    state = _LevelState()
    if resume:
        if checkpoint is None:
            raise SearchError("resume needs a checkpoint path")
        ck = load_checkpoint(checkpoint)
        if ck.get("config_digest") != digest:
            raise CheckpointError("checkpoint belongs to a different run (vector, schedule, base or settings differ)")
        levels = [SearchLevel.from_record(r) for r in ck["levels"]]
        order = ck["order"]
        if ck["parents"] is not None:
            final_survivors = [(decode_digraph6(s).to_host(f"survivor{i}"), Fraction(val))
                               for i, (s, val) in enumerate(ck["parents"])]
            parents = [h for h, _ in final_survivors]
        state = _LevelState.from_record(ck["state"])
        say(f"resuming at order {order}, chunk {state.done}")

    chunks_this_run = 0
    while order <= top:
        if parents is None:
            frontier = Frontier(order, hosts=base) if order == schedule.r_lo else Frontier(order, hosts=[])
        else:
            frontier = Frontier(order, parents=parents) if parents else Frontier(order, hosts=[])
        threshold = schedule.threshold(order)
        t0 = time.perf_counter()
        for res in _map_chunks(frontier, state.done, v, threshold, settings, workers, chunk_size):
            state.merge(res, float(settings.guard))
            chunks_this_run += 1
            if checkpoint is not None:
                _save(checkpoint, digest, levels, order, final_survivors if parents is not None else None, state)
            if stop_after_chunks is not None and chunks_this_run >= stop_after_chunks:
                raise SearchInterrupted(f"stopped after {chunks_this_run} chunks at order {order}", checkpoint)
        survivors, level = _finish_level(frontier, state, threshold, v, settings, dedup,
                                         time.perf_counter() - t0)
        levels.append(level)
        say(f"order {order}: frontier {level.frontier_size}, below {level.below}"
            f"{'' if level.distinct_below is None else f' ({level.distinct_below} distinct)'}, "
            f"lowest {level.lowest}")
        final_survivors = survivors
        parents = [h for h, _ in survivors]
        order += 1
        state = _LevelState()
        if checkpoint is not None:
            _save(checkpoint, digest, levels, order, final_survivors, state)

    verdict = "incomplete"
    witness = None
    if any(lv.below == 0 for lv in levels):
        verdict = "certified" if base_complete else "incomplete"
    elif top == schedule.r_hi and levels[-1].below > 0 and schedule.threshold(top) == schedule.target:
        verdict = "refuted"
        witness = final_survivors[0][0]
    return SearchReport(schedule, levels, verdict, witness, base_complete, top, final_survivors)


def _save(path, digest, levels, order, survivors, state: _LevelState):
    save_checkpoint(path, {
        "config_digest": digest,
        "levels": [lv.as_record() for lv in levels],
        "order": order,
        "parents": None if survivors is None else
        [[encode_digraph6(h).decode(), fmt_rational(val)] for h, val in survivors],
        "state": state.as_record(),
    })


def checkpoint_info(path) -> dict:
    ck = load_checkpoint(path)
    return {
        "order": ck["order"],
        "chunks_done": ck["state"]["done"],
        "levels_done": [lv["order"] for lv in ck["levels"]],
        "parents": None if ck["parents"] is None else len(ck["parents"]),
        "config_digest": ck["config_digest"][:16],
    }


def pruning_holds(host: Host, v: WeightVector, threshold, k: int = 3) -> bool:
    """Check the extension lemma on one host: D* < t implies some G - u has D* < t (n-2)/n."""
    from .decomp import dstar
    from .hosts import delete_vertex

    t = Fraction(threshold)
    n = host.n
    val = dstar(host, k, v).value
    if not val < t:
        return True
    bound = t * (n - 2) / n
    return any(dstar(delete_vertex(host, u), k, v).value < bound for u in range(n))
