from fractions import Fraction

import pytest

from vecdecomp.decomp import dstar
from vecdecomp.hosts import canonical_form, enumerate_nonisomorphic_tournaments, extend
from vecdecomp.io import CheckpointError
from vecdecomp.search import (
    Frontier,
    SearchError,
    SearchInterrupted,
    checkpoint_info,
    extend_frontier,
    pruning_holds,
    run_level,
    run_pipeline,
    threshold_schedule,
)

F = Fraction


def test_exact_chain():
    s = threshold_schedule(26, 14, 7)
    assert [s.threshold(r) for r in range(7, 15)] == [
        6, 8, F(72, 7), F(90, 7), F(110, 7), F(132, 7), F(156, 7), 26]


def test_paper_decimal_mode():
    s = threshold_schedule(26, 14, 7, "paper-decimal", {10: "12.86"})
    assert s.threshold(10) == F(643, 50) and s.threshold(9) == F(72, 7)
    with pytest.raises(SearchError):
        threshold_schedule(26, 14, 7, "paper-decimal", {10: "12.85"})
    with pytest.raises(SearchError):
        threshold_schedule(26, 14, 7, "paper-decimal", [1, 2])
    with pytest.raises(SearchError):
        threshold_schedule(26, 14, 7, "other")


def test_frontier_indexing():
    parents = enumerate_nonisomorphic_tournaments(4)
    fr = extend_frontier(parents)
    assert len(fr) == 4 * 16
    hosts = fr.slice(0, len(fr))
    assert hosts[17].pairs == extend(parents[1], 1).pairs
    assert fr.slice(60, 64)[-1].pairs == extend(parents[3], 15).pairs


@pytest.mark.parametrize("n", [4, 5, 6])
def test_pruning_soundness_exhaustive(t3_vector, n):
    for t in enumerate_nonisomorphic_tournaments(n):
        d = dstar(t, 3, t3_vector).value
        for thr in (d + F(1, 7), d + 1, F(20, 7), F(30, 7)):
            assert pruning_holds(t, t3_vector, thr)


def test_run_level_counts(t3_vector):
    base = enumerate_nonisomorphic_tournaments(5)
    surv, level = run_level(base, t3_vector, F(20, 7))
    values = [dstar(t, 3, t3_vector).value for t in base]
    assert level.below == sum(1 for x in values if x < F(20, 7))
    assert level.lowest == min(values)
    assert all(val < F(20, 7) for _, val in surv)


def _small(t3_vector, **kw):
    base = enumerate_nonisomorphic_tournaments(5)
    sched = threshold_schedule(26, 14, 5)
    return run_pipeline(base, sched, t3_vector, base_complete=True, stop_order=6, **kw)


def test_pipeline_bookkeeping(t3_vector):
    rep = _small(t3_vector, dedup=True)
    for a, b in zip(rep.levels, rep.levels[1:]):
        assert b.frontier_size == a.below * 2 ** a.order
    assert rep.verdict == "incomplete"


def test_presolve_agrees_with_exact(t3_vector):
    a = _small(t3_vector)
    b = _small(t3_vector, presolve=True)
    assert [(lv.below, lv.lowest) for lv in a.levels] == [(lv.below, lv.lowest) for lv in b.levels]


def test_determinism_across_workers(t3_vector):
    a = _small(t3_vector, presolve=True, workers=1, chunk_size=64)
    b = _small(t3_vector, presolve=True, workers=2, chunk_size=64)
    assert a.same_result(b)


def test_dedup_consistency(t3_vector):
    base = enumerate_nonisomorphic_tournaments(6)
    thr = F(30, 7)
    _, once = run_level(base, t3_vector, thr, dedup=True)
    twice = base + [t.relabel(list(reversed(range(6)))) for t in base]
    _, dup = run_level(twice, t3_vector, thr, dedup=True)
    assert dup.below == 2 * once.below
    assert dup.distinct_below == once.distinct_below


def test_certified_verdict(t3_vector):
    # with target 0 nothing can be below any threshold: the chain certifies immediately
    base = enumerate_nonisomorphic_tournaments(5)
    rep = run_pipeline(base, threshold_schedule(0, 7, 5), t3_vector, base_complete=True)
    assert rep.verdict == "certified" and rep.levels[0].below == 0
    rep = run_pipeline(base, threshold_schedule(0, 7, 5), t3_vector, base_complete=False)
    assert rep.verdict == "incomplete"


def test_refuted_verdict(t3_vector):
    # the transitive tournament's D* is C(n,2)/3, so a huge target has survivors at the top
    base = enumerate_nonisomorphic_tournaments(5)
    rep = run_pipeline(base, threshold_schedule(100, 6, 5), t3_vector, base_complete=True)
    assert rep.verdict == "refuted" and rep.witness is not None
    assert dstar(rep.witness, 3, t3_vector).value < 100


def test_checkpoint_resume(t3_vector, tmp_path):
    ck = str(tmp_path / "run.ck")
    full = _small(t3_vector, chunk_size=64)
    with pytest.raises(SearchInterrupted):
        _small(t3_vector, chunk_size=64, checkpoint=ck, stop_after_chunks=3)
    info = checkpoint_info(ck)
    assert info["chunks_done"] >= 1
    resumed = _small(t3_vector, chunk_size=64, checkpoint=ck, resume=True)
    assert resumed.same_result(full)
    with pytest.raises(CheckpointError):
        _small(t3_vector, chunk_size=64, checkpoint=ck, resume=True, presolve=True)


def test_pipeline_rejects_bad_base(t3_vector):
    with pytest.raises(SearchError):
        run_pipeline(enumerate_nonisomorphic_tournaments(4), threshold_schedule(26, 14, 5), t3_vector)
    with pytest.raises(SearchError):
        run_pipeline([], threshold_schedule(26, 14, 5), t3_vector)
