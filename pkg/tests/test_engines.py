import itertools

import numpy as np
import pytest

from sdnbi.core import Dominance, ObjectivePoint, dominates
from sdnbi.engines import EngineConfig, run
from sdnbi.engines.common import MAX_ITERS, TERMINATED_EMPTY, TERMINATED_TOL
from sdnbi.engines.mnbi import beta_schedule
from sdnbi.engines.sd import select_facet
from sdnbi.geometry import Facet
from sdnbi.problems import get_problem


def _check_nondominated(state):
    pts = list(state.archive)
    for p, q in itertools.combinations(pts, 2):
        assert dominates(p, q) is Dominance.INCOMPARABLE


def _trace(result):
    return [
        (r.iter, r.event, None if np.isnan(r.d_max) else round(r.d_max, 12), r.archive_size,
         r.new_point.z if r.new_point else None)
        for r in result.records
    ]


class TestConfig:
    def test_rejects_unknown_algorithm(self):
        with pytest.raises(ValueError):
            EngineConfig(algorithm="nsga2")

    def test_rejects_nonpositive_epsilon(self):
        with pytest.raises(ValueError):
            EngineConfig(epsilon=0.0)

    def test_rejects_zero_budget(self):
        with pytest.raises(ValueError):
            EngineConfig(max_iters=0)

    def test_defaults_per_problem(self):
        cfg = EngineConfig.for_problem(get_problem("zdt3"), "sdnbi")
        assert (cfg.epsilon, cfg.max_iters, cfg.solver.n_starts) == (0.005, 36, 50)


class TestBetaSchedule:
    def test_grid_then_bisection(self):
        got = list(itertools.islice(beta_schedule(5), 7))
        assert got == [0.25, 0.5, 0.75, 0.125, 0.375, 0.625, 0.875]

    def test_ties_go_to_smaller_beta(self):
        got = list(itertools.islice(beta_schedule(2), 3))
        assert got == [0.5, 0.25, 0.75]


class TestSelection:
    def test_error_then_extent_then_left(self):
        a = Facet(ObjectivePoint((0.0, 1.0)), ObjectivePoint((0.125, 0.5)))
        b = Facet(ObjectivePoint((0.25, 0.5)), ObjectivePoint((0.5, 0.25)))
        c = Facet(ObjectivePoint((0.5, 0.25)), ObjectivePoint((0.75, 0.0)))
        assert select_facet([(0.1, a, None), (0.2, b, None)])[1] is b
        assert select_facet([(0.1, a, None), (0.1, b, None)])[1] is b
        assert select_facet([(0.1, c, None), (0.1, b, None)])[1] is b


@pytest.mark.parametrize("algorithm", ["sd", "mnbi", "sdnbi"])
def test_nondominated_after_every_iteration(algorithm):
    spec = get_problem("sch2")
    run(spec, EngineConfig.for_problem(spec, algorithm, max_iters=12), _check_nondominated)


@pytest.mark.parametrize("algorithm", ["sd", "mnbi", "sdnbi"])
def test_deterministic(algorithm):
    spec = get_problem("sch2")
    cfg = EngineConfig.for_problem(spec, algorithm, max_iters=10)
    assert _trace(run(spec, cfg)) == _trace(run(spec, cfg))


def test_records_strictly_ordered(engine_run):
    res = engine_run("zdt3", "sdnbi")
    iters = [r.iter for r in res.records]
    assert iters == list(range(1, len(iters) + 1))
    assert all(r.d_max >= 0 for r in res.records if not np.isnan(r.d_max))
    assert res.termination in (TERMINATED_TOL, TERMINATED_EMPTY, MAX_ITERS)


def test_sdnbi_never_repeats_a_subproblem(engine_run):
    for name in ("sch2", "tnk", "zdt3"):
        keys = [r.facet for r in engine_run(name, "sdnbi").records if r.facet is not None]
        assert len(keys) == len(set(keys))


def test_sd_error_monotone_on_convex_problem(engine_run):
    d = [r.d_max for r in engine_run("mop1", "sd").records if not np.isnan(r.d_max)]
    assert all(b <= a + 1e-12 for a, b in zip(d, d[1:]))


def test_sd_on_tnk_finds_only_anchors(engine_run):
    res = engine_run("tnk", "sd")
    assert sorted(p.z for p in res.archive) == [(0.0, 1.0), (1.0, 0.0)]


def test_mnbi_uses_whole_budget(engine_run):
    res = engine_run("sch2", "mnbi")
    assert res.termination == MAX_ITERS and res.n_iters == 27


def test_sdnbi_fathoms_sch2_gap_early(engine_run):
    res = engine_run("sch2", "sdnbi")
    gap = [iv for iv in res.fathomed if iv[0] <= 0.01 and iv[1] >= 0.06]
    assert gap, res.fathomed
    first = next(r.iter for r in res.records if r.event == "fathom-facet")
    assert first <= 10


def test_mnbi_zdt5_extended_run_completes_front():
    spec = get_problem("zdt5")
    res = run(spec, EngineConfig.for_problem(spec, "mnbi", max_iters=70))
    assert len(res.archive) == 31
    found = max(p.iter_found for p in res.archive)
    assert found <= 70
