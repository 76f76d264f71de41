import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdnbi.core import (
    DecisionVector,
    Dominance,
    InsertStatus,
    ObjectiveBounds,
    ObjectivePoint,
    ParetoArchive,
    archive_insert,
    denormalize,
    dominates,
    normalize,
)

unit = st.floats(0.0, 1.0, allow_nan=False)
pairs = st.tuples(unit, unit)


class TestDominates:
    def test_strict(self):
        assert dominates((0.2, 0.5), (0.3, 0.6)) is Dominance.STRICT

    def test_equal_is_weak(self):
        assert dominates((0.2, 0.5), (0.2, 0.5)) is Dominance.WEAK

    def test_conflicting_is_incomparable(self):
        assert dominates((0.2, 0.5), (0.1, 0.9)) is Dominance.INCOMPARABLE

    def test_one_component_equal_is_strict(self):
        assert dominates((0.2, 0.5), (0.2, 0.6)) is Dominance.STRICT

    def test_accepts_points(self):
        assert dominates(ObjectivePoint((0.0, 0.0)), ObjectivePoint((1.0, 1.0))) is Dominance.STRICT

    @given(pairs, pairs)
    def test_antisymmetric(self, a, b):
        if a != b and dominates(a, b) is Dominance.STRICT:
            assert dominates(b, a) is Dominance.INCOMPARABLE


class TestNormalize:
    bounds = ObjectiveBounds((1.0, -2.0), (3.0, 6.0))

    def test_ideal_maps_to_origin(self):
        np.testing.assert_allclose(normalize((1.0, -2.0), self.bounds), (0.0, 0.0))

    def test_nadir_maps_to_ones(self):
        np.testing.assert_allclose(normalize((3.0, 6.0), self.bounds), (1.0, 1.0))

    def test_degenerate_bounds_rejected(self):
        with pytest.raises(ValueError, match="degenerate objective range"):
            ObjectiveBounds((0.0, 1.0), (0.0, 2.0))

    @given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
    def test_round_trip(self, a, b):
        f = np.array([a, b])
        back = denormalize(normalize(f, self.bounds), self.bounds)
        np.testing.assert_allclose(back, f, atol=1e-12 * max(1.0, abs(a), abs(b)))


class TestObjectivePoint:
    def test_normal_must_sum_to_one(self):
        with pytest.raises(ValueError):
            ObjectivePoint((0.5, 0.5), normal=(0.5, 0.6), offset=0.55)

    def test_normal_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            ObjectivePoint((0.5, 0.5), normal=(1.5, -0.5), offset=0.5)

    def test_offset_requires_normal(self):
        with pytest.raises(ValueError):
            ObjectivePoint((0.5, 0.5), offset=0.5)

    def test_offset_must_match(self):
        with pytest.raises(ValueError):
            ObjectivePoint((0.5, 0.5), normal=(0.5, 0.5), offset=0.7)

    def test_with_normal_rescales(self):
        p = ObjectivePoint((0.2, 0.6)).with_normal((1.0, 3.0))
        assert p.normal == (0.25, 0.75)
        assert math.isclose(p.offset, 0.25 * 0.2 + 0.75 * 0.6)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            ObjectivePoint((float("nan"), 0.0))

    def test_decision_vector_concatenates(self):
        d = DecisionVector((0.5,), (3, 4))
        np.testing.assert_array_equal(d.as_array(), [0.5, 3.0, 4.0])
        assert len(d) == 3


class TestArchive:
    def test_insert_and_sort(self):
        a = ParetoArchive()
        for z in [(0.5, 0.5), (0.0, 1.0), (1.0, 0.0)]:
            assert a.insert(ObjectivePoint(z)).status is InsertStatus.INSERTED
        assert [p.z[0] for p in a] == [0.0, 0.5, 1.0]

    def test_duplicate_within_tolerance(self):
        a = ParetoArchive(dedup_tol=1e-6)
        a.insert(ObjectivePoint((0.5, 0.5)))
        assert a.insert(ObjectivePoint((0.5 + 5e-7, 0.5))).status is InsertStatus.DUPLICATE
        assert len(a) == 1

    def test_dominated_rejected(self):
        a = ParetoArchive([ObjectivePoint((0.2, 0.2))])
        assert a.insert(ObjectivePoint((0.3, 0.3))).status is InsertStatus.DOMINATED

    def test_dominating_prunes(self):
        a = ParetoArchive([ObjectivePoint((0.3, 0.3)), ObjectivePoint((0.0, 1.0))])
        res = archive_insert(a, ObjectivePoint((0.2, 0.2)))
        assert res.status is InsertStatus.INSERTED
        assert [p.z for p in res.pruned] == [(0.3, 0.3)]
        assert len(a) == 2

    @settings(max_examples=200)
    @given(st.lists(pairs, max_size=40))
    def test_invariants_after_every_insert(self, zs):
        a = ParetoArchive()
        for z in zs:
            a.insert(ObjectivePoint(z))
            arr = a.z_array()
            assert np.all(np.diff(arr[:, 0]) > 0) or len(arr) < 2
            assert np.all(np.diff(arr[:, 1]) < 0) or len(arr) < 2
            for i, p in enumerate(a):
                for j, q in enumerate(a):
                    if i != j:
                        assert dominates(p, q) is Dominance.INCOMPARABLE
                        assert max(abs(p.z[0] - q.z[0]), abs(p.z[1] - q.z[1])) > a.dedup_tol

    @given(st.lists(pairs, max_size=30))
    def test_copy_is_independent(self, zs):
        a = ParetoArchive(ObjectivePoint(z) for z in zs)
        b = a.copy()
        b.insert(ObjectivePoint((-1.0, -1.0)))
        assert len(b) == 1
        assert len(a) == len(ParetoArchive(ObjectivePoint(z) for z in zs))
