import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdnbi.core import DecisionVector, Dominance, dominates
from sdnbi.problems import MOP1, PROBLEMS, SCH2, TNK, ZDT3, ZDT5, evaluate, get_problem, reference_front, zdt5_v
from sdnbi.problems.base import _central_diff
from sdnbi.scalarize import SolverConfig, find_anchors

CONTINUOUS = [MOP1, SCH2, TNK, ZDT3]


class TestEvaluate:
    def test_mop1_origin(self):
        f, g = evaluate(MOP1, (0.0, 0.0))
        np.testing.assert_allclose(f, (1.0, 4.0))
        assert g.size == 0

    def test_tnk_second_constraint_violated(self):
        f, g = evaluate(TNK, (0.5 + math.sqrt(0.5) + 0.01, 0.5))
        assert g[1] > 0

    def test_tnk_origin_uses_zero_angle(self):
        _, g = evaluate(TNK, (0.0, 0.0))
        assert math.isclose(g[0], 1.0 + 0.1)

    def test_zdt5_all_tails_at_five(self):
        f, g = evaluate(ZDT5, DecisionVector((), (0,) + (5,) * 10))
        np.testing.assert_allclose(f, (1.0, 10.0))
        assert g.size == 0

    def test_zdt3_known_point(self):
        x = np.zeros(30)
        x[0] = 0.25
        f, _ = evaluate(ZDT3, x)
        np.testing.assert_allclose(f, (0.25, 1.0 - 0.5 - 0.25 * math.sin(2.5 * math.pi)))

    @pytest.mark.parametrize("spec", list(PROBLEMS.values()), ids=list(PROBLEMS))
    def test_out_of_box_is_domain_violation(self, spec):
        x = spec.upper_array + 1.0
        with pytest.raises(ValueError, match="domain violation"):
            evaluate(spec, x)

    def test_wrong_length_is_domain_violation(self):
        with pytest.raises(ValueError, match="domain violation"):
            evaluate(MOP1, (0.0,))

    def test_fractional_integer_is_domain_violation(self):
        with pytest.raises(ValueError, match="domain violation"):
            evaluate(ZDT5, [0.5] + [5.0] * 10)

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            get_problem("dtlz2")

    def test_lookup_case_insensitive(self):
        assert get_problem("ZDT5") is ZDT5


class TestJacobians:
    @pytest.mark.parametrize("spec", CONTINUOUS, ids=lambda s: s.name)
    @settings(max_examples=30, deadline=None)
    @given(data=st.data())
    def test_analytic_matches_finite_differences(self, spec, data):
        lo, hi = spec.lower_array, spec.upper_array
        # stay clear of the box edges and of the ZDT3 sqrt kink at x1 = 0
        u = np.array(data.draw(st.lists(st.floats(0.05, 0.95), min_size=spec.n_vars, max_size=spec.n_vars)))
        v = lo + u * (hi - lo)
        np.testing.assert_allclose(
            spec.f_jac(v), _central_diff(spec.objectives, v, lo, hi), rtol=1e-4, atol=1e-5
        )
        if spec.constraints is not None:
            np.testing.assert_allclose(
                spec.g_jac(v), _central_diff(spec.constraints, v, lo, hi), rtol=1e-4, atol=1e-4
            )


class TestZdt5:
    def test_single_coordinate_oracle(self):
        values = {y: zdt5_v(y) for y in range(6)}
        assert min(values, key=values.get) == 5
        assert 10 * min(values.values()) == 10

    def test_exact_front_matches_brute_force(self):
        # enumerate y1 with the tail fixed at its separable minimum and
        # compare against a brute force over two tail coordinates
        tails = [min(zdt5_v(a) + zdt5_v(b) for a, b in itertools.product(range(6), repeat=2))]
        assert tails == [2]
        front = ZDT5.exact_front()
        expected = np.array([(1.0 + k, 10.0 / (1.0 + k)) for k in range(31)])
        np.testing.assert_allclose(front, expected)

    def test_reference_front_has_31_points(self, reference):
        ref = reference("zdt5")
        assert len(ref) == 31
        raw = np.array([p.raw for p in ref])
        assert np.any(np.all(np.isclose(raw, (31.0, 10.0 / 31.0)), axis=1))


class TestAnchors:
    # (problem, components of the published ideal/nadir consistent with the formulation)
    CONSISTENT = {
        "mop1": ((0,), (0,)),
        "sch2": ((0, 1), (0, 1)),
        "tnk": ((0, 1), (0, 1)),
        "zdt3": ((0, 1), (0, 1)),
        "zdt5": ((1,), (0, 1)),
    }

    @pytest.mark.parametrize("name", sorted(CONSISTENT))
    def test_anchor_bounds_match_published(self, name):
        spec = get_problem(name)
        bounds, left, right = find_anchors(spec, SolverConfig(n_starts=spec.defaults.n_starts))
        ideal_idx, nadir_idx = self.CONSISTENT[name]
        for i in ideal_idx:
            assert abs(bounds.ideal[i] - spec.defaults.table_ideal[i]) < 1e-2
        for i in nadir_idx:
            assert abs(bounds.nadir[i] - spec.defaults.table_nadir[i]) < 1e-2
        assert left.z == (0.0, 1.0) and right.z == (1.0, 0.0)


class TestReferenceFront:
    def test_mop1_full_count(self, reference):
        assert len(reference("mop1")) == 100

    @pytest.mark.parametrize("name", ["mop1", "sch2", "zdt5"])
    def test_nondominated(self, reference, name):
        pts = list(reference(name))
        for p, q in itertools.combinations(pts, 2):
            assert dominates(p, q) is Dominance.INCOMPARABLE

    def test_rejects_tiny_n(self):
        with pytest.raises(ValueError):
            reference_front(MOP1, n_points=1)
