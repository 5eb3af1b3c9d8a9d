"""Exact measure brackets and sampling for program-comparison sets."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from cantorshift import (
    ConstRhs,
    DomainError,
    GEN,
    GKSetSpec,
    InsufficientDepthError,
    ProgramOnX,
    ProgramOnZ,
    QSequence,
    SIGMA,
    ShiftProgram,
    apply_program,
    cylinder_info,
    generator_family,
    limit_scan,
    measure_bounds,
    measure_mc,
    rhs_from_json,
    sigma_family,
)
from cantorshift.gausskuzmin import _image_weights

Q2 = QSequence.constant(2)
Q3 = QSequence.constant(3)


def shift_below(q, n, x, relation="lt"):
    return GKSetSpec(q, ShiftProgram.sigma_power(n), ConstRhs(F(x)), relation)


# ---------------------------------------------------------------------------
# Exact bounds
# ---------------------------------------------------------------------------

class TestBounds:
    def test_shift_preserves_uniform_mass(self):
        # {z : shifted z < x} has measure exactly x once x's digits resolve
        b = measure_bounds(shift_below(Q2, 3, F(1, 4)), 9)
        assert b.lower == b.upper == F(1, 4)
        assert b.decided_mass == 1

    def test_bracket_before_resolution(self):
        # at shallow depth the bracket straddles but still contains x
        b = measure_bounds(shift_below(Q2, 3, F(1, 4)), 4)
        assert b.lower <= F(1, 4) <= b.upper
        assert b.width > 0

    def test_self_comparison_set(self):
        # {z : shifted z < z} in base 2 has measure 1/2
        spec = GKSetSpec(Q2, ShiftProgram.sigma_power(1),
                         ProgramOnZ(ShiftProgram.identity()))
        b = measure_bounds(spec, 16)
        assert b.lower == F(2**15 - 1, 2**16)
        assert b.upper == F(2**15 + 1, 2**16)
        assert b.width == F(1, 2**15)
        assert b.lower <= F(1, 2) <= b.upper

    def test_complement_mirrors_exactly(self):
        spec = GKSetSpec(Q2, ShiftProgram.sigma_power(1),
                         ProgramOnZ(ShiftProgram.identity()))
        comp = GKSetSpec(Q2, ShiftProgram.sigma_power(1),
                         ProgramOnZ(ShiftProgram.identity()), relation="ge")
        b, c = measure_bounds(spec, 12), measure_bounds(comp, 12)
        assert c.lower == 1 - b.upper
        assert c.upper == 1 - b.lower

    def test_deletion_set_exact(self):
        # deleting digit 2 keeps the result uniform: {del_2 z < 1/2} = 1/2
        spec = GKSetSpec(Q2, ShiftProgram((GEN(2),)), ConstRhs(F(1, 2)))
        b = measure_bounds(spec, 8)
        assert b.lower == b.upper == F(1, 2)

    def test_nesting_with_depth(self):
        spec = GKSetSpec(Q2, ShiftProgram.sigma_power(1),
                         ProgramOnZ(ShiftProgram.identity()))
        outer = measure_bounds(spec, 8)
        inner = measure_bounds(spec, 10)
        assert outer.lower <= inner.lower <= inner.upper <= outer.upper

    def test_width_equals_undecided_mass(self):
        spec = shift_below(Q3, 1, F(1, 7))
        b = measure_bounds(spec, 5)
        assert b.width == 1 - b.decided_mass

    def test_depth_refusal_names_requirement(self):
        spec = shift_below(Q2, 3, F(1, 4))
        with pytest.raises(InsufficientDepthError) as e:
            measure_bounds(spec, 3)
        assert e.value.required == 4

    def test_non_constant_base(self):
        q = QSequence.periodic([2, 3])
        b = measure_bounds(shift_below(q, 1, F(1, 3)), 7)
        assert b.lower <= F(1, 3) <= b.upper
        assert b.width <= F(1, 2 * 3 * 2 * 3 * 2)  # straddle shrinks with rank

    def test_explicit_base(self):
        q = QSequence.explicit([2, 3, 4])
        b = measure_bounds(shift_below(q, 2, F(1, 2)), 8)
        assert b.lower == b.upper == F(1, 2)

    def test_ge_constant_at_zero_is_everything(self):
        spec = shift_below(Q2, 1, F(0), relation="ge")
        b = measure_bounds(spec, 6)
        assert b.lower == b.upper == 1

    def test_lt_constant_at_zero_is_nothing(self):
        spec = shift_below(Q2, 1, F(0))
        b = measure_bounds(spec, 6)
        assert b.lower == b.upper == 0

    def test_fixed_point_threshold(self):
        # compare against a program applied to a fixed point: the threshold
        # is the number that program computes
        rhs = ProgramOnX(ShiftProgram.sigma_power(2), F(5, 16))
        spec = GKSetSpec(Q2, ShiftProgram.sigma_power(1), rhs)
        want = apply_program(ShiftProgram.sigma_power(2), F(5, 16), Q2)
        b = measure_bounds(spec, 10)
        assert b.lower <= want <= b.upper
        assert b.width <= F(1, 2**8)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 3), st.integers(0, 16))
    def test_measure_matches_threshold_property(self, n, num):
        x = F(num, 16)
        b = measure_bounds(shift_below(Q2, n, x), n + 7)
        assert b.lower <= x <= b.upper
        assert b.width <= F(1, 2**6)


class TestImageWeights:
    def test_empty_program_matches_cylinder_endpoint(self):
        # independent oracle: with no program the image of a rank-d
        # cylinder is the cylinder itself
        q = QSequence.explicit([2, 3, 4])
        w, den = _image_weights((), q, 3)
        for digs in [(0, 0, 0), (1, 2, 3), (0, 1, 2), (1, 0, 0)]:
            cyl = cylinder_info(digs, q)
            assert F(sum(c * ww for c, ww in zip(digs, w)), den) == cyl.inf
            assert F(1, den) == cyl.measure

    def test_shift_zeroes_leading_weights(self):
        w, den = _image_weights((SIGMA, SIGMA), Q2, 5)
        assert w[:2] == [0, 0]
        assert den == 2**3
        assert w[2:] == [4, 2, 1]

    def test_deletion_weight_pattern(self):
        w, den = _image_weights((GEN(2),), Q2, 4)
        assert w == [4, 0, 2, 1] and den == 8


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

class TestSampling:
    def test_deterministic(self):
        spec = shift_below(Q2, 1, F(1, 3))
        a = measure_mc(spec, samples=20000, seed=5)
        b = measure_mc(spec, samples=20000, seed=5)
        assert a.estimate == b.estimate and a.hits == b.hits

    def test_matches_exact_bounds(self):
        spec = GKSetSpec(Q2, ShiftProgram.sigma_power(1),
                         ProgramOnZ(ShiftProgram.identity()))
        b = measure_bounds(spec, 12)
        r = measure_mc(spec, samples=100_000, seed=9)
        assert float(b.lower) - 4 * r.std_err <= r.estimate <= float(b.upper) + 4 * r.std_err

    def test_threshold_set_estimate(self):
        spec = GKSetSpec(Q2, ShiftProgram((GEN(2),)), ConstRhs(F(1, 2)))
        r = measure_mc(spec, samples=100_000, seed=17)
        assert abs(r.estimate - 0.5) <= 4 * r.std_err

    def test_depth_capped_by_word_size(self):
        spec = shift_below(Q2, 1, F(1, 3))
        r = measure_mc(spec, samples=10, seed=0, extra_depth=32)
        assert r.depth == 33

    def test_huge_bases_refused(self):
        q = QSequence.explicit([2**40, 2**40])
        spec = shift_below(q, 1, F(1, 3))
        with pytest.raises(DomainError):
            measure_mc(spec, samples=10, seed=0)

    def test_sample_count_validated(self):
        with pytest.raises(DomainError):
            measure_mc(shift_below(Q2, 1, F(1, 3)), samples=0, seed=0)


# ---------------------------------------------------------------------------
# Families and scans
# ---------------------------------------------------------------------------

class TestScans:
    def test_sigma_family_all_exact(self):
        fam = sigma_family(Q2, F(1, 4))
        rows = limit_scan(fam, range(1, 6))
        assert all(r.error is None for r in rows)
        assert all(r.bounds.lower == r.bounds.upper == F(1, 4) for r in rows)

    def test_admission_rule_rows(self):
        fam = generator_family(
            Q2, {"kind": "mod-filter", "m": 2, "c": 3}, ConstRhs(F(1, 2)))
        rows = limit_scan(fam, range(1, 8))
        ok = {r.param for r in rows if r.error is None}
        bad = {r.param for r in rows if r.error is not None}
        assert ok == {1, 4, 7} and bad == {2, 3, 5, 6}
        for r in rows:
            assert (r.bounds is None) == (r.error is not None)

    def test_admitted_rows_uniform_value(self):
        # repeated position-2 deletions keep the image uniform
        fam = generator_family(
            Q2, {"kind": "const-repeat", "m": 2}, ConstRhs(F(1, 2)))
        for r in limit_scan(fam, range(1, 5)):
            assert r.bounds.lower == r.bounds.upper == F(1, 2)

    def test_custom_depth_rule(self):
        fam = sigma_family(Q2, F(1, 3))
        rows = limit_scan(fam, [2], depth_rule=lambda n: n + 4)
        assert rows[0].bounds.depth == 6

    def test_family_relation_passthrough(self):
        fam = sigma_family(Q2, F(1, 4), relation="ge")
        rows = limit_scan(fam, [1])
        assert rows[0].bounds.lower == rows[0].bounds.upper == F(3, 4)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

class TestSerialization:
    def test_round_trip_each_rhs(self):
        specs = [
            shift_below(Q2, 2, F(1, 3)),
            GKSetSpec(Q3, ShiftProgram((GEN(2), SIGMA)),
                      ProgramOnZ(ShiftProgram.identity()), relation="ge"),
            GKSetSpec(Q2, ShiftProgram.sigma_power(1),
                      ProgramOnX(ShiftProgram.sigma_power(2), F(5, 16))),
        ]
        for spec in specs:
            assert GKSetSpec.from_json(spec.to_json()) == spec

    def test_rhs_json_rejects_unknown(self):
        with pytest.raises(DomainError):
            rhs_from_json({"mystery": 1})
        with pytest.raises(DomainError):
            rhs_from_json("1/2")

    def test_relation_validated(self):
        with pytest.raises(DomainError):
            GKSetSpec(Q2, ShiftProgram.identity(), ConstRhs(F(1, 2)),
                      relation="le")

    def test_required_depth_covers_both_sides(self):
        spec = GKSetSpec(Q2, ShiftProgram.sigma_power(1),
                         ProgramOnZ(ShiftProgram((GEN(3),))))
        assert spec.required_depth == 3
