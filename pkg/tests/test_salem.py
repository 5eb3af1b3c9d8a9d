"""Digit-weight series systems: evaluation, residuals, integrals, sampling."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from cantorshift import (
    DigitString,
    DomainError,
    InsufficientDepthError,
    InvalidSystemError,
    QSequence,
    Reorder,
    SalemSystem,
    ensure_valid,
    evaluate,
    emit_table,
    expand,
    integral,
    mc_mean,
    residual,
    truncated_tail,
    validate_system,
)

TOL = F(1, 10**12)


def fixed(ps, **kw):
    return SalemSystem.fixed([F(p) for p in ps], **kw)


@st.composite
def dyadics(draw, depth=10):
    return F(draw(st.integers(0, 2**depth)), 2**depth)


def _system_pool():
    # seeded rejection sampling for valid signed weight tuples
    import random

    rng = random.Random(20260823)
    pool = []
    while len(pool) < 24:
        q = rng.choice([2, 3, 4])
        ps = [F(rng.randint(-6, 12), 16) for _ in range(q - 1)]
        ps.append(1 - sum(ps))
        acc = F(0)
        ok = all(abs(p) < 1 for p in ps)
        for p in ps[:-1]:
            acc += p
            ok = ok and 0 < acc < 1
        if ok and any(p < 0 for p in ps):
            pool.append(SalemSystem.fixed(ps))
    return pool


SIGNED_SYSTEMS = _system_pool()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

class TestEvaluate:
    def test_worked_base2(self):
        s = fixed(["1/3", "2/3"])
        assert evaluate(F(1, 2), 2, s).value == F(1, 3)
        assert evaluate(F(1, 4), 2, s).value == F(1, 9)
        assert evaluate(F(3, 4), 2, s).value == F(5, 9)

    def test_endpoints_exact(self):
        for ps in (["1/3", "2/3"], ["7/10", "-1/5", "1/2"]):
            s = fixed(ps)
            for r in (evaluate(F(0), s.q, s), evaluate(F(1), s.q, s)):
                assert r.error_bound == 0
            assert evaluate(F(0), s.q, s).value == 0
            assert evaluate(F(1), s.q, s).value == 1

    def test_uniform_weights_give_identity(self):
        for q in (2, 3, 5):
            s = fixed([F(1, q)] * q)
            for num in range(0, q**3 + 1):
                x = F(num, q**3)
                r = evaluate(x, q, s)
                assert r.value == x and r.error_bound == 0

    def test_zero_and_max_tails_agree(self):
        # same point, both exact digit representations
        s = fixed(["1/3", "2/3"])
        q = QSequence.constant(2)
        zero_form = expand(F(1, 2), q, 8)
        max_form = DigitString(q, (0,), __import__("cantorshift").MAX_TAIL)
        a = evaluate(zero_form, 2, s)
        b = evaluate(max_form, 2, s)
        assert a.value == b.value == F(1, 3)
        assert a.error_bound == b.error_bound == 0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**10 - 1))
    def test_exact_on_terminating_points(self, num):
        x = F(num, 2**10)  # x < 1 so the greedy expansion has a zero tail
        s = fixed(["1/3", "2/3"])
        r = evaluate(x, 2, s)
        assert r.error_bound == 0
        # independent oracle: direct finite sum over the digits
        d = expand(x, QSequence.constant(2), 12)
        acc, prod = F(0), F(1)
        for e in d.prefix:
            acc += prod * (F(1, 3) if e == 1 else F(0))
            prod *= F(1, 3) if e == 0 else F(2, 3)
        assert r.value == acc

    def test_periodic_point_bounded_error(self):
        s = fixed(["1/3", "2/3"])
        r = evaluate(F(1, 3), 2, s, tol=TOL)
        assert r.error_bound <= TOL
        assert abs(r.value - F(1, 7)) <= TOL

    def test_monotone_for_positive_weights(self):
        s = fixed(["1/4", "3/4"])
        grid = [F(k, 32) for k in range(33)]
        vals = [evaluate(x, 2, s).value for x in grid]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from(SIGNED_SYSTEMS), st.integers(0, 81))
    def test_error_bound_respected(self, s, num):
        x = F(num, 81)
        r = evaluate(x, s.q, s, tol=TOL)
        assert r.error_bound <= TOL

    def test_refuses_wrong_alphabet(self):
        s = fixed(["1/3", "2/3"])
        with pytest.raises(DomainError):
            evaluate(F(1, 2), 3, s)

    def test_refuses_truncated_without_depth(self):
        s = fixed(["1/3", "2/3"])
        d = DigitString(QSequence.constant(2), (1, 0), truncated_tail(2))
        with pytest.raises(InsufficientDepthError):
            evaluate(d, 2, s, tol=TOL)

    def test_invalid_system_raises_on_use(self):
        s = fixed(["2/3", "2/3", "-1/3"])  # partial sums leave (0,1)? 2/3, 4/3
        with pytest.raises(InvalidSystemError):
            evaluate(F(1, 2), 3, s)


# ---------------------------------------------------------------------------
# Residuals of the defining relations
# ---------------------------------------------------------------------------

class TestResidual:
    def test_zero_on_terminating_points(self):
        s = fixed(["1/3", "2/3"])
        for num in range(0, 17):
            x = F(num, 16)
            for k in (1, 2, 3):
                assert residual(x, 2, s, k) == 0

    def test_bounded_on_periodic_points(self):
        s = fixed(["7/10", "-1/5", "1/2"])
        for x in (F(1, 7), F(2, 11), F(5, 13)):
            for k in (1, 2):
                assert abs(residual(x, 3, s, k, tol=TOL)) <= 2 * TOL

    def test_reordered_system_residual(self):
        s = fixed(["1/3", "2/3"], reorder=Reorder("rule", name="swap-pairs"))
        for num in range(0, 17):
            for k in (1, 2, 3):
                assert residual(F(num, 16), 2, s, k) == 0


# ---------------------------------------------------------------------------
# Reorders and finite systems
# ---------------------------------------------------------------------------

class TestReorders:
    def test_swap_pairs_worked_value(self):
        s = fixed(["1/3", "2/3"], reorder=Reorder("rule", name="swap-pairs"))
        # digits of 1/2 are (1, 0, 0, ...); reading order swaps adjacent pairs,
        # so the first term uses digit at position 2, the second position 1
        r = evaluate(F(1, 2), 2, s)
        assert r.value == F(1, 9) and r.error_bound == 0

    def test_list_reorder_is_finite_sum(self):
        s = fixed(["1/3", "2/3"], reorder=Reorder("list", values=(2, 1)))
        r = evaluate(F(1, 2), 2, s)
        # stage 1 reads position 2 (digit 0): term 0, carry p_0 = 1/3;
        # stage 2 reads position 1 (digit 1): term (1/3) * beta_1 = 1/9
        assert r.value == F(1, 9)
        assert r.error_bound == 0
        assert r.terms == 2

    def test_strict_schedule_rejects_gaps(self):
        # [3, 1] skips position 2, so it is not a permutation prefix
        s = fixed(["1/3", "2/3"], reorder=Reorder("list", values=(3, 1)))
        with pytest.raises(InvalidSystemError):
            evaluate(F(1, 2), 2, s)
        lax = fixed(["1/3", "2/3"], reorder=Reorder("list", values=(3, 1)),
                    strict_reorder=False)
        r = evaluate(F(1, 2), 2, lax)
        assert r.error_bound == 0 and r.terms == 2  # finite stages, exact
        # digits of 1/2 are (1, 0, 0, ...): positions 3 then 1 give 0, then 1
        assert r.value == F(1, 3) * F(1, 3)

    def test_matrix_system_worked(self):
        cols = [[F(1, 3), F(2, 3)], [F(1, 2), F(1, 2)]]
        s = SalemSystem.matrix(cols)
        r = evaluate(F(1, 4), 2, s)
        # digits (0, 1): term1 = beta_0^{(1)} = 0? no: digit 0 -> beta 0;
        # term2 = p^{(1)}_0 * beta^{(2)}_1 = 1/3 * 1/2 = 1/6
        assert r.value == F(1, 6)
        assert r.error_bound == 0

    def test_matrix_requires_identity_reorder(self):
        s = SalemSystem(columns=((F(1, 2), F(1, 2)),),
                        reorder=Reorder("rule", name="swap-pairs"))
        with pytest.raises(InvalidSystemError) as e:
            ensure_valid(s)
        assert e.value.report.violation.condition == "reorder"

    def test_strict_list_must_be_injective(self):
        s = fixed(["1/2", "1/2"], reorder=Reorder("list", values=(1, 1)))
        rep = validate_system(s)
        assert not rep.ok and rep.violation.condition == "reorder"
        lax = fixed(["1/2", "1/2"], reorder=Reorder("list", values=(1, 1)),
                    strict_reorder=False)
        assert validate_system(lax).ok


# ---------------------------------------------------------------------------
# Validation table
# ---------------------------------------------------------------------------

class TestValidation:
    def test_each_condition_fires(self):
        cases = [
            (SalemSystem.matrix([[F(1, 2), F(1, 2)], [F(1, 3), F(1, 3), F(1, 3)]]),
             "alphabet"),
            (fixed(["3/2", "-1/2"]), "coefficient-range"),
            (fixed(["1/3", "1/3"]), "column-sum"),
            (fixed(["-1/4", "3/4", "1/2"]), "partial-sum-range"),
        ]
        for system, cond in cases:
            rep = validate_system(system)
            assert not rep.ok
            assert rep.violation.condition == cond

    def test_valid_systems_pass(self):
        for ps in (["1/2", "1/2"], ["1/3", "2/3"], ["7/10", "-1/5", "1/2"]):
            assert validate_system(fixed(ps)).ok

    def test_invalid_system_error_carries_report(self):
        with pytest.raises(InvalidSystemError) as e:
            ensure_valid(fixed(["1/3", "1/3"]))
        assert e.value.report.violation.condition == "column-sum"


# ---------------------------------------------------------------------------
# Integrals and sampling
# ---------------------------------------------------------------------------

class TestIntegral:
    def test_uniform(self):
        assert integral(fixed(["1/2", "1/2"])) == F(1, 2)

    def test_worked_values(self):
        assert integral(fixed(["1/3", "2/3"])) == F(1, 3)
        assert integral(fixed(["7/10", "-1/5", "1/2"])) == F(3, 5)

    def test_general_formula(self):
        # independent oracle: mean of the first stock of terms under the
        # uniform digit distribution, geometric in the stage index
        for ps in (["1/4", "3/4"], ["1/5", "1/2", "3/10"]):
            s = fixed(ps)
            q = s.q
            betas = s.beta_row(1)
            mean_beta = sum(betas) / q
            mean_p = sum(s.p_row(1)) / q  # == F(1, q) since columns sum to 1
            assert mean_p == F(1, q)
            expected = mean_beta / (1 - mean_p)
            assert integral(s) == expected

    def test_finite_system_integral(self):
        cols = [[F(1, 3), F(2, 3)], [F(1, 2), F(1, 2)]]
        s = SalemSystem.matrix(cols)
        # two stages: E = (0 + 1/3)/2 + (1/2)*(0 + 1/2)/2 ... weighted by mean p
        b1 = sum(s.beta_row(1)) / 2
        b2 = sum(s.beta_row(2)) / 2
        assert integral(s) == b1 + F(1, 2) * b2

    def test_mc_matches_integral(self):
        s = fixed(["1/3", "2/3"])
        r = mc_mean(s, samples=40000, seed=7)
        assert abs(r.mean - float(F(1, 3))) <= 4 * r.std_err

    def test_mc_deterministic(self):
        s = fixed(["1/4", "3/4"])
        a = mc_mean(s, samples=5000, seed=11)
        b = mc_mean(s, samples=5000, seed=11)
        assert a.mean == b.mean and a.std_err == b.std_err

    def test_mc_signed_system(self):
        s = fixed(["7/10", "-1/5", "1/2"])
        r = mc_mean(s, samples=60000, seed=3)
        assert abs(r.mean - 0.6) <= 4 * r.std_err


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

class TestTables:
    def test_grid_table(self):
        s = fixed(["1/3", "2/3"])
        rows = emit_table(s, 5)
        assert [row.x for row in rows] == [F(0), F(1, 4), F(1, 2), F(3, 4), F(1)]
        assert [row.value for row in rows] == [F(0), F(1, 9), F(1, 3), F(5, 9), F(1)]
        assert all(row.error_bound == 0 for row in rows)

    def test_explicit_points(self):
        s = fixed(["1/4", "3/4"])
        rows = emit_table(s, [F(1, 3)], tol=TOL)
        assert len(rows) == 1 and rows[0].error_bound <= TOL

    def test_monotone_on_grid(self):
        s = fixed(["2/5", "3/5"])
        rows = emit_table(s, 16)
        vals = [r.value for r in rows]
        assert vals == sorted(vals) and len(set(vals)) == len(vals)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

class TestSerialization:
    def test_fixed_round_trip(self):
        s = fixed(["7/10", "-1/5", "1/2"], horizon=48)
        j = s.to_json()
        assert j["q"] == 3 and j["p"] == ["7/10", "-1/5", "1/2"]
        assert SalemSystem.from_json(j) == s

    def test_matrix_round_trip(self):
        s = SalemSystem.matrix([[F(1, 3), F(2, 3)], [F(1, 2), F(1, 2)]])
        j = s.to_json()
        assert "columns" in j
        assert SalemSystem.from_json(j) == s

    def test_reorder_round_trip(self):
        for r in (Reorder(), Reorder("rule", name="swap-pairs"),
                  Reorder("list", values=(2, 1, 3))):
            s = fixed(["1/2", "1/2"], reorder=r)
            assert SalemSystem.from_json(s.to_json()) == s

    def test_strict_flag_round_trip(self):
        s = fixed(["1/2", "1/2"], reorder=Reorder("list", values=(1, 1)),
                  strict_reorder=False)
        j = s.to_json()
        assert j["strict-reorder"] is False
        assert SalemSystem.from_json(j) == s

    def test_declared_q_checked(self):
        with pytest.raises(DomainError):
            SalemSystem.from_json({"q": 3, "p": ["1/2", "1/2"]})
