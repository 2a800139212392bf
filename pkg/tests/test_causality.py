import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nsbox.boxes import CorrelationTable, chsh
from nsbox.causality import (
    TSIRELSON_BOUND,
    budget_from_couplings,
    budget_from_table,
    budget_identity_residual,
    causality_condition,
    critical_c_scalar,
    flip_bob_labels,
    frontier_scan,
    orient_for_bounds,
    tsirelson_check,
    variance_lower_bound_a,
    variance_lower_bound_ap,
    vector_addition_model,
)
from nsbox.coupling import (
    Combination,
    coupling_bounds,
    extremal_coupling,
    CouplingObjective,
    make_scalar_extremal_couplings,
    per_pair_variance,
)
from nsbox.macro import NoiseModel, sample_batches

Q = math.sqrt(2.0) / 2.0
PR_TABLE = CorrelationTable(1, 1, 1, -1)
QUANTUM_TABLE = CorrelationTable(Q, Q, Q, -Q)
ZERO_TABLE = CorrelationTable(0, 0, 0, 0)


def corr_values():
    return st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


def tables():
    return st.builds(CorrelationTable, corr_values(), corr_values(), corr_values(), corr_values())


class TestLowerBounds:
    def test_pr_examples(self):
        assert variance_lower_bound_a(PR_TABLE, 4) == 1.0
        assert variance_lower_bound_ap(PR_TABLE, 4) == 1.0

    def test_zero_table(self):
        assert variance_lower_bound_a(ZERO_TABLE, 7) == 0.0
        assert variance_lower_bound_ap(ZERO_TABLE, 7) == 0.0

    def test_quantum_table(self):
        assert variance_lower_bound_a(QUANTUM_TABLE, 1) == pytest.approx(math.sqrt(2), abs=1e-12)
        assert variance_lower_bound_ap(QUANTUM_TABLE, 1) == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_bad_n(self):
        with pytest.raises(ValueError):
            variance_lower_bound_a(PR_TABLE, 0)


class TestCausalityCondition:
    def test_pr_violates(self):
        check = causality_condition(PR_TABLE)
        assert not check.ok
        assert check.lhs == 8.0
        assert check.margin == -4.0

    def test_quantum_saturates(self):
        check = causality_condition(QUANTUM_TABLE)
        assert check.ok
        assert check.margin == pytest.approx(0.0, abs=1e-12)

    def test_tilted_half(self):
        check = causality_condition(CorrelationTable(0.5, 0.5, 0.5, -0.5))
        assert check.ok
        assert check.margin == pytest.approx(2.0, abs=1e-12)


class TestTsirelson:
    def test_quantum_inside_with_equality(self):
        assert tsirelson_check(QUANTUM_TABLE)
        assert abs(chsh(QUANTUM_TABLE)) == pytest.approx(TSIRELSON_BOUND, abs=1e-12)

    def test_pr_outside(self):
        assert not tsirelson_check(PR_TABLE)

    def test_tilted_seventy(self):
        assert tsirelson_check(CorrelationTable(0.7, 0.7, 0.7, -0.7))

    @given(tables())
    def test_causality_implies_tsirelson(self, table):
        if causality_condition(table).ok:
            assert tsirelson_check(table)

    def test_witness_tsirelson_without_causality(self):
        witness = CorrelationTable(1.0, 1.0, 0.2, -0.2)
        assert tsirelson_check(witness)
        assert not causality_condition(witness).ok

    def test_random_scan_finds_witness(self):
        rng = np.random.default_rng(8)
        tables_ = rng.uniform(-1, 1, size=(100_000, 4))
        x = tables_[:, 0] + tables_[:, 1]
        y = tables_[:, 2] - tables_[:, 3]
        lhs = x**2 + y**2
        s = np.abs(x + y)
        causal = lhs <= 4.0 + 1e-12
        within = s <= TSIRELSON_BOUND + 1e-12
        assert not np.any(causal & ~within)
        assert np.any(within & ~causal)


class TestFlip:
    def test_pr_flip(self):
        assert flip_bob_labels(PR_TABLE).as_tuple() == (1, 1, -1, 1)

    def test_symmetric_family(self):
        flipped = flip_bob_labels(CorrelationTable(0.4, 0.4, 0.4, -0.4))
        assert flipped.as_tuple() == (0.4, 0.4, -0.4, 0.4)

    @given(tables())
    def test_involution(self, table):
        assert flip_bob_labels(flip_bob_labels(table)) == table

    @given(tables())
    def test_lhs_invariant_under_flip(self, table):
        before = causality_condition(table).lhs
        after = causality_condition(flip_bob_labels(table)).lhs
        assert after == pytest.approx(before, rel=1e-12, abs=1e-12)

    @given(tables())
    def test_lhs_invariant_under_global_negation(self, table):
        negated = CorrelationTable(*(-v for v in table.as_tuple()))
        assert causality_condition(negated).lhs == pytest.approx(
            causality_condition(table).lhs, rel=1e-12, abs=1e-12
        )

    @given(tables())
    def test_orientation_makes_terms_nonnegative(self, table):
        oriented = orient_for_bounds(table)
        assert oriented.c_ab + oriented.c_abp >= 0
        assert oriented.c_apb - oriented.c_apbp >= 0
        assert causality_condition(oriented).lhs == pytest.approx(
            causality_condition(table).lhs, rel=1e-12, abs=1e-12
        )
        vector_addition_model(oriented)  # always constructible once oriented


class TestScalarCritical:
    def test_exact_half(self):
        assert critical_c_scalar() == 0.5

    def test_variances_match_at_half(self):
        c = critical_c_scalar()
        assert coupling_bounds(c, c).min_var_sum == pytest.approx(2.0, abs=1e-12)
        assert coupling_bounds(c, -c).max_var_sum == pytest.approx(2.0, abs=1e-12)

    def test_below_quantum_value(self):
        assert critical_c_scalar() < Q


class TestVectorModel:
    def test_quantum_saturation(self):
        model = vector_addition_model(QUANTUM_TABLE)
        assert model.c_magnitude == pytest.approx(math.sqrt(2), abs=1e-12)
        assert model.cp_magnitude == pytest.approx(math.sqrt(2), abs=1e-12)
        budget = budget_from_table(QUANTUM_TABLE, 5)
        assert budget.residual == pytest.approx(0.0, abs=1e-12)

    def test_zero_table(self):
        model = vector_addition_model(ZERO_TABLE)
        assert model.c_values == (0.0, 0.0)
        assert model.cp_values == (0.0, 0.0)

    def test_equality_with_bounds(self):
        table = CorrelationTable(0.6, 0.3, 0.8, -0.1)
        model = vector_addition_model(table)
        for n in (1, 4, 100):
            assert model.implied_delta_a_sum(n) == pytest.approx(
                variance_lower_bound_a(table, n), abs=1e-12
            )
            assert model.implied_delta_ap_diff(n) == pytest.approx(
                variance_lower_bound_ap(table, n), abs=1e-12
            )

    def test_misoriented_rejected(self):
        with pytest.raises(ValueError):
            vector_addition_model(CorrelationTable(1.0, 1.0, -1.0, 1.0))
        vector_addition_model(orient_for_bounds(CorrelationTable(1.0, 1.0, -1.0, 1.0)))

    def test_scalar_values_force_local_correlations(self):
        # if c and c' are confined to {0, +/-2}, the causality disc admits
        # only (x, y) with x + y <= 2: equality in both bounds means locality
        feasible = [
            (x, y)
            for x in (0.0, 2.0)
            for y in (0.0, 2.0)
            if causality_condition(
                CorrelationTable(x / 2, x / 2, y / 2, -y / 2)
            ).ok
        ]
        assert max(x + y for x, y in feasible) == 2.0


class TestBudgets:
    def test_identity_for_every_lp_coupling(self):
        for c in np.linspace(0, 1, 11):
            for targets in [(c, c), (c, -c)]:
                for obj in CouplingObjective:
                    k = extremal_coupling(*targets, obj)
                    assert budget_identity_residual(k, 10) <= 1e-12 / 10

    def test_scalar_budget_within_iff_below_half(self):
        for c, expected in [(0.25, True), (0.5, True), (0.75, False), (1.0, False)]:
            k_a, k_ap = make_scalar_extremal_couplings(c)
            assert budget_from_couplings(k_a, k_ap, 8).within() is expected

    def test_pr_budget_composition(self):
        k_a, k_ap = make_scalar_extremal_couplings(1.0)
        budget = budget_from_couplings(k_a, k_ap, 4)
        assert budget.delta_a_sum_sq == pytest.approx(1.0, abs=1e-12)  # 4/N
        assert budget.delta_ap_diff_sq == pytest.approx(1.0, abs=1e-12)
        assert budget.total == 1.0

    def test_monte_carlo_spread_respects_lower_bound(self):
        # simulated Delta_a(B+B') >= [C(a,b)+C(a,b')]/sqrt(N) - 3 SE
        n_pairs, reps = 16, 100_000
        for c in (0.25, 0.5, Q, 1.0):
            k_a, _ = make_scalar_extremal_couplings(c)
            arrays = sample_batches(k_a, n_pairs, reps, NoiseModel(0.0), seed=31)
            total = arrays.b_mean + arrays.bp_mean
            sample_var = float(np.var(total, ddof=1))
            m = total - total.mean()
            se_var = math.sqrt((np.mean(m**4) - np.mean(m**2) ** 2) / reps)
            table = CorrelationTable(c, c, c, -c)
            bound_sq = variance_lower_bound_a(table, n_pairs) ** 2
            assert sample_var >= bound_sq - 3 * se_var
            # and the realized value matches the coupling's own prediction
            predicted = per_pair_variance(k_a, Combination.SUM) / n_pairs
            assert sample_var == pytest.approx(predicted, abs=5 * se_var)


class TestFrontier:
    def test_general_scan_reaches_tsirelson(self):
        report = frontier_scan(10_001)
        assert report.max_chsh == pytest.approx(TSIRELSON_BOUND, abs=1e-6)
        assert report.argmax_table.c_ab == pytest.approx(math.sqrt(2) / 2, abs=1e-6)
        assert report.argmax_table.c_apb == pytest.approx(math.sqrt(2) / 2, abs=1e-6)

    def test_symmetric_scan_finds_quantum_point(self):
        report = frontier_scan(10_001, symmetric=True)
        assert report.critical_c == pytest.approx(Q, abs=1e-6)
        assert report.max_chsh == pytest.approx(TSIRELSON_BOUND, abs=1e-6)

    def test_relaxed_constraint_reaches_pr(self):
        report = frontier_scan(10_001, rhs=8.0)
        assert report.max_chsh == pytest.approx(4.0, abs=1e-6)

    def test_scan_respects_constraint(self):
        report = frontier_scan(2_001)
        assert causality_condition(report.argmax_table).lhs <= 4.0 + 1e-9

    def test_resolution_precondition(self):
        with pytest.raises(ValueError):
            frontier_scan(5)
