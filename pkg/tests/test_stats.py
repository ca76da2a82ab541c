import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from passbench.core import ClickPoint, GraphicalPassword, InvalidInputError
from passbench.stats import (
    Alternative,
    BinTable2x2,
    SusResponse,
    bin_points,
    bonferroni,
    fisher_exact_2x2,
    heatmap,
    make_bin_table,
    mann_whitney_u,
    presentation_hypothesis_suite,
    student_t_independent,
    sus_score,
)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def mwu_exact_oracle(a, b, alternative):
    """Tail probabilities from the full permutation distribution of U,
    computed by direct pair counting over every rank split."""
    n1, n2 = len(a), len(b)
    pooled = sorted(a + b)

    def u_of(subset):
        rest = list(pooled)
        chosen = []
        for i in subset:
            chosen.append(pooled[i])
        for i in sorted(subset, reverse=True):
            rest.pop(i)
        return sum(1 for x in chosen for y in rest if x > y)

    u_obs = sum(1 for x in a for y in b if x > y)
    us = [u_of(s) for s in itertools.combinations(range(n1 + n2), n1)]
    total = len(us)
    p_less = sum(1 for u in us if u <= u_obs) / total
    p_greater = sum(1 for u in us if u >= u_obs) / total
    if alternative == "less":
        return p_less
    if alternative == "greater":
        return p_greater
    return min(1.0, 2 * min(p_less, p_greater))


def fisher_oracle(table, alternative):
    """Hypergeometric enumeration with exact rational arithmetic."""
    (a, b), (c, d) = table
    r1, r2, c1 = a + b, c + d, a + c
    n = r1 + r2
    denom = math.comb(n, c1)
    support = range(max(0, c1 - r2), min(r1, c1) + 1)
    pmf = {k: Fraction(math.comb(r1, k) * math.comb(r2, c1 - k), denom) for k in support}
    if alternative == "less":
        p = sum(v for k, v in pmf.items() if k <= a)
    elif alternative == "greater":
        p = sum(v for k, v in pmf.items() if k >= a)
    else:
        obs = pmf[a]
        p = sum(v for v in pmf.values() if v <= obs)
    return float(min(p, Fraction(1)))


# ---------------------------------------------------------------------------
# Mann-Whitney U
# ---------------------------------------------------------------------------

class TestMannWhitney:
    def test_identical_samples_p1_r0(self):
        res = mann_whitney_u([3, 1, 4, 1, 5], [3, 1, 4, 1, 5])
        assert res.method == "mwu-normal"  # ties force the approximation path
        assert res.p_value == 1.0
        assert res.effect_size == 0.0

    def test_spec_example_one_sixth(self):
        res = mann_whitney_u([1, 2], [3, 4], "less")
        assert res.method == "mwu-exact"
        assert res.p_value == pytest.approx(1 / 6, abs=1e-15)

    @pytest.mark.parametrize("n1", [1, 2, 3, 4, 5, 6])
    @pytest.mark.parametrize("n2", [1, 2, 3, 4, 5, 6])
    def test_exact_path_matches_permutation_oracle(self, n1, n2):
        rng = np.random.default_rng(n1 * 10 + n2)
        for _ in range(3):
            pool = rng.permutation(np.arange(1.0, n1 + n2 + 1))  # distinct values
            a, b = list(pool[:n1]), list(pool[n1:])
            for alt in ("less", "greater", "two-sided"):
                res = mann_whitney_u(a, b, alt)
                assert res.method == "mwu-exact"
                assert res.p_value == pytest.approx(mwu_exact_oracle(a, b, alt), abs=1e-12)

    def test_large_sample_against_scipy(self):
        rng = np.random.default_rng(1)
        a = list(rng.normal(0, 1, 30))
        b = list(rng.normal(0.5, 1, 25))
        res = mann_whitney_u(a, b, "two-sided")
        assert res.method == "mwu-normal"
        ref = scipy.stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic")
        assert res.statistic == pytest.approx(ref.statistic)
        assert res.p_value == pytest.approx(ref.pvalue, rel=1e-9)

    def test_tied_sample_against_scipy(self):
        a = [1, 2, 2, 3, 5, 5, 7] * 2
        b = [2, 3, 3, 4, 5, 8] * 2
        res = mann_whitney_u(a, b, "greater")
        ref = scipy.stats.mannwhitneyu(a, b, alternative="greater", method="asymptotic")
        assert res.p_value == pytest.approx(ref.pvalue, rel=1e-9)

    def test_effect_size_rank_biserial(self):
        res = mann_whitney_u([1, 2], [3, 4])
        assert res.effect_size == 1.0  # U = 0: a entirely below b
        res = mann_whitney_u([3, 4], [1, 2])
        assert res.effect_size == -1.0

    def test_empty_sample_rejected(self):
        with pytest.raises(InvalidInputError):
            mann_whitney_u([], [1, 2])

    def test_constant_pooled_values(self):
        res = mann_whitney_u([5, 5, 5], [5, 5])
        assert res.p_value == 1.0


# ---------------------------------------------------------------------------
# Fisher exact
# ---------------------------------------------------------------------------

class TestFisher:
    def test_empty_column_p1(self):
        res = fisher_exact_2x2(BinTable2x2(((0, 7), (0, 9))))
        assert res.p_value == 1.0

    def test_spec_example(self):
        res = fisher_exact_2x2(BinTable2x2(((1, 9), (11, 3))))
        assert res.p_value == pytest.approx(0.0027594561852200836, rel=1e-12)

    def test_zero_cell_odds_ratio_inf(self):
        res = fisher_exact_2x2(BinTable2x2(((5, 0), (2, 3))))
        assert res.effect_size == math.inf
        assert 0 <= res.p_value <= 1

    @pytest.mark.parametrize("alt", ["two-sided", "less", "greater"])
    def test_random_tables_match_oracle_and_scipy(self, alt):
        rng = np.random.default_rng(11)
        for _ in range(60):
            table = tuple(
                tuple(int(v) for v in rng.integers(0, 16, size=2)) for _ in range(2)
            )
            res = fisher_exact_2x2(BinTable2x2(table), alt)
            assert res.p_value == pytest.approx(fisher_oracle(table, alt), abs=1e-12)
            ref = scipy.stats.fisher_exact(table, alternative=alt)
            assert res.p_value == pytest.approx(ref.pvalue, rel=1e-9)

    def test_negative_counts_rejected(self):
        with pytest.raises(InvalidInputError):
            BinTable2x2(((1, -1), (2, 3)))


# ---------------------------------------------------------------------------
# Bonferroni, t, SUS
# ---------------------------------------------------------------------------

class TestBonferroni:
    def test_spec_value(self):
        assert bonferroni([0.019], m=5) == [0.095]

    def test_clamped(self):
        assert bonferroni([0.5], m=5) == [1.0]

    def test_zero(self):
        assert bonferroni([0.0], m=7) == [0.0]

    def test_m_defaults_to_length(self):
        assert bonferroni([0.01, 0.02]) == [0.02, 0.04]

    def test_m_too_small_rejected(self):
        with pytest.raises(InvalidInputError):
            bonferroni([0.1, 0.2, 0.3], m=2)


class TestStudentT:
    def test_identical_samples(self):
        res = student_t_independent([1, 2, 3], [1, 2, 3])
        assert res.statistic == 0.0
        assert res.p_value == 1.0

    def test_textbook_pair(self):
        res = student_t_independent([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
        assert res.statistic == pytest.approx(-1.0, abs=1e-12)
        assert res.n1 + res.n2 - 2 == 8
        ref = scipy.stats.ttest_ind([1, 2, 3, 4, 5], [2, 3, 4, 5, 6], equal_var=True)
        assert res.p_value == pytest.approx(ref.pvalue, rel=1e-9)

    def test_df_98_shape(self):
        rng = np.random.default_rng(5)
        a, b = list(rng.normal(70, 15, 39)), list(rng.normal(72, 16, 61))
        res = student_t_independent(a, b)
        assert res.n1 + res.n2 - 2 == 98
        ref = scipy.stats.ttest_ind(a, b, equal_var=True)
        assert res.statistic == pytest.approx(ref.statistic, rel=1e-9)
        assert res.p_value == pytest.approx(ref.pvalue, rel=1e-9)

    def test_zero_variance_rejected(self):
        with pytest.raises(InvalidInputError):
            student_t_independent([2, 2, 2], [2, 2])

    def test_small_samples_rejected(self):
        with pytest.raises(InvalidInputError):
            student_t_independent([1], [2, 3])


class TestSus:
    def test_maximum(self):
        answers = tuple(5 if i % 2 == 0 else 1 for i in range(10))
        assert sus_score(SusResponse(answers)) == 100.0

    def test_midpoint(self):
        assert sus_score(SusResponse((3,) * 10)) == 50.0

    def test_minimum(self):
        answers = tuple(1 if i % 2 == 0 else 5 for i in range(10))
        assert sus_score(SusResponse(answers)) == 0.0

    def test_out_of_range_rejected(self):
        with pytest.raises(InvalidInputError):
            SusResponse((0,) + (3,) * 9)
        with pytest.raises(InvalidInputError):
            SusResponse((3,) * 9)

    @given(st.tuples(*[st.integers(1, 5)] * 10))
    @settings(max_examples=200)
    def test_affine_lattice_and_monotonicity(self, answers):
        score = sus_score(SusResponse(answers))
        assert 0.0 <= score <= 100.0
        assert score % 2.5 == 0.0
        for i in range(10):
            if answers[i] < 5:
                bumped = list(answers)
                bumped[i] += 1
                bumped_score = sus_score(SusResponse(tuple(bumped)))
                if i % 2 == 0:  # odd-numbered question: higher is better
                    assert bumped_score == score + 2.5
                else:
                    assert bumped_score == score - 2.5


# ---------------------------------------------------------------------------
# Binning and heatmap
# ---------------------------------------------------------------------------

class TestBinning:
    def test_boundary_rule(self):
        left, right = bin_points([ClickPoint(319, 0), ClickPoint(320, 0)], 640)
        assert (left, right) == (1, 1)

    def test_all_left(self):
        counts = bin_points([ClickPoint(0, y) for y in range(5)], 640)
        assert counts == (5, 0)

    def test_sum_preserved_random(self):
        rng = np.random.default_rng(2)
        pts = [ClickPoint(int(x), 0) for x in rng.integers(0, 640, size=400)]
        left, right = bin_points(pts, 640)
        assert left + right == 400
        # uniform split sanity: within 4 sigma of 200
        assert abs(left - 200) < 4 * math.sqrt(400 * 0.25)

    def test_out_of_width_rejected(self):
        with pytest.raises(InvalidInputError):
            bin_points([ClickPoint(640, 0)], 640)


class TestHeatmap:
    def test_empty_is_all_zero(self):
        grid = heatmap([], 50, 40)
        assert grid.shape == (40, 50)
        assert grid.max() == 0

    def test_single_point_peak_and_decay(self):
        grid = heatmap([ClickPoint(25, 20)], 50, 40, sigma=5)
        assert grid[20, 25] == 255
        assert grid.argmax() == 20 * 50 + 25
        row = grid[20, 25:].astype(int)
        assert all(a >= b for a, b in zip(row, row[1:]))

    def test_two_distant_points_equal_maxima(self):
        grid = heatmap([ClickPoint(30, 64), ClickPoint(290, 64)], 320, 128, sigma=8)
        assert grid[64, 30] == 255 and grid[64, 290] == 255

    def test_mass_within_3_sigma(self):
        sigma = 10.0
        grid = heatmap([ClickPoint(100, 100)], 200, 200, sigma=sigma).astype(float)
        ys, xs = np.mgrid[0:200, 0:200]
        inside = (xs - 100) ** 2 + (ys - 100) ** 2 <= (3 * sigma) ** 2
        assert grid[inside].sum() / grid.sum() >= 0.98

    def test_permutation_invariance(self):
        pts = [ClickPoint(5, 5), ClickPoint(20, 17), ClickPoint(33, 2)]
        a = heatmap(pts, 40, 30, sigma=4)
        b = heatmap(list(reversed(pts)), 40, 30, sigma=4)
        assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# Presentation-effect suite
# ---------------------------------------------------------------------------

def make_corpus(rng, n, shift=0):
    pws = []
    for _ in range(n):
        pts = tuple(
            ClickPoint(int(min(639, x + shift)), int(y))
            for x, y in zip(rng.integers(0, 440, size=5), rng.integers(0, 480, size=5))
        )
        pws.append(GraphicalPassword("img", pts))
    return pws


class TestSuite:
    def test_identical_corpora_all_adjusted_p_1(self):
        rng = np.random.default_rng(8)
        corpus = make_corpus(rng, 30)
        report = presentation_hypothesis_suite(corpus, corpus, 640)
        assert len(report.rows) == 5
        for row in report.rows:
            assert row.mwu_adjusted_p == 1.0
            assert row.fisher_adjusted_p == 1.0

    def test_shifted_treatment_detected(self):
        rng = np.random.default_rng(9)
        control = make_corpus(rng, 50)
        treatment = make_corpus(rng, 50, shift=200)
        report = presentation_hypothesis_suite(control, treatment, 640)
        for row in report.rows:
            assert row.mwu_adjusted_p < 0.01

    def test_exactly_five_tests_per_family(self):
        rng = np.random.default_rng(10)
        report = presentation_hypothesis_suite(make_corpus(rng, 10), make_corpus(rng, 12), 640)
        assert len(report.rows) == 5
        assert [r.click_index for r in report.rows] == [1, 2, 3, 4, 5]

    def test_empty_corpus_rejected(self):
        rng = np.random.default_rng(12)
        with pytest.raises(InvalidInputError):
            presentation_hypothesis_suite([], make_corpus(rng, 5), 640)

    def test_bin_table_rows(self):
        rng = np.random.default_rng(13)
        t, c = make_corpus(rng, 7), make_corpus(rng, 9)
        report = presentation_hypothesis_suite(c, t, 640)
        for row in report.rows:
            assert sum(row.bins_treatment) == 7
            assert sum(row.bins_control) == 9
