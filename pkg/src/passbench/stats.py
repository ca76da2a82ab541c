"""Hypothesis tests, corrections, usability scoring, binning, and heatmaps.

The test battery pairs a Mann-Whitney U comparison of click x-coordinates
with a Fisher exact test on a coarse two-bin split, applies Bonferroni
correction per family of five click positions, and reports effect sizes:
rank-biserial correlation for Mann-Whitney, the sample odds ratio for
Fisher, and Cohen's d for the pooled t-test.  These effect-size choices
are named explicitly in every report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.special import stdtr

from .core import ClickPoint, GraphicalPassword, InvalidInputError


class Alternative(str, Enum):
    TWO_SIDED = "two-sided"
    LESS = "less"
    GREATER = "greater"


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    effect_size: float
    method: str
    alternative: str
    n1: int
    n2: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_value <= 1.0):
            raise AssertionError(f"p-value out of range: {self.p_value}")


@dataclass(frozen=True)
class BinTable2x2:
    """2x2 contingency counts, rows = groups, columns = bins."""

    counts: tuple[tuple[int, int], tuple[int, int]]

    def __post_init__(self) -> None:
        flat = [v for row in self.counts for v in row]
        if len(flat) != 4 or any(v < 0 or v != int(v) for v in flat):
            raise InvalidInputError(f"2x2 table needs non-negative integers, got {self.counts}")
        object.__setattr__(
            self, "counts", tuple(tuple(int(v) for v in row) for row in self.counts)
        )


@dataclass(frozen=True)
class SusResponse:
    """Ten Likert answers, each 1-5, in questionnaire order."""

    answers: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "answers", tuple(self.answers))
        if len(self.answers) != 10:
            raise InvalidInputError(f"SUS needs exactly 10 answers, got {len(self.answers)}")
        if any(not (1 <= a <= 5) for a in self.answers):
            raise InvalidInputError(f"SUS answers must be 1..5, got {self.answers}")


# ---------------------------------------------------------------------------
# Mann-Whitney U
# ---------------------------------------------------------------------------

def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2 + 1  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def _exact_u_distribution(n1: int, n2: int) -> list[int]:
    """counts[u] = number of rank splits of 1..n1+n2 giving U1 = u (no ties)."""
    n = n1 + n2
    max_sum = n1 * n2 + n1 * (n1 + 1) // 2
    # counts of subsets of {1..n} of size m summing to s
    table = [[0] * (max_sum + 1) for _ in range(n1 + 1)]
    table[0][0] = 1
    for rank in range(1, n + 1):
        for m in range(min(rank, n1), 0, -1):
            row, prev = table[m], table[m - 1]
            for s in range(max_sum, rank - 1, -1):
                if prev[s - rank]:
                    row[s] += prev[s - rank]
    offset = n1 * (n1 + 1) // 2  # U1 = ranksum - offset
    return table[n1][offset:]


def mann_whitney_u(
    a: Sequence[float],
    b: Sequence[float],
    alternative: Alternative | str = Alternative.TWO_SIDED,
) -> TestResult:
    """Mann-Whitney U with midrank ties and rank-biserial effect size.

    The statistic is U of the first sample.  The p-value is exact (full
    U distribution) when n1 + n2 <= 20 and there are no ties; otherwise a
    normal approximation with tie correction and continuity correction is
    used.  ``alternative="less"`` tests that ``a`` is stochastically
    smaller than ``b``.
    """
    alternative = Alternative(alternative)
    if len(a) == 0 or len(b) == 0:
        raise InvalidInputError("Mann-Whitney requires two non-empty samples")
    n1, n2 = len(a), len(b)
    pooled = list(a) + list(b)
    ranks = _midranks(pooled)
    r1 = sum(ranks[:n1])
    u1 = r1 - n1 * (n1 + 1) / 2
    has_ties = len(set(pooled)) < len(pooled)

    if n1 + n2 <= 20 and not has_ties:
        counts = _exact_u_distribution(n1, n2)
        total = math.comb(n1 + n2, n1)
        u_int = round(u1)
        p_less = sum(counts[: u_int + 1]) / total
        p_greater = sum(counts[u_int:]) / total
        method = "mwu-exact"
    else:
        mean_u = n1 * n2 / 2
        tie_sum = 0.0
        for v in set(pooled):
            t = pooled.count(v)
            tie_sum += t ** 3 - t
        n = n1 + n2
        var_u = n1 * n2 / 12 * ((n + 1) - tie_sum / (n * (n - 1)))
        if var_u <= 0:
            # Every pooled value identical: the test carries no information.
            p_less = p_greater = 1.0
        else:
            sd = math.sqrt(var_u)
            p_less = _norm_cdf((u1 - mean_u + 0.5) / sd)
            p_greater = _norm_cdf((mean_u - u1 + 0.5) / sd)
        method = "mwu-normal"

    if alternative is Alternative.LESS:
        p = p_less
    elif alternative is Alternative.GREATER:
        p = p_greater
    else:
        p = min(1.0, 2 * min(p_less, p_greater))
    effect = 1 - 2 * u1 / (n1 * n2)  # rank-biserial correlation
    return TestResult(
        statistic=u1,
        p_value=min(1.0, p),
        effect_size=effect,
        method=method,
        alternative=alternative.value,
        n1=n1,
        n2=n2,
    )


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2))


# ---------------------------------------------------------------------------
# Fisher exact
# ---------------------------------------------------------------------------

def fisher_exact_2x2(
    t: BinTable2x2,
    alternative: Alternative | str = Alternative.TWO_SIDED,
) -> TestResult:
    """Fisher exact test on a 2x2 table; effect size is the sample odds ratio.

    Probabilities come from the hypergeometric distribution with all margins
    fixed, computed with exact integer arithmetic; the two-sided p sums every
    table whose probability does not exceed the observed one.
    """
    alternative = Alternative(alternative)
    (a, b), (c, d) = t.counts
    r1, r2 = a + b, c + d
    c1 = a + c
    n = r1 + r2
    support = range(max(0, c1 - r2), min(r1, c1) + 1)
    # integer numerators of the hypergeometric pmf (common denominator C(n, c1))
    weights = {k: math.comb(r1, k) * math.comb(r2, c1 - k) for k in support}
    total = sum(weights.values())
    if total == 0:  # empty table
        p = 1.0
    elif alternative is Alternative.LESS:
        p = sum(w for k, w in weights.items() if k <= a) / total
    elif alternative is Alternative.GREATER:
        p = sum(w for k, w in weights.items() if k >= a) / total
    else:
        observed = weights[a]
        p = sum(w for w in weights.values() if w <= observed) / total

    if b * c > 0:
        odds = (a * d) / (b * c)
    elif a * d > 0:
        odds = math.inf
    else:
        odds = math.nan  # both products zero: ratio undetermined
    return TestResult(
        statistic=odds,
        p_value=min(1.0, p),
        effect_size=odds,
        method="fisher-exact",
        alternative=alternative.value,
        n1=r1,
        n2=r2,
    )


# ---------------------------------------------------------------------------
# Bonferroni, t-test, SUS
# ---------------------------------------------------------------------------

def bonferroni(p_values: Sequence[float], m: int | None = None) -> list[float]:
    """Adjust each p to min(1, p*m); m defaults to the family size."""
    if m is None:
        m = len(p_values)
    if m < len(p_values):
        raise InvalidInputError(f"correction factor m={m} smaller than family of {len(p_values)}")
    return [min(1.0, p * m) for p in p_values]


def student_t_independent(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Two-sided pooled-variance Student t with df = n1 + n2 - 2.

    Effect size is Cohen's d (mean difference over pooled SD).
    """
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise InvalidInputError("t-test requires at least two observations per sample")
    xa, xb = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    var_a, var_b = xa.var(ddof=1), xb.var(ddof=1)
    df = n1 + n2 - 2
    pooled_var = ((n1 - 1) * var_a + (n2 - 1) * var_b) / df
    if pooled_var == 0:
        raise InvalidInputError("zero pooled variance: t statistic undefined")
    t_stat = (xa.mean() - xb.mean()) / math.sqrt(pooled_var * (1 / n1 + 1 / n2))
    p = 2 * float(stdtr(df, -abs(t_stat)))
    cohen_d = (xa.mean() - xb.mean()) / math.sqrt(pooled_var)
    return TestResult(
        statistic=float(t_stat),
        p_value=min(1.0, p),
        effect_size=float(cohen_d),
        method="t-pooled",
        alternative=Alternative.TWO_SIDED.value,
        n1=n1,
        n2=n2,
    )


def sus_score(r: SusResponse) -> float:
    """System Usability Scale: 0-100, higher is better.

    Odd-numbered answers contribute (answer - 1), even-numbered (5 - answer),
    summed and scaled by 2.5.
    """
    contributions = [
        (ans - 1) if i % 2 == 0 else (5 - ans)
        for i, ans in enumerate(r.answers)
    ]
    return sum(contributions) * 2.5


# ---------------------------------------------------------------------------
# Spatial binning and heatmaps
# ---------------------------------------------------------------------------

def bin_points(points: Iterable[ClickPoint], image_width: int) -> tuple[int, int]:
    """Count points into (left, right) halves; the midline pixel x = width/2
    belongs to the right bin."""
    half = image_width / 2
    left = right = 0
    for p in points:
        if not (0 <= p.x < image_width):
            raise InvalidInputError(f"point x={p.x} outside image width {image_width}")
        if p.x < half:
            left += 1
        else:
            right += 1
    return left, right


def make_bin_table(
    points_a: Iterable[ClickPoint],
    points_b: Iterable[ClickPoint],
    image_width: int,
) -> BinTable2x2:
    return BinTable2x2((bin_points(points_a, image_width), bin_points(points_b, image_width)))


def heatmap(
    points: Sequence[ClickPoint],
    width: int,
    height: int,
    sigma: float = 10.0,
) -> np.ndarray:
    """Render points as a grayscale density map (uint8, shape height x width).

    Each point contributes an isotropic Gaussian of standard deviation
    ``sigma`` (default equals the tolerance T); the sum is scaled so the
    hottest pixel is 255.  No points yields an all-zero map.
    """
    grid = np.zeros((height, width), dtype=float)
    if sigma <= 0:
        raise InvalidInputError(f"sigma must be positive, got {sigma}")
    radius = int(math.ceil(4 * sigma))
    offsets = np.arange(-radius, radius + 1)
    kernel_1d = np.exp(-(offsets ** 2) / (2 * sigma * sigma))
    for p in points:
        if not (0 <= p.x < width and 0 <= p.y < height):
            raise InvalidInputError(f"point {(p.x, p.y)} outside {width}x{height}")
        x_lo, x_hi = max(0, p.x - radius), min(width - 1, p.x + radius)
        y_lo, y_hi = max(0, p.y - radius), min(height - 1, p.y + radius)
        kx = kernel_1d[x_lo - p.x + radius : x_hi - p.x + radius + 1]
        ky = kernel_1d[y_lo - p.y + radius : y_hi - p.y + radius + 1]
        grid[y_lo : y_hi + 1, x_lo : x_hi + 1] += np.outer(ky, kx)
    peak = grid.max()
    if peak > 0:
        grid = grid / peak * 255.0
    return np.rint(grid).astype(np.uint8)


# ---------------------------------------------------------------------------
# Presentation-effect hypothesis suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteRow:
    """Results for the i-th click position (1-based)."""

    click_index: int
    mwu: TestResult
    mwu_adjusted_p: float
    fisher: TestResult
    fisher_adjusted_p: float
    bins_treatment: tuple[int, int]
    bins_control: tuple[int, int]


@dataclass(frozen=True)
class SuiteReport:
    treatment_label: str
    control_label: str
    image_width: int
    alternative: str
    rows: tuple[SuiteRow, ...]


def presentation_hypothesis_suite(
    control_pws: Sequence[GraphicalPassword],
    treatment_pws: Sequence[GraphicalPassword],
    image_width: int,
    *,
    alternative: Alternative | str = Alternative.TWO_SIDED,
    treatment_label: str = "treatment",
    control_label: str = "control",
) -> SuiteReport:
    """Five click-position hypotheses: MWU on x-coordinates plus Fisher on bins.

    For each click position i the treatment sample is tested against the
    control sample; exactly five tests per family, Bonferroni-adjusted with
    m = 5.  The one-sided MWU direction, when wanted, is supplied by the
    caller via ``alternative``.
    """
    if not control_pws or not treatment_pws:
        raise InvalidInputError("both corpora must be non-empty")
    alternative = Alternative(alternative)

    mwu_results = []
    fisher_results = []
    bins = []
    for i in range(5):
        xs_t = [pw.points[i].x for pw in treatment_pws]
        xs_c = [pw.points[i].x for pw in control_pws]
        mwu_results.append(mann_whitney_u(xs_t, xs_c, alternative))
        pts_t = [pw.points[i] for pw in treatment_pws]
        pts_c = [pw.points[i] for pw in control_pws]
        table = make_bin_table(pts_t, pts_c, image_width)
        fisher_results.append(fisher_exact_2x2(table, Alternative.TWO_SIDED))
        bins.append(table.counts)

    mwu_adj = bonferroni([r.p_value for r in mwu_results], m=5)
    fisher_adj = bonferroni([r.p_value for r in fisher_results], m=5)
    rows = tuple(
        SuiteRow(
            click_index=i + 1,
            mwu=mwu_results[i],
            mwu_adjusted_p=mwu_adj[i],
            fisher=fisher_results[i],
            fisher_adjusted_p=fisher_adj[i],
            bins_treatment=bins[i][0],
            bins_control=bins[i][1],
        )
        for i in range(5)
    )
    return SuiteReport(
        treatment_label=treatment_label,
        control_label=control_label,
        image_width=image_width,
        alternative=alternative.value,
        rows=rows,
    )
