"""LINE, DIAG, and LOD click-order attacks over the guess alphabet.

Each family accepts 5-point sequences of alphabet centres that match a
geometric pattern, relaxed by tau pixels per step:

* LINE: one axis is monotone while the other stays within tau per step
  (a horizontal or vertical line, bent by at most tau between clicks).
* DIAG: both axes are tau-monotone (consistent horizontal and vertical
  directions; includes every LINE sequence).
* LOD: every step's length is at most lod_base + tau (Chebyshev by
  default, matching the square tolerance geometry; Euclidean optional).

"tau-monotone" is per-step and existential over direction: a coordinate
sequence qualifies if there is one direction (non-decreasing or
non-increasing) that no single step violates by more than tau pixels.
A constant sequence therefore belongs to every family.

Dictionary sizes are counted by dynamic programming without materializing
the dictionary: each family is a union of direction variants whose step
constraints are per-axis delta intervals, so inclusion-exclusion reduces
every term to a product of two exact 1-D counts (Python integers, no
overflow).  Euclidean LOD couples the axes and falls back to a 2-D count
over centre pairs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, Sequence

import numpy as np

from .core import (
    Alphabet,
    ClickPoint,
    GraphicalPassword,
    InvalidInputError,
    snap_to_alphabet,
)

DEFAULT_LOD_BASE = 63  # three tile widths at T=10; every report states the value used


class Family(str, Enum):
    LINE = "LINE"
    DIAG = "DIAG"
    LOD = "LOD"


class LodMetric(str, Enum):
    CHEBYSHEV = "chebyshev"
    EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class AttackSpec:
    """One attack configuration: family plus relaxation tau (and LOD base)."""

    family: Family
    tau: int = 0
    lod_base: int = DEFAULT_LOD_BASE
    lod_metric: LodMetric = LodMetric.CHEBYSHEV

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "lod_metric", LodMetric(self.lod_metric))
        if self.tau < 0:
            raise InvalidInputError(f"tau must be non-negative, got {self.tau}")
        if self.lod_base < 1:
            raise InvalidInputError(f"lod_base must be >= 1, got {self.lod_base}")

    def label(self) -> str:
        """Column label, e.g. LINE21 or LOD42[base=63]."""
        if self.family is Family.LOD:
            metric = "" if self.lod_metric is LodMetric.CHEBYSHEV else f",{self.lod_metric.value}"
            return f"LOD{self.tau}[base={self.lod_base}{metric}]"
        return f"{self.family.value}{self.tau}"


@dataclass(frozen=True)
class CrackEntry:
    spec: AttackSpec
    cracked_count: int
    corpus_size: int

    @property
    def cracked_percent(self) -> float:
        return self.cracked_count / self.corpus_size


@dataclass(frozen=True)
class CrackReport:
    """Crack rates for one participant group, one entry per attack spec."""

    group_label: str
    entries: tuple[CrackEntry, ...]

    def entry_for(self, spec: AttackSpec) -> CrackEntry:
        for e in self.entries:
            if e.spec == spec:
                return e
        raise KeyError(spec)


# ---------------------------------------------------------------------------
# Pattern predicates
# ---------------------------------------------------------------------------

def _deltas(seq: Sequence[ClickPoint]) -> tuple[list[int], list[int]]:
    dxs = [b.x - a.x for a, b in zip(seq, seq[1:])]
    dys = [b.y - a.y for a, b in zip(seq, seq[1:])]
    return dxs, dys


def _validate_seq(seq: Sequence[ClickPoint], alphabet: Alphabet | None) -> None:
    if len(seq) != 5:
        raise InvalidInputError(f"pattern predicates expect 5 points, got {len(seq)}")
    if alphabet is not None:
        for p in seq:
            alphabet.index_of(p)  # raises for non-centres


def _monotone(deltas: Sequence[int]) -> bool:
    return all(d >= 0 for d in deltas) or all(d <= 0 for d in deltas)


def _tau_monotone(deltas: Sequence[int], tau: int) -> bool:
    # Existential direction: non-decreasing violated by at most tau per step,
    # or non-increasing likewise.
    return all(d >= -tau for d in deltas) or all(d <= tau for d in deltas)


def is_line(seq: Sequence[ClickPoint], tau: int, *, alphabet: Alphabet | None = None) -> bool:
    """Horizontal or vertical line with per-step deviation at most tau."""
    _validate_seq(seq, alphabet)
    dxs, dys = _deltas(seq)
    horizontal = _monotone(dxs) and all(abs(d) <= tau for d in dys)
    vertical = _monotone(dys) and all(abs(d) <= tau for d in dxs)
    return horizontal or vertical


def is_diag(seq: Sequence[ClickPoint], tau: int, *, alphabet: Alphabet | None = None) -> bool:
    """Both coordinate sequences tau-monotone (consistent directions)."""
    _validate_seq(seq, alphabet)
    dxs, dys = _deltas(seq)
    return _tau_monotone(dxs, tau) and _tau_monotone(dys, tau)


def is_lod(
    seq: Sequence[ClickPoint],
    tau: int,
    lod_base: int = DEFAULT_LOD_BASE,
    *,
    metric: LodMetric = LodMetric.CHEBYSHEV,
    alphabet: Alphabet | None = None,
) -> bool:
    """Every consecutive step within lod_base + tau of the previous point."""
    _validate_seq(seq, alphabet)
    dxs, dys = _deltas(seq)
    limit = lod_base + tau
    if LodMetric(metric) is LodMetric.EUCLIDEAN:
        return all(dx * dx + dy * dy <= limit * limit for dx, dy in zip(dxs, dys))
    return all(max(abs(dx), abs(dy)) <= limit for dx, dy in zip(dxs, dys))


def matches_spec(seq: Sequence[ClickPoint], spec: AttackSpec, *, alphabet: Alphabet | None = None) -> bool:
    if spec.family is Family.LINE:
        return is_line(seq, spec.tau, alphabet=alphabet)
    if spec.family is Family.DIAG:
        return is_diag(seq, spec.tau, alphabet=alphabet)
    return is_lod(seq, spec.tau, spec.lod_base, metric=spec.lod_metric, alphabet=alphabet)


def crack_test(pw: GraphicalPassword, spec: AttackSpec, a: Alphabet) -> bool:
    """True iff some dictionary entry of ``spec`` verifies ``pw``.

    Because the tiling is an exact cover, the snapped sequence is the only
    alphabet sequence that can verify the password, so membership of the
    snapped sequence in the dictionary decides the attack.
    """
    snapped = [snap_to_alphabet(p, a) for p in pw.points]
    return matches_spec(snapped, spec)


# ---------------------------------------------------------------------------
# Dictionary counting and enumeration
# ---------------------------------------------------------------------------

_INF = math.inf


@dataclass(frozen=True)
class _StepRule:
    """Inclusive per-step bounds on (dx, dy); one direction variant."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def intersect(self, other: "_StepRule") -> "_StepRule":
        return _StepRule(
            max(self.x_lo, other.x_lo),
            min(self.x_hi, other.x_hi),
            max(self.y_lo, other.y_lo),
            min(self.y_hi, other.y_hi),
        )

    def allows(self, dx: int, dy: int) -> bool:
        return self.x_lo <= dx <= self.x_hi and self.y_lo <= dy <= self.y_hi


def _variants(spec: AttackSpec) -> tuple[_StepRule, ...] | None:
    """Direction variants whose union is the family; None if not interval-shaped."""
    tau = spec.tau
    if spec.family is Family.LINE:
        return (
            _StepRule(0, _INF, -tau, tau),     # horizontal, x non-decreasing
            _StepRule(-_INF, 0, -tau, tau),    # horizontal, x non-increasing
            _StepRule(-tau, tau, 0, _INF),     # vertical, y non-decreasing
            _StepRule(-tau, tau, -_INF, 0),    # vertical, y non-increasing
        )
    if spec.family is Family.DIAG:
        return (
            _StepRule(-tau, _INF, -tau, _INF),
            _StepRule(-tau, _INF, -_INF, tau),
            _StepRule(-_INF, tau, -tau, _INF),
            _StepRule(-_INF, tau, -_INF, tau),
        )
    if spec.lod_metric is LodMetric.CHEBYSHEV:
        limit = spec.lod_base + tau
        return (_StepRule(-limit, limit, -limit, limit),)
    return None  # Euclidean LOD couples the axes


def _axis_values(a: Alphabet) -> tuple[list[int], list[int]]:
    xs = [a.t + a.side * j for j in range(a.nx)]
    ys = [a.t + a.side * i for i in range(a.ny)]
    return xs, ys


def _axis_count(values: Sequence[int], lo: float, hi: float, length: int = 5) -> int:
    """Exact number of ``length``-sequences over ``values`` with every step in [lo, hi]."""
    if lo > hi:
        return 0
    allowed = [
        [lo <= vj - vi <= hi for vi in values] for vj in values
    ]
    counts = [1] * len(values)
    for _ in range(length - 1):
        counts = [
            sum(c for c, ok in zip(counts, allowed[j]) if ok)
            for j in range(len(values))
        ]
    return sum(counts)


def _euclidean_lod_count(spec: AttackSpec, a: Alphabet, length: int = 5) -> int:
    xs = np.array([c.x for c in a.centers], dtype=np.int64)
    ys = np.array([c.y for c in a.centers], dtype=np.int64)
    limit = spec.lod_base + spec.tau
    d2 = (xs[:, None] - xs[None, :]) ** 2 + (ys[:, None] - ys[None, :]) ** 2
    allowed = (d2 <= limit * limit).astype(np.int64)
    v = np.ones(len(a.centers), dtype=np.int64)
    for _ in range(length - 1):
        v = allowed @ v  # max entry <= N**4 < 2**63 for N <= 713
    return int(v.sum())


def dictionary_count(spec: AttackSpec, a: Alphabet) -> int:
    """Exact dictionary size |X(tau)| without materializing the dictionary."""
    variants = _variants(spec)
    if variants is None:
        return _euclidean_lod_count(spec, a)
    xs, ys = _axis_values(a)
    total = 0
    for r in range(1, len(variants) + 1):
        sign = 1 if r % 2 else -1
        for subset in itertools.combinations(variants, r):
            rule = subset[0]
            for other in subset[1:]:
                rule = rule.intersect(other)
            total += sign * _axis_count(xs, rule.x_lo, rule.x_hi) * _axis_count(ys, rule.y_lo, rule.y_hi)
    return total


def dictionary_enumerate(
    spec: AttackSpec,
    a: Alphabet,
    *,
    as_indices: bool = False,
) -> Iterator[tuple]:
    """Yield every dictionary entry exactly once, lexicographic by centre index.

    Intended for small alphabets or bounded prefixes (take an islice).  With
    ``as_indices`` the entries are tuples of alphabet indices instead of
    points, which is cheaper for bulk comparisons.
    """
    centers = a.centers
    n = len(centers)
    variants = _variants(spec)

    if variants is None:
        limit = spec.lod_base + spec.tau
        limit2 = limit * limit

        def step_ok(i: int, j: int) -> bool:
            dx = centers[j].x - centers[i].x
            dy = centers[j].y - centers[i].y
            return dx * dx + dy * dy <= limit2

        def recurse(prefix: list[int]) -> Iterator[tuple]:
            if len(prefix) == 5:
                yield tuple(prefix) if as_indices else tuple(centers[i] for i in prefix)
                return
            last = prefix[-1]
            for j in range(n):
                if step_ok(last, j):
                    prefix.append(j)
                    yield from recurse(prefix)
                    prefix.pop()

        for first in range(n):
            yield from recurse([first])
        return

    def recurse_variants(prefix: list[int], alive: tuple[_StepRule, ...]) -> Iterator[tuple]:
        if len(prefix) == 5:
            yield tuple(prefix) if as_indices else tuple(centers[i] for i in prefix)
            return
        last = centers[prefix[-1]]
        for j in range(n):
            c = centers[j]
            dx = c.x - last.x
            dy = c.y - last.y
            still = tuple(v for v in alive if v.allows(dx, dy))
            if still:
                prefix.append(j)
                yield from recurse_variants(prefix, still)
                prefix.pop()

    for first in range(n):
        yield from recurse_variants([first], variants)


# ---------------------------------------------------------------------------
# Crack tables
# ---------------------------------------------------------------------------

def crack_table(
    corpus: Sequence[tuple[str, GraphicalPassword]],
    specs: Sequence[AttackSpec],
    a: Alphabet,
    *,
    merges: Mapping[str, Sequence[str]] | None = None,
) -> list[CrackReport]:
    """Per-group crack rates for each attack spec, in Table layout.

    ``merges`` adds synthetic rows pooling existing groups, e.g.
    ``{"Primed": ["RTL", "LTR"]}``.  Groups that end up empty are absent
    from the result rather than reported as 0%.
    """
    if not corpus:
        raise InvalidInputError("crack_table needs a non-empty corpus")
    by_group: dict[str, list[GraphicalPassword]] = {}
    for group, pw in corpus:
        by_group.setdefault(group, []).append(pw)

    pools: list[tuple[str, list[GraphicalPassword]]] = list(by_group.items())
    for label, members in (merges or {}).items():
        pooled = [pw for m in members for pw in by_group.get(m, [])]
        if pooled:
            pools.append((label, pooled))

    reports = []
    for label, passwords in pools:
        entries = tuple(
            CrackEntry(
                spec=spec,
                cracked_count=sum(1 for pw in passwords if crack_test(pw, spec, a)),
                corpus_size=len(passwords),
            )
            for spec in specs
        )
        reports.append(CrackReport(group_label=label, entries=entries))
    return reports
