"""Feature standardization, seeded k-means, knee detection, and the
repeated-run election of cluster representatives.

k-means uses k-means++ seeding from an integer seed and plain Lloyd
iterations, stopping at an assignment fixpoint, a relative inertia change
below 1e-6, or 300 iterations.  Representatives (nearest member to each
centroid) are elected over many independently seeded runs, with clusters
matched across runs by centroid proximity to a reference run; ties and
all index choices are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import InvalidInputError
from .saliency import FeatureVector

MAX_ITER = 300
REL_TOL = 1e-6


@dataclass(frozen=True)
class StandardizeTransform:
    mean: np.ndarray
    std: np.ndarray  # population std; zero-variance dimensions keep std 0

    def apply(self, x: np.ndarray) -> np.ndarray:
        safe = np.where(self.std > 0, self.std, 1.0)
        out = (np.asarray(x, dtype=float) - self.mean) / safe
        return np.where(self.std > 0, out, 0.0)

    def invert(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float) * self.std + self.mean


def _as_matrix(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        return np.asarray(vectors, dtype=float)
    rows = [v.as_array() if isinstance(v, FeatureVector) else np.asarray(v, dtype=float) for v in vectors]
    return np.vstack(rows)


def standardize(vectors) -> tuple[np.ndarray, StandardizeTransform]:
    """Per-dimension z-scores (population mean/std); zero-variance dims map to 0."""
    x = _as_matrix(vectors)
    if x.shape[0] < 2:
        raise InvalidInputError("standardize needs at least 2 vectors")
    transform = StandardizeTransform(mean=x.mean(axis=0), std=x.std(axis=0))
    return transform.apply(x), transform


@dataclass(frozen=True)
class ClusteringResult:
    k: int
    assignments: dict[str, int]
    centroids: np.ndarray  # (k, d), in the input (standardized) space
    inertia: float
    representatives: dict[int, str]  # cluster -> nearest-member image id


def _kmeanspp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))  # all remaining points coincide
        else:
            idx = int(rng.choice(n, p=d2 / total))
        chosen.append(idx)
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _assign(x: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(len(x)), labels]


def lloyd(x: np.ndarray, k: int, seed: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Seeded k-means++ plus Lloyd iterations; returns (labels, centroids, inertia)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if not (1 <= k <= n):
        raise InvalidInputError(f"k={k} incompatible with {n} vectors")
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(x, k, rng)
    labels, dist2 = _assign(x, centroids)
    inertia = float(dist2.sum())
    for _ in range(MAX_ITER):
        new_centroids = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new_centroids[c] = x[members].mean(axis=0)
            else:
                # re-seed an empty cluster at the point farthest from its centroid
                new_centroids[c] = x[int(dist2.argmax())]
        new_labels, dist2 = _assign(x, new_centroids)
        new_inertia = float(dist2.sum())
        assert new_inertia <= inertia + 1e-9, "Lloyd iteration increased inertia"
        converged = bool((new_labels == labels).all())
        small_change = inertia > 0 and abs(inertia - new_inertia) / inertia < REL_TOL
        labels, centroids, inertia = new_labels, new_centroids, new_inertia
        if converged or small_change or inertia == 0:
            break
    return labels, centroids, inertia


def _nearest_members(x: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> list[int]:
    """Per cluster, the member index closest to the centroid (smallest index wins ties)."""
    reps = []
    for c in range(centroids.shape[0]):
        members = np.flatnonzero(labels == c)
        d2 = ((x[members] - centroids[c]) ** 2).sum(axis=1)
        reps.append(int(members[d2.argmin()]))
    return reps


def kmeans(vectors: Mapping[str, Sequence[float]], k: int, seed: int) -> ClusteringResult:
    """Deterministic k-means over id -> vector, with per-cluster representatives."""
    ids = list(vectors)
    x = _as_matrix([vectors[i] for i in ids])
    labels, centroids, inertia = lloyd(x, k, seed)
    reps = _nearest_members(x, labels, centroids)
    return ClusteringResult(
        k=k,
        assignments={i: int(c) for i, c in zip(ids, labels)},
        centroids=centroids,
        inertia=inertia,
        representatives={c: ids[r] for c, r in enumerate(reps)},
    )


@dataclass(frozen=True)
class KneedleResult:
    k: int
    max_difference: float
    confident: bool


def kneedle_select_k(
    inertia_by_k: Mapping[int, float],
    k_range: Sequence[int] | None = None,
    *,
    sensitivity: float = 1.0,
) -> KneedleResult:
    """Knee of an inertia-vs-k curve: normalize to the unit square and take
    the maximum vertical gap below the descending diagonal.

    The curve must be non-increasing.  When the gap never clears
    sensitivity / (npoints - 1) (a near-straight decay has no pronounced
    knee) the returned k is still the argmax but ``confident`` is False.
    """
    ks = sorted(k_range) if k_range is not None else sorted(inertia_by_k)
    if len(ks) < 3:
        raise InvalidInputError("knee detection needs at least 3 k values")
    inertias = [float(inertia_by_k[k]) for k in ks]
    for a, b in zip(inertias, inertias[1:]):
        if b > a + 1e-9 * max(1.0, abs(a)):
            raise InvalidInputError("inertia must be non-increasing in k")
    span_x = ks[-1] - ks[0]
    span_y = inertias[0] - inertias[-1]
    xs = [(k - ks[0]) / span_x for k in ks]
    if span_y <= 0:  # flat curve: no information, lowest k, not confident
        return KneedleResult(k=ks[0], max_difference=0.0, confident=False)
    ys = [(v - inertias[-1]) / span_y for v in inertias]
    diffs = [(1 - x) - y for x, y in zip(xs, ys)]
    best = int(np.argmax(diffs))
    threshold = sensitivity / (len(ks) - 1)
    return KneedleResult(k=ks[best], max_difference=diffs[best], confident=diffs[best] >= threshold)


def inertia_curve(
    vectors: Mapping[str, Sequence[float]] | np.ndarray,
    k_values: Sequence[int],
    seed: int,
    *,
    restarts: int = 10,
) -> dict[int, float]:
    """Best-of-``restarts`` inertia per k, forced non-increasing by running
    minimum (the true optimum never increases with k)."""
    x = _as_matrix(vectors if isinstance(vectors, np.ndarray) else [vectors[i] for i in vectors])
    curve: dict[int, float] = {}
    running = math.inf
    for k in sorted(k_values):
        best = min(lloyd(x, k, seed + k * 1000 + r)[2] for r in range(restarts))
        running = min(running, best)
        curve[k] = running
    return curve


@dataclass(frozen=True)
class ElectionResult:
    k: int
    runs: int
    representatives: dict[int, str]  # cluster -> modal representative
    frequencies: dict[int, float]  # cluster -> modal share of runs


def select_representatives(
    vectors: Mapping[str, Sequence[float]],
    k: int,
    runs: int = 1000,
    seed0: int = 0,
) -> ElectionResult:
    """Elect each cluster's representative over ``runs`` k-means runs.

    Run r uses seed ``seed0 + r``.  Clusters are matched to run 0 by
    minimum-cost centroid assignment, then the modal nearest-to-centroid
    image per matched cluster wins; frequencies report the modal share.
    """
    if runs < 1:
        raise InvalidInputError("need at least one run")
    ids = list(vectors)
    x = _as_matrix([vectors[i] for i in ids])
    tallies: list[dict[str, int]] = [dict() for _ in range(k)]
    reference: np.ndarray | None = None
    for r in range(runs):
        labels, centroids, _ = lloyd(x, k, seed0 + r)
        reps = _nearest_members(x, labels, centroids)
        if reference is None:
            reference = centroids
            mapping = list(range(k))
        else:
            cost = ((reference[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
            rows, cols = linear_sum_assignment(cost)
            mapping = [0] * k
            for ref_c, run_c in zip(rows, cols):
                mapping[run_c] = int(ref_c)
        for run_c, rep_idx in enumerate(reps):
            rep_id = ids[rep_idx]
            tally = tallies[mapping[run_c]]
            tally[rep_id] = tally.get(rep_id, 0) + 1
    representatives = {}
    frequencies = {}
    for c, tally in enumerate(tallies):
        # modal id; deterministic tie-break on the id itself
        winner = max(sorted(tally), key=lambda i: tally[i])
        representatives[c] = winner
        frequencies[c] = tally[winner] / runs
    return ElectionResult(k=k, runs=runs, representatives=representatives, frequencies=frequencies)
