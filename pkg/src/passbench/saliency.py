"""Saliency-map ingestion and the six-feature image summary.

Maps are 8-bit grayscale grids where 0 means "not salient".  The feature
vector captures how much of the image is salient, how intensity varies,
and how salient regions are laid out: regions come from thresholding the
map with Otsu's method (salient means strictly greater than the
threshold) and 8-connected labelling.  Variances are population
variances throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from PIL import Image
from scipy import ndimage

from .core import InvalidInputError


class FormatError(ValueError):
    """Input image is not an 8-bit grayscale map."""


@dataclass(frozen=True)
class SaliencyMap:
    """8-bit grayscale grid; values[y, x] in 0..255."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values)
        if arr.ndim != 2 or arr.size == 0:
            raise FormatError(f"saliency map must be a non-empty 2-D grid, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.min() < 0 or arr.max() > 255:
                raise FormatError("saliency values must lie in 0..255")
            arr = arr.astype(np.uint8)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Region:
    """One connected component of salient pixels."""

    pixel_count: int
    centroid: tuple[float, float]  # (mean x, mean y)


@dataclass(frozen=True)
class FeatureVector:
    salient_proportion: float
    all_pixel_variance: float
    salient_pixel_variance: float
    num_regions: int
    region_distance: float
    high_saliency_proportion: float

    FIELDS = (
        "salient_proportion",
        "all_pixel_variance",
        "salient_pixel_variance",
        "num_regions",
        "region_distance",
        "high_saliency_proportion",
    )

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in self.FIELDS], dtype=float)


def load_saliency_map(source: str | Path) -> SaliencyMap:
    """Load an 8-bit grayscale image (binary PGM; PNG also accepted)."""
    try:
        img = Image.open(source)
        img.load()
    except Exception as exc:
        raise FormatError(f"cannot read image {source}: {exc}") from exc
    if img.mode != "L":
        raise FormatError(f"{source}: expected 8-bit grayscale, got mode {img.mode!r}")
    return SaliencyMap(np.asarray(img, dtype=np.uint8))


def write_pgm(values: np.ndarray, path: str | Path) -> None:
    """Write a uint8 grid as a binary (P5) PGM file."""
    arr = np.ascontiguousarray(values, dtype=np.uint8)
    if arr.ndim != 2:
        raise FormatError(f"expected a 2-D grid, got shape {arr.shape}")
    height, width = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def crop_border(m: SaliencyMap, x: int, y: int, w: int, h: int) -> SaliencyMap:
    """Copy out the w x h sub-grid with top-left corner (x, y)."""
    if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > m.width or y + h > m.height:
        raise InvalidInputError(
            f"crop rect {(x, y, w, h)} outside {m.width}x{m.height} map"
        )
    return SaliencyMap(m.values[y : y + h, x : x + w].copy())


def centered_crop(m: SaliencyMap, w: int, h: int) -> SaliencyMap:
    """Centered w x h crop, e.g. cutting a 1440x1080 frame out of 1920x1080."""
    return crop_border(m, (m.width - w) // 2, (m.height - h) // 2, w, h)


def otsu_threshold(m: SaliencyMap | np.ndarray) -> int:
    """Threshold maximizing between-class variance of the 256-bin histogram.

    Computed in exact integer arithmetic, so ties are broken toward the
    smallest threshold with no floating-point ambiguity.  A constant map
    yields threshold 0.
    """
    values = m.values if isinstance(m, SaliencyMap) else np.asarray(m)
    hist = np.bincount(values.ravel().astype(np.int64), minlength=256)
    return otsu_from_histogram(hist)


def otsu_from_histogram(hist: Sequence[int]) -> int:
    if len(hist) != 256:
        raise InvalidInputError(f"expected a 256-bin histogram, got {len(hist)} bins")
    counts = [int(c) for c in hist]
    total = sum(counts)
    if total == 0:
        raise InvalidInputError("empty histogram")
    # between-class variance at t is (s0*n1 - s1*n0)^2 / (N^2 * n0 * n1);
    # the N^2 factor is constant, so compare (s0*n1 - s1*n0)^2 / (n0*n1) exactly
    sum_all = sum(v * c for v, c in enumerate(counts))
    best_t, best_key = 0, Fraction(0)
    n0 = s0 = 0
    for t in range(256):
        n0 += counts[t]
        s0 += t * counts[t]
        n1 = total - n0
        s1 = sum_all - s0
        if n0 == 0 or n1 == 0:
            key = Fraction(0)
        else:
            key = Fraction((s0 * n1 - s1 * n0) ** 2, n0 * n1)
        if key > best_key:
            best_t, best_key = t, key
    return best_t


def connected_components(binary: np.ndarray) -> list[Region]:
    """Maximal 8-connected regions of True pixels, with counts and centroids."""
    mask = np.asarray(binary, dtype=bool)
    labels, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        return []
    ys, xs = np.nonzero(labels)
    ids = labels[ys, xs]
    counts = np.bincount(ids, minlength=n + 1)[1:]
    sum_x = np.bincount(ids, weights=xs, minlength=n + 1)[1:]
    sum_y = np.bincount(ids, weights=ys, minlength=n + 1)[1:]
    return [
        Region(pixel_count=int(c), centroid=(float(sx / c), float(sy / c)))
        for c, sx, sy in zip(counts, sum_x, sum_y)
    ]


def _mean_pairwise_distance(centroids: Sequence[tuple[float, float]]) -> float:
    if len(centroids) < 2:
        return 0.0
    total = 0.0
    pairs = 0
    for i in range(len(centroids)):
        for j in range(i + 1, len(centroids)):
            total += math.dist(centroids[i], centroids[j])
            pairs += 1
    return total / pairs


def extract_features(m: SaliencyMap) -> FeatureVector:
    """The six-feature summary of a saliency map.

    (i) fraction of non-zero pixels, (ii) variance of all pixels,
    (iii) variance of non-zero pixels (0 if none), (iv) number of regions
    above the Otsu threshold, (v) mean pairwise distance between region
    centroids (0 for fewer than two regions), (vi) fraction of pixels
    above the Otsu threshold.
    """
    values = m.values.astype(float)
    n = values.size
    nonzero = values > 0
    salient_proportion = float(nonzero.sum()) / n
    all_var = float(values.var())
    salient_var = float(values[nonzero].var()) if nonzero.any() else 0.0
    t = otsu_threshold(m)
    above = m.values > t
    regions = connected_components(above)
    return FeatureVector(
        salient_proportion=salient_proportion,
        all_pixel_variance=all_var,
        salient_pixel_variance=salient_var,
        num_regions=len(regions),
        region_distance=_mean_pairwise_distance([r.centroid for r in regions]),
        high_saliency_proportion=float(above.sum()) / n,
    )


def filter_corpus(
    sizes: Mapping[str, tuple[int, int]],
    *,
    aspect_ratio: tuple[int, int] = (4, 3),
    resolution: tuple[int, int] | None = (1440, 1080),
) -> list[str]:
    """Keep image ids whose (width, height) match the aspect ratio and,
    when given, the exact resolution.  Category-based exclusions are the
    caller's concern (category names are dataset metadata)."""
    rw, rh = aspect_ratio
    kept = []
    for image_id, (w, h) in sizes.items():
        if w * rh != h * rw:
            continue
        if resolution is not None and (w, h) != resolution:
            continue
        kept.append(image_id)
    return kept


def load_map_directory(directory: str | Path, *, suffixes: Iterable[str] = (".pgm", ".png")) -> dict[str, SaliencyMap]:
    """Load every map in a directory keyed by file stem, sorted for determinism."""
    directory = Path(directory)
    maps: dict[str, SaliencyMap] = {}
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() in suffixes and path.is_file():
            maps[path.stem] = load_saliency_map(path)
    return maps
