"""Click-point passwords, the tolerance-based login rule, and the guess alphabet.

A password is an ordered sequence of exactly five integer click-points on a
background image.  A login attempt matches when every attempt point lands
within the (2T+1) x (2T+1) tolerance square centred on the corresponding
stored point.  The attack alphabet tiles the image with those squares so
that every pixel is covered by exactly one tile centre; edge tiles may
overhang the image border.

All types are immutable values and all functions are pure.
"""

from __future__ import annotations

import csv
import math
import operator
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

PASSWORD_LENGTH = 5


class InvalidInputError(ValueError):
    """Malformed input: wrong point count, out-of-bounds coordinates, etc.

    Raised instead of returning False so that a malfunctioning client is
    never recorded as a wrong guess.
    """


@dataclass(frozen=True, order=True)
class ClickPoint:
    """A single (x, y) pixel selection. x is the column, y the row."""

    x: int
    y: int

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "x", operator.index(self.x))
            object.__setattr__(self, "y", operator.index(self.y))
        except TypeError:
            raise InvalidInputError(
                f"click-point coordinates must be integers, got {(self.x, self.y)!r}"
            ) from None

    def __iter__(self):
        return iter((self.x, self.y))


@dataclass(frozen=True)
class ToleranceConfig:
    """Per-coordinate error tolerance T in pixels (inclusive comparison)."""

    t: int = 10

    def __post_init__(self) -> None:
        if self.t < 0:
            raise InvalidInputError(f"tolerance must be non-negative, got {self.t}")

    @property
    def region_side(self) -> int:
        """Side length of the square tolerance region (2T+1)."""
        return 2 * self.t + 1


@dataclass(frozen=True)
class GraphicalPassword:
    """An ordered sequence of exactly five click-points on one image."""

    image_id: str
    points: tuple[ClickPoint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.points) != PASSWORD_LENGTH:
            raise InvalidInputError(
                f"password must have exactly {PASSWORD_LENGTH} points, got {len(self.points)}"
            )


@dataclass(frozen=True)
class LoginAttempt:
    """Five claimed click-points, as captured by the client."""

    points: tuple[ClickPoint, ...]
    timestamp: float = 0.0
    session_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.points) != PASSWORD_LENGTH:
            raise InvalidInputError(
                f"attempt must have exactly {PASSWORD_LENGTH} points, got {len(self.points)}"
            )


@dataclass(frozen=True)
class Alphabet:
    """Tile centres covering an image, row-major from the top-left.

    Tiles have side 2T+1, which equals the tolerance-region side, so every
    pixel lies in the tolerance region of exactly one centre.  Centres of
    edge tiles may lie outside the image (the tiles overhang the border).
    """

    image_width: int
    image_height: int
    t: int
    centers: tuple[ClickPoint, ...]

    @property
    def side(self) -> int:
        return 2 * self.t + 1

    @property
    def nx(self) -> int:
        """Number of tile columns."""
        return math.ceil(self.image_width / self.side)

    @property
    def ny(self) -> int:
        """Number of tile rows."""
        return math.ceil(self.image_height / self.side)

    def __len__(self) -> int:
        return len(self.centers)

    def index_of(self, center: ClickPoint) -> int:
        """Row-major index of an alphabet centre; raises if not a centre."""
        j, rx = divmod(center.x - self.t, self.side)
        i, ry = divmod(center.y - self.t, self.side)
        if rx or ry or not (0 <= j < self.nx and 0 <= i < self.ny):
            raise InvalidInputError(f"{(center.x, center.y)} is not an alphabet centre")
        return i * self.nx + j

    def center_at(self, index: int) -> ClickPoint:
        return self.centers[index]

    def to_csv(self, out: IO[str]) -> None:
        """Debug export: one (index, x, y) row per centre."""
        writer = csv.writer(out)
        writer.writerow(["index", "x", "y"])
        for idx, c in enumerate(self.centers):
            writer.writerow([idx, c.x, c.y])


def _check_points_in_bounds(points: Sequence[ClickPoint], width: int, height: int) -> None:
    for p in points:
        if not (0 <= p.x < width and 0 <= p.y < height):
            raise InvalidInputError(
                f"point {(p.x, p.y)} outside {width}x{height} image bounds"
            )


def verify_login(
    stored: GraphicalPassword,
    attempt: LoginAttempt,
    cfg: ToleranceConfig = ToleranceConfig(),
    *,
    image_size: tuple[int, int] | None = None,
) -> bool:
    """Accept iff every attempt point is within T of its stored point on both axes.

    Order-sensitive, no partial credit.  When ``image_size`` is given the
    attempt points are bounds-checked first; out-of-bounds points raise
    InvalidInputError rather than failing the login, since they indicate a
    client malfunction rather than a wrong guess.
    """
    if len(stored.points) != len(attempt.points):
        raise InvalidInputError("stored password and attempt differ in length")
    if image_size is not None:
        _check_points_in_bounds(attempt.points, *image_size)
    t = cfg.t
    return all(
        abs(a.x - s.x) <= t and abs(a.y - s.y) <= t
        for s, a in zip(stored.points, attempt.points)
    )


def build_alphabet(width: int, height: int, cfg: ToleranceConfig = ToleranceConfig()) -> Alphabet:
    """Tile a width x height image with (2T+1)-sided squares; centres row-major."""
    if width <= 0 or height <= 0:
        raise InvalidInputError(f"image dimensions must be positive, got {width}x{height}")
    side = cfg.region_side
    nx = math.ceil(width / side)
    ny = math.ceil(height / side)
    centers = tuple(
        ClickPoint(cfg.t + side * j, cfg.t + side * i)
        for i in range(ny)
        for j in range(nx)
    )
    return Alphabet(image_width=width, image_height=height, t=cfg.t, centers=centers)


def snap_to_alphabet(p: ClickPoint, a: Alphabet) -> ClickPoint:
    """Return the unique alphabet centre whose tolerance region covers ``p``.

    Accepts any coordinate within the tiled extent, which may exceed the
    image by up to one tile's overhang.
    """
    side = a.side
    j = p.x // side
    i = p.y // side
    if not (0 <= p.x < a.nx * side and 0 <= p.y < a.ny * side):
        raise InvalidInputError(f"point {(p.x, p.y)} outside the tiled area")
    return a.centers[i * a.nx + j]


def points_to_json(points: Iterable[ClickPoint]) -> list[list[int]]:
    """Serialize points as a JSON-ready array of [x, y] pairs."""
    return [[p.x, p.y] for p in points]


def points_from_json(
    data: Sequence[Sequence[int]],
    *,
    image_size: tuple[int, int] | None = None,
) -> tuple[ClickPoint, ...]:
    """Parse an array of [x, y] pairs, optionally bounds-checking the result.

    Fractional coordinates are rejected: clients are expected to floor to
    integer pixels at capture time.
    """
    points = []
    try:
        for x, y in data:
            xi, yi = int(x), int(y)
            if xi != x or yi != y:
                raise InvalidInputError(f"non-integer coordinates in {[x, y]!r}")
            points.append(ClickPoint(xi, yi))
    except InvalidInputError:
        raise
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed point array: {data!r}") from exc
    points = tuple(points)
    if image_size is not None:
        _check_points_in_bounds(points, *image_size)
    return points
