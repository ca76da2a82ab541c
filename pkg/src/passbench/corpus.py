"""JSONL password-corpus records shared by the attack and statistics CLIs.

One object per line with at least {"group", "image_id", "points"}, where
points is an array of five [x, y] pairs.  Extra keys (login times, SUS,
...) pass through untouched, so a study-service export feeds these
readers directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .core import GraphicalPassword, InvalidInputError, points_from_json


@dataclass(frozen=True)
class CorpusRecord:
    group: str
    image_id: str
    points: tuple | None
    extras: dict = field(default_factory=dict)

    def password(self) -> GraphicalPassword:
        if self.points is None:
            raise InvalidInputError("record has no password points")
        return GraphicalPassword(self.image_id, self.points)


def read_corpus(path: str | Path) -> list[CorpusRecord]:
    records = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"{path}:{lineno}: bad JSON: {exc}") from exc
        try:
            group = str(data.pop("group"))
            image_id = str(data.pop("image_id", ""))
            raw_points = data.pop("points")
        except KeyError as exc:
            raise InvalidInputError(f"{path}:{lineno}: missing key {exc}") from exc
        points = points_from_json(raw_points) if raw_points is not None else None
        records.append(CorpusRecord(group=group, image_id=image_id, points=points, extras=data))
    return records


def write_corpus(records: Iterable[CorpusRecord], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            row = {
                "group": r.group,
                "image_id": r.image_id,
                "points": [[p.x, p.y] for p in r.points] if r.points else None,
                **r.extras,
            }
            fh.write(json.dumps(row) + "\n")
            n += 1
    return n


def passwords_by_group(records: Iterable[CorpusRecord]) -> dict[str, list[GraphicalPassword]]:
    """Group -> passwords, skipping records without points."""
    out: dict[str, list[GraphicalPassword]] = {}
    for r in records:
        if r.points is not None:
            out.setdefault(r.group, []).append(r.password())
    return out


def attack_corpus(records: Iterable[CorpusRecord]) -> list[tuple[str, GraphicalPassword]]:
    return [(r.group, r.password()) for r in records if r.points is not None]
