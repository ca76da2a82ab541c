"""Three-session study protocol over an append-only event log.

Every mutation is validated, turned into a StudyEvent with all randomness
and clock reads resolved into the payload, persisted, and then applied to
the in-memory state by a pure fold.  Replaying the log therefore rebuilds
the exact same state, and the same service can be reopened on an existing
log file.

Session gates: session 2 opens 24 h after session 1 completes and session
3 opens 5 days after session 2 completes (both configurable).  A reset in
session 1 restarts password creation immediately; a reset in session 2
rolls the participant back to session-1 creation, which pushes the next
session-2 window at least 24 h past the reset; resets are not allowed in
session 3.  Group and background image never change after enrollment.
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterator, Sequence

from ..core import (
    ClickPoint,
    GraphicalPassword,
    InvalidInputError,
    LoginAttempt,
    ToleranceConfig,
    points_from_json,
    points_to_json,
    verify_login,
)
from ..stats import SusResponse, sus_score


class Group(str, Enum):
    CONTROL = "control"
    LTR = "LTR"
    RTL = "RTL"


GROUPS = (Group.CONTROL, Group.LTR, Group.RTL)

STRATEGIES = (
    "colours",
    "shapes",
    "geometric patterns",
    "first attention object",
    "other",
)

EVENT_KINDS = (
    "enrolled",
    "practice_done",
    "password_created",
    "login_attempt",
    "password_reset",
    "questionnaire",
    "sus_submitted",
)


class StudyError(Exception):
    """Base protocol error; ``code`` is a stable machine-readable tag."""

    code = "study_error"


class DuplicateEnrollmentError(StudyError):
    code = "duplicate_enrollment"


class MobileClientError(StudyError):
    code = "mobile_client"


class UnknownUserError(StudyError):
    code = "unknown_user"


class SessionClosedError(StudyError):
    code = "session_closed"


class ResetPolicyError(StudyError):
    code = "reset_not_allowed"


class WorkflowError(StudyError):
    code = "workflow"


class SchemaError(StudyError):
    code = "schema"


@dataclass(frozen=True)
class StudyConfig:
    image_id: str = "grid"
    image_width: int = 640
    image_height: int = 480
    tolerance: int = 10
    reveal_duration_s: float = 20.0
    practice_image_id: str = "practice"
    session2_gap_s: float = 24 * 3600.0
    session2_window_s: float = 48 * 3600.0  # lateness boundary, recorded not enforced
    session3_gap_s: float = 5 * 24 * 3600.0
    session3_window_s: float = 6 * 24 * 3600.0
    assignment_seed: int = 0

    @classmethod
    def from_json(cls, data: dict) -> "StudyConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise SchemaError(f"unknown study config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


@dataclass(frozen=True)
class StudyEvent:
    kind: str
    user_id: str
    timestamp: float
    payload: dict

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "user_id": self.user_id,
            "timestamp": self.timestamp,
            "payload": self.payload,
        }

    @classmethod
    def from_json(cls, data: dict) -> "StudyEvent":
        return cls(
            kind=data["kind"],
            user_id=data["user_id"],
            timestamp=float(data["timestamp"]),
            payload=dict(data["payload"]),
        )


@dataclass(frozen=True)
class Participant:
    """Public view of an enrolled user; the password is deliberately absent."""

    user_id: str
    group: Group
    image_id: str
    enrolled_at: float
    qualified: bool = False


@dataclass(frozen=True)
class SessionState:
    """One session's window for one user.

    ``closes_at`` is the nominal lateness boundary; the session stays
    usable past it and late completions are only recorded as late.
    """

    session_number: int
    opens_at: float
    closes_at: float | None
    completed: bool


@dataclass
class _UserState:
    user_id: str
    group: Group
    image_id: str
    enrolled_at: float
    practice_done: bool = False
    password: tuple[ClickPoint, ...] | None = None
    created_ever: bool = False
    awaiting_confirmation: bool = False
    completed_at: dict[int, float] = field(default_factory=dict)
    login_time_s: dict[int, float] = field(default_factory=dict)
    unsuccessful: dict[int, int] = field(default_factory=lambda: {1: 0, 2: 0, 3: 0})
    reset_count: int = 0
    questionnaires: dict[int, dict] = field(default_factory=dict)
    sus_answers: tuple[int, ...] | None = None
    late_sessions: set[int] = field(default_factory=set)
    last_event_ts: float = 0.0


class StudyService:
    """Operates one study (one background image) over an event log.

    Mutations are serialized through a single lock; the event is flushed to
    the log before the call returns.  ``clock`` is injectable so session
    gates are testable without waiting.
    """

    def __init__(
        self,
        config: StudyConfig,
        log_path: str | Path | None = None,
        clock: Callable[[], float] = time.time,
    ):
        self._config = config
        self._clock = clock
        self._lock = threading.Lock()
        self._users: dict[str, _UserState] = {}
        self._events: list[StudyEvent] = []
        self._rng = random.Random(config.assignment_seed)
        self._log_path = Path(log_path) if log_path is not None else None
        self._log_file = None
        if self._log_path is not None:
            if self._log_path.exists():
                for line in self._log_path.read_text().splitlines():
                    if line.strip():
                        self._ingest(StudyEvent.from_json(json.loads(line)))
            self._log_file = open(self._log_path, "a", encoding="utf-8")

    # -- event plumbing ----------------------------------------------------

    def _ingest(self, event: StudyEvent) -> None:
        """Apply a historical event without re-persisting it."""
        _apply_event(self._users, event)
        self._events.append(event)
        if event.kind == "enrolled":
            self._rng.choice(GROUPS)  # keep the assignment stream aligned on replay

    def _commit(self, event: StudyEvent) -> None:
        # guard before persisting so the log and memory can never diverge
        u = self._users.get(event.user_id)
        if u is not None and event.timestamp < u.last_event_ts:
            raise InvalidInputError("clock went backwards; refusing to append event")
        if self._log_file is not None:
            self._log_file.write(json.dumps(event.to_json()) + "\n")
            self._log_file.flush()
        _apply_event(self._users, event)
        self._events.append(event)

    def _now(self) -> float:
        return float(self._clock())

    def _user(self, user_id: str) -> _UserState:
        try:
            return self._users[user_id]
        except KeyError:
            raise UnknownUserError(f"unknown user {user_id!r}") from None

    @property
    def config(self) -> StudyConfig:
        return self._config

    @property
    def events(self) -> tuple[StudyEvent, ...]:
        return tuple(self._events)

    def close(self) -> None:
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None

    # -- session arithmetic --------------------------------------------------

    def current_session(self, user_id: str) -> int:
        """1, 2, or 3; the first session this user has not completed."""
        u = self._user(user_id)
        return _current_session(u)

    def session_opens_at(self, user_id: str, session: int) -> float:
        u = self._user(user_id)
        return _opens_at(u, session, self._config)

    def session_states(self, user_id: str) -> tuple[SessionState, SessionState, SessionState]:
        u = self._user(user_id)
        cfg = self._config
        states = []
        for session in (1, 2, 3):
            opens = _opens_at(u, session, cfg)
            if session == 1:
                closes = None
            elif session == 2:
                closes = u.completed_at[1] + cfg.session2_window_s if 1 in u.completed_at else None
            else:
                closes = u.completed_at[2] + cfg.session3_window_s if 2 in u.completed_at else None
            states.append(
                SessionState(
                    session_number=session,
                    opens_at=opens,
                    closes_at=closes,
                    completed=session in u.completed_at,
                )
            )
        return tuple(states)

    # -- operations ----------------------------------------------------------

    def enroll(self, user_id: str, *, mobile: bool = False) -> Participant:
        with self._lock:
            if mobile:
                raise MobileClientError("mobile clients are excluded from the study")
            if user_id in self._users:
                raise DuplicateEnrollmentError(f"user {user_id!r} already enrolled")
            group = self._rng.choice(GROUPS)
            now = self._now()
            event = StudyEvent(
                kind="enrolled",
                user_id=user_id,
                timestamp=now,
                payload={"group": group.value, "image_id": self._config.image_id},
            )
            self._commit(event)
            return self.participant(user_id)

    def participant(self, user_id: str) -> Participant:
        u = self._user(user_id)
        return Participant(
            user_id=u.user_id,
            group=u.group,
            image_id=u.image_id,
            enrolled_at=u.enrolled_at,
            qualified=_qualified(u),
        )

    def assignment(self, user_id: str) -> dict:
        """Everything the client needs to run a session; never the password."""
        u = self._user(user_id)
        direction = "none" if u.group is Group.CONTROL else u.group.value
        return {
            "user_id": u.user_id,
            "group": u.group.value,
            "image_id": u.image_id,
            "image_width": self._config.image_width,
            "image_height": self._config.image_height,
            "tolerance": self._config.tolerance,
            "practice_image_id": self._config.practice_image_id,
            "reveal": {"direction": direction, "duration_s": self._config.reveal_duration_s},
            "session": _current_session(u),
            "session_opens_at": _opens_at(u, _current_session(u), self._config),
            "practice_done": u.practice_done,
            "awaiting_confirmation": u.awaiting_confirmation,
        }

    def record_practice(self, user_id: str) -> None:
        with self._lock:
            self._user(user_id)
            self._commit(
                StudyEvent("practice_done", user_id, self._now(), {})
            )

    def create_password(
        self,
        user_id: str,
        points: Sequence[ClickPoint] | Sequence[Sequence[int]],
        *,
        creation_duration_s: float | None = None,
    ) -> dict:
        """Store a new password; the reply only acknowledges and never echoes it."""
        with self._lock:
            u = self._user(user_id)
            if not u.practice_done:
                raise WorkflowError("practice password must be completed first")
            if _current_session(u) != 1:
                raise SessionClosedError("passwords are created in session 1 only")
            if u.password is not None and u.awaiting_confirmation:
                raise WorkflowError("a password is already awaiting confirmation; reset first")
            parsed = _parse_points(points, self._config)
            now = self._now()
            payload: dict[str, Any] = {"points": points_to_json(parsed)}
            if creation_duration_s is not None:
                payload["creation_duration_s"] = float(creation_duration_s)
            self._commit(StudyEvent("password_created", user_id, now, payload))
            return {"status": "created", "next": "confirmation-login"}

    def login_attempt(
        self,
        user_id: str,
        points: Sequence[ClickPoint] | Sequence[Sequence[int]],
        session: int | None = None,
        *,
        displayed_at: float | None = None,
    ) -> dict:
        """Verify an attempt for the user's current session.

        ``displayed_at`` is the client's image-display signal; the login
        time of a successful session is measured from it.
        """
        with self._lock:
            u = self._user(user_id)
            now = self._now()
            current = _current_session(u)
            if session is not None and session != current:
                raise SessionClosedError(
                    f"session {session} is not open (current session is {current})"
                )
            session = current
            if 3 in u.completed_at:
                raise SessionClosedError("the study is complete")
            opens = _opens_at(u, session, self._config)
            if now < opens:
                raise SessionClosedError(
                    f"session {session} opens at {opens:.0f}, now is {now:.0f}"
                )
            if u.password is None:
                raise WorkflowError("no password on file; create one first")
            parsed = _parse_points(points, self._config)
            if displayed_at is None:
                displayed_at = now
            if displayed_at > now:
                raise InvalidInputError("image-display signal is in the future")
            stored = GraphicalPassword(u.image_id, u.password)
            attempt = LoginAttempt(parsed, timestamp=now, session_id=str(session))
            success = verify_login(
                stored, attempt, ToleranceConfig(self._config.tolerance)
            )
            late = _is_late(session, now, u, self._config)
            event = StudyEvent(
                "login_attempt",
                user_id,
                now,
                {
                    "session": session,
                    "points": points_to_json(parsed),
                    "success": success,
                    "displayed_at": float(displayed_at),
                    "login_time_s": float(now - displayed_at),
                    "late": late,
                },
            )
            self._commit(event)
            return {
                "success": success,
                "session": session,
                "session_completed": success,
                "unsuccessful_attempts": self._users[user_id].unsuccessful[session],
            }

    def reset_password(self, user_id: str, session: int | None = None) -> dict:
        with self._lock:
            u = self._user(user_id)
            current = _current_session(u)
            if session is not None and session != current:
                raise SessionClosedError(
                    f"cannot reset session {session}; current session is {current}"
                )
            session = current
            if session == 3:
                raise ResetPolicyError("resets are not allowed in session 3")
            if u.password is None:
                raise WorkflowError("no password to reset")
            self._commit(
                StudyEvent("password_reset", user_id, self._now(), {"session": session})
            )
            return {"status": "reset", "next": "create-password", "session": session}

    def submit_questionnaire(self, user_id: str, session: int, answers: dict) -> dict:
        with self._lock:
            u = self._user(user_id)
            if session not in (1, 2, 3):
                raise SchemaError(f"session must be 1..3, got {session}")
            _validate_questionnaire(answers)
            if session == 1 and not u.created_ever:
                raise WorkflowError("session-1 questionnaire follows password creation")
            if session > 1 and (session - 1) not in u.completed_at:
                raise WorkflowError(f"session {session} questionnaire before reaching it")
            self._commit(
                StudyEvent(
                    "questionnaire",
                    user_id,
                    self._now(),
                    {"session": session, "answers": dict(answers)},
                )
            )
            return {"status": "stored"}

    def submit_sus(self, user_id: str, answers: Sequence[int]) -> dict:
        with self._lock:
            u = self._user(user_id)
            if 2 not in u.completed_at or self._now() < _opens_at(u, 3, self._config):
                raise WorkflowError("the exit survey belongs to session 3")
            try:
                response = SusResponse(tuple(int(a) for a in answers))
            except (InvalidInputError, TypeError, ValueError) as exc:
                raise SchemaError(f"bad SUS answers: {exc}") from exc
            self._commit(
                StudyEvent(
                    "sus_submitted",
                    user_id,
                    self._now(),
                    {"answers": list(response.answers)},
                )
            )
            return {"status": "stored", "score": sus_score(response)}

    # -- analysis surfaces ---------------------------------------------------

    def qualify_participants(self) -> set[str]:
        """Control users always qualify; primed users must have watched the
        reveal and not reported distraction.  Repeated-point outliers are
        retained deliberately."""
        return {uid for uid, u in self._users.items() if _qualified(u)}

    def export_corpus(
        self,
        filter: str = "qualified",
        which: str = "latest-password",
    ) -> list[dict]:
        """One JSON-ready record per participant, in enrollment order.

        Records carry the hashed user id, group, image, the latest password's
        points, per-session completion flags / login times / unsuccessful
        attempt counts, reset count, and the SUS score when present.
        """
        if filter not in ("qualified", "all"):
            raise InvalidInputError(f"filter must be 'qualified' or 'all', got {filter!r}")
        if which != "latest-password":
            raise InvalidInputError(f"unsupported export mode {which!r}")
        records = []
        for u in self._users.values():  # insertion order == enrollment order
            if filter == "qualified" and not _qualified(u):
                continue
            records.append(
                {
                    "user": hashlib.sha256(u.user_id.encode("utf-8")).hexdigest()[:16],
                    "group": u.group.value,
                    "image_id": u.image_id,
                    "points": points_to_json(u.password) if u.password else None,
                    "sessions_completed": {str(s): (s in u.completed_at) for s in (1, 2, 3)},
                    "login_time_s": {str(s): u.login_time_s[s] for s in sorted(u.login_time_s)},
                    "unsuccessful_attempts": {str(s): u.unsuccessful[s] for s in (1, 2, 3)},
                    "reset_count": u.reset_count,
                    "sus": sus_score(SusResponse(u.sus_answers)) if u.sus_answers else None,
                    "late_sessions": sorted(u.late_sessions),
                }
            )
        return records

    def export_corpus_jsonl(self, path: str | Path, filter: str = "qualified") -> int:
        records = self.export_corpus(filter=filter)
        with open(path, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record) + "\n")
        return len(records)


# ---------------------------------------------------------------------------
# Pure state fold
# ---------------------------------------------------------------------------

def _apply_event(users: dict[str, _UserState], event: StudyEvent) -> None:
    if event.kind not in EVENT_KINDS:
        raise SchemaError(f"unknown event kind {event.kind!r}")
    if event.kind == "enrolled":
        users[event.user_id] = _UserState(
            user_id=event.user_id,
            group=Group(event.payload["group"]),
            image_id=event.payload["image_id"],
            enrolled_at=event.timestamp,
            last_event_ts=event.timestamp,
        )
        return
    u = users[event.user_id]
    if event.timestamp < u.last_event_ts:
        raise SchemaError(f"events out of order for user {event.user_id!r}")
    u.last_event_ts = event.timestamp
    payload = event.payload
    if event.kind == "practice_done":
        u.practice_done = True
    elif event.kind == "password_created":
        u.password = points_from_json(payload["points"])
        u.created_ever = True
        u.awaiting_confirmation = True
    elif event.kind == "login_attempt":
        session = int(payload["session"])
        if payload["success"]:
            u.completed_at[session] = event.timestamp
            u.login_time_s[session] = float(payload["login_time_s"])
            if session == 1:
                u.awaiting_confirmation = False
            if payload.get("late"):
                u.late_sessions.add(session)
        else:
            u.unsuccessful[session] = u.unsuccessful.get(session, 0) + 1
    elif event.kind == "password_reset":
        session = int(payload["session"])
        u.password = None
        u.awaiting_confirmation = False
        u.reset_count += 1
        u.completed_at.pop(1, None)  # roll back to session-1 creation
        u.login_time_s.pop(1, None)
    elif event.kind == "questionnaire":
        u.questionnaires[int(payload["session"])] = dict(payload["answers"])
    elif event.kind == "sus_submitted":
        u.sus_answers = tuple(payload["answers"])


def _current_session(u: _UserState) -> int:
    for session in (1, 2, 3):
        if session not in u.completed_at:
            return session
    return 3


def _opens_at(u: _UserState, session: int, config: StudyConfig) -> float:
    if session == 1:
        return u.enrolled_at
    if session == 2:
        if 1 not in u.completed_at:
            return float("inf")
        return u.completed_at[1] + config.session2_gap_s
    if session == 3:
        if 2 not in u.completed_at:
            return float("inf")
        return u.completed_at[2] + config.session3_gap_s
    raise InvalidInputError(f"session must be 1..3, got {session}")


def _is_late(session: int, now: float, u: _UserState, config: StudyConfig) -> bool:
    """Past the nominal window; the window stays open and lateness is recorded."""
    if session == 2 and 1 in u.completed_at:
        return now > u.completed_at[1] + config.session2_window_s
    if session == 3 and 2 in u.completed_at:
        return now > u.completed_at[2] + config.session3_window_s
    return False


def _qualified(u: _UserState) -> bool:
    if u.group is Group.CONTROL:
        return True
    answers = u.questionnaires.get(1, {})
    return answers.get("watched_reveal") is True and answers.get("distracted") is False


def _parse_points(points, config: StudyConfig) -> tuple[ClickPoint, ...]:
    if points and isinstance(points[0], ClickPoint):
        parsed = tuple(points)
        if len(parsed) != 5:
            raise InvalidInputError(f"expected 5 points, got {len(parsed)}")
        for p in parsed:
            if not (0 <= p.x < config.image_width and 0 <= p.y < config.image_height):
                raise InvalidInputError(f"point {(p.x, p.y)} out of bounds")
        return parsed
    parsed = points_from_json(points, image_size=(config.image_width, config.image_height))
    if len(parsed) != 5:
        raise InvalidInputError(f"expected 5 points, got {len(parsed)}")
    return parsed


def _validate_questionnaire(answers: dict) -> None:
    if not isinstance(answers, dict):
        raise SchemaError("questionnaire answers must be an object")
    strategy = answers.get("strategy")
    if strategy is not None and strategy not in STRATEGIES:
        raise SchemaError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    for flag in ("watched_reveal", "distracted", "seen_image_before", "touch_screen", "recorded_password"):
        if flag in answers and not isinstance(answers[flag], bool):
            raise SchemaError(f"{flag} must be a boolean")


def replay_events(
    events: Sequence[StudyEvent] | Iterator[StudyEvent],
) -> dict[str, _UserState]:
    """Fold events into fresh state; used to check replay idempotence."""
    users: dict[str, _UserState] = {}
    for event in events:
        _apply_event(users, event)
    return users


def read_event_log(path: str | Path) -> list[StudyEvent]:
    events = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            events.append(StudyEvent.from_json(json.loads(line)))
    return events
