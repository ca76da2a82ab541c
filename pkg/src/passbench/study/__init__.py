"""Study service: protocol state machine and HTTP wiring."""

from .service import StudyConfig, StudyService  # noqa: F401
