"""HTTP/JSON front for the study service.

Thin request/response wiring only; all protocol rules live in
StudyService.  No response ever contains stored password points: the
export endpoint emits anonymized corpus records (hashed ids), everything
else acknowledges or reports state.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Sequence

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..core import InvalidInputError
from .service import (
    DuplicateEnrollmentError,
    MobileClientError,
    ResetPolicyError,
    SchemaError,
    SessionClosedError,
    StudyError,
    StudyService,
    UnknownUserError,
    WorkflowError,
)

_STATUS = {
    MobileClientError: 403,
    DuplicateEnrollmentError: 409,
    UnknownUserError: 404,
    SessionClosedError: 409,
    ResetPolicyError: 403,
    WorkflowError: 409,
    SchemaError: 422,
}


class EnrollRequest(BaseModel):
    user_id: str
    mobile: bool = False


class PracticeRequest(BaseModel):
    user_id: str


class PasswordRequest(BaseModel):
    user_id: str
    points: list[list[int]]
    creation_duration_s: float | None = None


class LoginRequest(BaseModel):
    user_id: str
    points: list[list[int]]
    session: int | None = None
    displayed_at: float | None = None


class ResetRequest(BaseModel):
    user_id: str
    session: int | None = None


class QuestionnaireRequest(BaseModel):
    user_id: str
    session: int
    answers: dict[str, Any]


class SusRequest(BaseModel):
    user_id: str
    answers: list[int] = Field(min_length=10, max_length=10)


def create_app(
    service: StudyService,
    image_dir: str | Path | None = None,
    cors_origins: Sequence[str] | None = ("*",),
) -> FastAPI:
    app = FastAPI(title="passbench study service")
    if cors_origins:
        # the client page may be served from a different origin than the API
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    def run(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StudyError as exc:
            raise HTTPException(
                status_code=_STATUS.get(type(exc), 400),
                detail={"error": exc.code, "message": str(exc)},
            ) from exc
        except InvalidInputError as exc:
            raise HTTPException(
                status_code=422, detail={"error": "invalid_input", "message": str(exc)}
            ) from exc

    @app.post("/enroll")
    def enroll(req: EnrollRequest):
        participant = run(service.enroll, req.user_id, mobile=req.mobile)
        return {
            "user_id": participant.user_id,
            "group": participant.group.value,
            "image_id": participant.image_id,
            "enrolled_at": participant.enrolled_at,
        }

    @app.get("/assignment")
    def assignment(user_id: str = Query(...)):
        return run(service.assignment, user_id)

    @app.post("/practice-complete")
    def practice_complete(req: PracticeRequest):
        run(service.record_practice, req.user_id)
        return {"status": "ok"}

    @app.post("/password")
    def password(req: PasswordRequest):
        return run(
            service.create_password,
            req.user_id,
            req.points,
            creation_duration_s=req.creation_duration_s,
        )

    @app.post("/login")
    def login(req: LoginRequest):
        return run(
            service.login_attempt,
            req.user_id,
            req.points,
            req.session,
            displayed_at=req.displayed_at,
        )

    @app.post("/reset")
    def reset(req: ResetRequest):
        return run(service.reset_password, req.user_id, req.session)

    @app.post("/questionnaire")
    def questionnaire(req: QuestionnaireRequest):
        return run(service.submit_questionnaire, req.user_id, req.session, req.answers)

    @app.post("/sus")
    def sus(req: SusRequest):
        return run(service.submit_sus, req.user_id, req.answers)

    @app.get("/export")
    def export(filter: str = Query("qualified")):
        return run(service.export_corpus, filter=filter)

    if image_dir is not None:
        app.mount("/images", StaticFiles(directory=str(image_dir)), name="images")

    return app
