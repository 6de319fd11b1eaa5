"""HTTP/JSON API over the study runner.

Turn-based polling API: clients create a session, GET its state (board,
legal moves, condition-gated guidance), POST moves through the two-phase
caution flow, and submit the end-of-session questionnaire. Per-session
mutations are serialized; every response field is derivable from the
session event log.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .core import IllegalMoveError, legal_moves, parse_fen
from .study import (
    GAMES_PER_SESSION, DuplicateQuestionnaireError, Guidance, Session,
    SessionError, StudyError, StudyRunner, TurnOutcome,
)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


class CreateSessionRequest(BaseModel):
    participant: str = Field(min_length=1)
    condition: str
    day: int


class MoveRequest(BaseModel):
    move: str = Field(min_length=4, max_length=5)
    confirm: bool = False
    move_number: Optional[int] = None


class QuestionnaireRequest(BaseModel):
    likert: int


def _guidance_payload(g: Guidance) -> Optional[dict]:
    if g.is_empty:
        return None
    payload: dict = {"highlight": list(g.highlight) if g.highlight else None,
                     "variant": g.variant, "rationale": None}
    if g.rationale is not None:
        payload["rationale"] = {
            "move_san": g.rationale.move_san,
            "lines": list(g.rationale.lines),
            "factors": [
                {"name": f.name, "source": f.source, "sign": f.sign,
                 "payload": f.payload}
                for f in g.rationale.factors
            ],
        }
    return payload


def _outcome_payload(outcome: TurnOutcome) -> dict:
    payload = {
        "committed": outcome.committed,
        "game_index": outcome.game_index,
        "move": outcome.move,
        "san": outcome.san,
        "percentile": outcome.percentile,
        "move_number": outcome.move_number,
        "opponent_move": outcome.opponent_move,
        "opponent_san": outcome.opponent_san,
        "outcome": outcome.outcome,
        "game_over": outcome.game_over,
        "fen_after": outcome.fen_after,
        "caution": None,
    }
    if outcome.caution is not None:
        payload["caution"] = {
            "move_san": outcome.caution.move_san,
            "lines": list(outcome.caution.lines),
        }
    return payload


def session_state(runner: StudyRunner, session: Session) -> dict:
    current = None
    if not session.complete:
        i = session.current_game
        game = session.games[i]
        guidance = runner.guidance_for(session, i)
        p = parse_fen(game.fen)
        current = {
            "game_index": i,
            "phase": game.phase,
            "fen": game.fen,
            "legal_moves": [m.uci() for m in legal_moves(p)],
            "player_moves": game.player_moves,
            "max_player_moves": runner.study.max_player_moves,
            "guidance": _guidance_payload(guidance),
        }
    return {
        "session_id": session.session_id,
        "participant": session.participant,
        "condition": session.condition,
        "day": session.day,
        "games_total": GAMES_PER_SESSION,
        "games_completed": sum(1 for g in session.games if g.outcome is not None),
        "session_complete": session.complete,
        "questionnaire_submitted": session.questionnaire is not None,
        "current": current,
        "games": [
            {"game_index": g.task.index, "phase": g.phase, "outcome": g.outcome,
             "player_moves": g.player_moves}
            for g in session.games
        ],
    }


def create_app(runner: StudyRunner, static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="chesscoach", version=__version__)
    locks: dict = defaultdict(threading.Lock)

    def get_session(session_id: str) -> Session:
        session = runner.sessions.get(session_id)
        if session is None:
            raise ApiError(404, "session_not_found", f"no session {session_id!r}")
        return session

    @app.exception_handler(ApiError)
    async def on_api_error(_: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        try:
            session = runner.create_session(body.participant, body.condition, body.day)
        except StudyError as exc:
            raise ApiError(400, "bad_session_request", str(exc))
        return {"session_id": session.session_id,
                "state": session_state(runner, session)}

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str):
        session = get_session(session_id)
        with locks[session_id]:
            return session_state(runner, session)

    @app.post("/sessions/{session_id}/moves")
    def post_move(session_id: str, body: MoveRequest):
        session = get_session(session_id)
        with locks[session_id]:
            try:
                outcome = runner.submit_move(
                    session, session.current_game, body.move,
                    confirm=body.confirm, move_number=body.move_number)
            except IllegalMoveError as exc:
                raise ApiError(400, "illegal_move", str(exc))
            except SessionError as exc:
                raise ApiError(409 if "already committed" in str(exc) else 400,
                               "bad_move_request", str(exc))
            payload = _outcome_payload(outcome)
            payload["state"] = session_state(runner, session)
            return payload

    @app.post("/sessions/{session_id}/questionnaire")
    def post_questionnaire(session_id: str, body: QuestionnaireRequest):
        session = get_session(session_id)
        with locks[session_id]:
            try:
                runner.record_questionnaire(session, body.likert)
            except DuplicateQuestionnaireError as exc:
                raise ApiError(409, "questionnaire_conflict", str(exc))
            except StudyError as exc:
                raise ApiError(400, "bad_questionnaire", str(exc))
        return {"recorded": True, "likert": body.likert}

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str):
        session = get_session(session_id)
        with locks[session_id]:
            return {"session_id": session_id, "events": list(session.events)}

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
