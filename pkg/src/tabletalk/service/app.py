"""HTTP session service for the browser UI."""

from __future__ import annotations

import logging
import secrets
from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..placement import NoMassAvailable
from ..worldsim import RELATIONS, ObjectNotFound
from .sessions import SessionConflict, SessionStore, UnknownSession

logger = logging.getLogger("tabletalk.service")


class CreateSessionBody(BaseModel):
    seed: Optional[int] = None
    scene_config: Optional[dict] = None


class TextBody(BaseModel):
    text: str


def create_app(store: SessionStore) -> FastAPI:
    app = FastAPI(title="tabletalk", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(UnknownSession)
    async def _unknown_session(request: Request, exc: UnknownSession):
        return JSONResponse(status_code=404, content={"error": "unknown session"})

    @app.exception_handler(SessionConflict)
    async def _conflict(request: Request, exc: SessionConflict):
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.exception_handler(Exception)
    async def _internal(request: Request, exc: Exception):
        error_id = secrets.token_hex(8)
        logger.exception("error %s on %s", error_id, request.url.path)
        return JSONResponse(status_code=500, content={"error": "internal", "error_id": error_id})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        try:
            session = store.create(seed=body.seed, scene_config=body.scene_config)
        except ValueError as e:
            return JSONResponse(status_code=422, content={"error": str(e)})
        return {"session_id": session.id, "scene": session.scene.to_dict()}

    @app.get("/sessions/{session_id}/scene")
    def get_scene(session_id: str):
        return store.get(session_id).scene.to_dict()

    @app.post("/sessions/{session_id}/instruction")
    def instruction(session_id: str, body: TextBody):
        session = store.get(session_id)
        return store.handle_text(session, body.text, expect_response=False)

    @app.post("/sessions/{session_id}/response")
    def response(session_id: str, body: TextBody):
        session = store.get(session_id)
        return store.handle_text(session, body.text, expect_response=True)

    @app.get("/sessions/{session_id}/maps/{relation}")
    def maps(session_id: str, relation: str, ref: str = Query(...)):
        session = store.get(session_id)
        if relation not in RELATIONS:
            return JSONResponse(status_code=422, content={"error": f"unknown relation {relation!r}"})
        try:
            with session.lock:
                prob_maps = store.bundle.placement_maps(session.scene, "place", ref)
        except ObjectNotFound:
            return JSONResponse(status_code=404, content={"error": f"no object {ref!r}"})
        except NoMassAvailable:
            return JSONResponse(status_code=422, content={"error": "relation inapplicable"})
        grid = [[float(v) for v in row] for row in prob_maps.channel(relation)]
        return {"relation": relation, "ref": ref, "grid": grid}

    @app.get("/sessions/{session_id}/transcript")
    def transcript(session_id: str):
        session = store.get(session_id)
        return {"turns": [{"speaker": s, "text": t} for s, t in session.state.transcript]}

    return app
