"""Event-sourced dialogue sessions with JSON-lines persistence.

Every state transition is appended to the session's log before any
response leaves the service, so replaying the log against the same
bundle reconstructs the exact session state (including after a crash).
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..dialogue import DialogueState, step
from ..seeding import derive_seed
from ..worldsim import Scene, SceneConfig, generate_scene

LOG_SCHEMA = 1


class UnknownSession(KeyError):
    pass


class SessionConflict(Exception):
    pass


@dataclass
class Session:
    id: str
    scene: Scene
    state: DialogueState
    master_seed: int
    log_path: Path
    grasp_p: float = 1.0
    place_p: float = 1.0
    step_count: int = 0
    created_at: float = field(default_factory=time.time)
    last_active: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def append_log(self, record: dict) -> None:
        with open(self.log_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record, sort_keys=True) + "\n")


def _build_scene(seed: int, scene_config: Optional[dict], grid: int) -> Scene:
    cfg = SceneConfig(grid_h=grid, grid_w=grid)
    for key, value in (scene_config or {}).items():
        if not hasattr(cfg, key):
            raise ValueError(f"unknown scene_config key {key!r}")
        setattr(cfg, key, value)
    return generate_scene(cfg, seed)


class SessionStore:
    def __init__(self, data_dir, bundle, grid: int = 64, grasp_p: float = 1.0,
                 place_p: float = 1.0, ttl_seconds: int = 3600):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.bundle = bundle
        self.grid = grid
        self.grasp_p = grasp_p
        self.place_p = place_p
        self.ttl = ttl_seconds
        self._sessions: dict = {}
        self._registry_lock = threading.Lock()

    def create(self, seed: Optional[int] = None, scene_config: Optional[dict] = None) -> Session:
        if seed is None:
            seed = secrets.randbits(32)
        scene = _build_scene(seed, scene_config, self.grid)
        sid = secrets.token_hex(16)
        session = Session(
            id=sid,
            scene=scene,
            state=DialogueState(),
            master_seed=seed,
            log_path=self.data_dir / f"session-{sid}.jsonl",
            grasp_p=self.grasp_p,
            place_p=self.place_p,
        )
        session.append_log(
            {
                "kind": "session_created",
                "schema": LOG_SCHEMA,
                "payload": {
                    "session_id": sid,
                    "seed": seed,
                    "scene_config": scene_config or {},
                    "grid": self.grid,
                    "grasp_p": self.grasp_p,
                    "place_p": self.place_p,
                    "scene_hash": scene.hash(),
                },
            }
        )
        with self._registry_lock:
            self._sessions[sid] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise UnknownSession(session_id)
            if time.time() - session.last_active > self.ttl:
                del self._sessions[session_id]
                raise UnknownSession(session_id)
            return session

    def sweep_expired(self) -> int:
        now = time.time()
        with self._registry_lock:
            dead = [sid for sid, s in self._sessions.items() if now - s.last_active > self.ttl]
            for sid in dead:
                del self._sessions[sid]
        return len(dead)

    def handle_text(self, session: Session, text: str, expect_response: bool) -> dict:
        """Run one dialogue step under the session lock; log, then respond."""
        with session.lock:
            awaiting = session.state.phase == "awaiting_confirmation"
            if expect_response and not awaiting:
                raise SessionConflict("no question is pending")
            if not expect_response and awaiting:
                raise SessionConflict("a question is awaiting a response; POST to /response")
            step_seed = derive_seed(session.master_seed, "turn", session.step_count)
            result = step(
                session.state, session.scene, text, self.bundle,
                seed=step_seed, grasp_p=session.grasp_p, place_p=session.place_p,
            )
            session.scene = result.scene
            session.state = result.state
            session.step_count += 1
            session.last_active = time.time()
            for record in result.records:
                session.append_log(record)
            session.append_log(
                {
                    "kind": "system_action",
                    "payload": {
                        "action": result.action.kind,
                        "text": result.action.text,
                        "turn": session.step_count,
                        "scene_hash": session.scene.hash(),
                    },
                }
            )
            return {
                "action": _wire_action(result.action.kind),
                "detail": result.action.text,
                "scene": session.scene.to_dict(),
                "candidates": result.action.payload.get("candidates"),
            }


def _wire_action(kind: str) -> str:
    return {
        "picked": "picked",
        "placed": "placed",
        "question": "question",
    }.get(kind, "error")


def replay_session(log_path, bundle) -> tuple:
    """Re-execute a session log; returns (scene, state, verified).

    `verified` is True when every logged scene hash (including the final
    one) matches the re-executed scene byte-for-byte.
    """
    scene = None
    state = DialogueState()
    master_seed = 0
    grasp_p = place_p = 1.0
    step_count = 0
    verified = True
    with open(log_path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            kind = rec.get("kind")
            payload = rec.get("payload", {})
            if kind == "session_created":
                master_seed = payload["seed"]
                grasp_p = payload.get("grasp_p", 1.0)
                place_p = payload.get("place_p", 1.0)
                scene = _build_scene(master_seed, payload.get("scene_config"), payload.get("grid", 64))
                verified &= scene.hash() == payload["scene_hash"]
            elif kind == "user_turn":
                if scene is None:
                    raise ValueError("log has a user_turn before session_created")
                step_seed = derive_seed(master_seed, "turn", step_count)
                result = step(
                    state, scene, payload["text"], bundle,
                    seed=step_seed, grasp_p=grasp_p, place_p=place_p,
                )
                scene, state = result.scene, result.state
                step_count += 1
            elif kind == "system_action":
                verified &= payload.get("scene_hash") == scene.hash()
    return scene, state, verified
