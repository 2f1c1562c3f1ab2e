"""HTTP session service and JSON-lines session persistence."""

from .app import create_app
from .sessions import (
    Session,
    SessionConflict,
    SessionStore,
    UnknownSession,
    replay_session,
)

__all__ = [
    "create_app",
    "SessionStore",
    "Session",
    "SessionConflict",
    "UnknownSession",
    "replay_session",
]
