"""Dialogue state machine types."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

PHASES = ("idle", "awaiting_confirmation", "holding_object")

YES_TOKENS = frozenset({"yes", "yeah"})
NO_TOKENS = frozenset({"no", "nope"})


@dataclass
class SystemAction:
    kind: str  # question | picked | pick_failed | placed | error | info
    text: str
    payload: dict = field(default_factory=dict)


@dataclass
class DialogueState:
    phase: str = "idle"
    pending_tokens: list = field(default_factory=list)
    candidate_queue: list = field(default_factory=list)  # ids, descending score
    confirmed_target: Optional[str] = None
    transcript: list = field(default_factory=list)  # (speaker, text)
    pending_intent: Optional[str] = None  # pick | place
    pending_relation: Optional[str] = None

    def check(self, scene) -> None:
        assert (self.phase == "awaiting_confirmation") == bool(self.candidate_queue)
        if self.phase == "holding_object":
            assert scene.gripper is not None

    def say(self, speaker: str, text: str) -> None:
        self.transcript.append((speaker, text))


@dataclass
class TaskStep:
    text: str
    intended_target_id: Optional[str] = None
    intended_ref_id: Optional[str] = None
    intended_relation: Optional[str] = None


@dataclass
class TaskScript:
    steps: list  # TaskStep or plain strings

    def __post_init__(self):
        self.steps = [
            s if isinstance(s, TaskStep) else TaskStep(text=str(s)) for s in self.steps
        ]


class ScriptedUser:
    """Truthful yes/no answerer: confirms exactly the intended object."""

    def answer(self, action: SystemAction, step: TaskStep) -> str:
        asked = action.payload.get("candidate_id")
        if action.payload.get("intent") == "place":
            wanted = step.intended_ref_id
        else:
            wanted = step.intended_target_id
        if wanted is None:
            return "yes"
        return "yes" if asked == wanted else "no"
