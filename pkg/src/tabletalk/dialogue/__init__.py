"""Instruction intake, clarification dialogue, and task execution."""

from .executor import StepResult, retry_pick, step
from .state import (
    NO_TOKENS,
    YES_TOKENS,
    DialogueState,
    ScriptedUser,
    SystemAction,
    TaskScript,
    TaskStep,
)
from .tasks import RetryExhausted, TaskResult, make_tidy_scene, run_task

__all__ = [
    "DialogueState",
    "SystemAction",
    "TaskScript",
    "TaskStep",
    "ScriptedUser",
    "YES_TOKENS",
    "NO_TOKENS",
    "step",
    "retry_pick",
    "StepResult",
    "run_task",
    "TaskResult",
    "RetryExhausted",
    "make_tidy_scene",
]
