"""Scripted multi-step tasks and their metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..evaluation.report import TaskMetrics
from ..language import make_pick_instruction, make_place_instruction
from ..seeding import derive_seed
from ..worldsim import (
    COLORS,
    Scene,
    SceneConfig,
    SceneObject,
    generate_scene,
)
from .executor import retry_pick, step
from .state import DialogueState, ScriptedUser, TaskScript, TaskStep

MAX_QUESTIONS_PER_STEP = 12


@dataclass
class TaskResult:
    scene: Scene
    metrics: TaskMetrics
    transcript: list
    records: list = field(default_factory=list)


class RetryExhausted(Exception):
    pass


def run_task(
    script: TaskScript,
    scene: Scene,
    bundle,
    grasp_p: float = 1.0,
    place_p: float = 1.0,
    seed: int = 0,
    scripted_user: ScriptedUser | None = None,
    max_retries: int = 5,
) -> TaskResult:
    """Execute the script's instructions in order; collect TaskMetrics.

    Failed grasps are retried (regrasp records) up to max_retries; an
    exhausted retry budget marks the sub-task failed and moves on.
    """
    state = DialogueState()
    metrics = TaskMetrics()
    all_records = []
    questions = 0
    commands = 0

    for i, task_step in enumerate(script.steps):
        commands += 1
        all_records.append({"kind": "command", "payload": {"text": task_step.text}})
        step_seed = derive_seed(seed, "step", i)
        res = step(state, scene, task_step.text, bundle, step_seed, grasp_p, place_p)
        all_records.extend(res.records)
        scene, state = res.scene, res.state
        asked = 0
        while res.action.kind == "question" and scripted_user is not None:
            asked += 1
            questions += 1
            if asked > MAX_QUESTIONS_PER_STEP or "reason" in res.action.payload:
                break
            answer = scripted_user.answer(res.action, task_step)
            res = step(
                state, scene, answer, bundle,
                derive_seed(step_seed, "answer", asked), grasp_p, place_p,
            )
            all_records.extend(res.records)
            scene, state = res.scene, res.state

        retries = 0
        while res.action.kind == "pick_failed":
            if retries >= max_retries:
                all_records.append(
                    {"kind": "retry_exhausted", "payload": {"step": i}}
                )
                break
            retries += 1
            res = retry_pick(
                state, scene, res.action.payload["object_id"], grasp_p,
                derive_seed(step_seed, "retry", retries),
            )
            all_records.extend(res.records)
            scene, state = res.scene, res.state

        _judge(metrics, all_records, res, task_step)

    picks = sum(1 for r in all_records if r["kind"] == "pick_attempt")
    places = sum(1 for r in all_records if r["kind"] == "place")
    succ = sum(1 for r in all_records if r["kind"] == "pick_attempt" and r["payload"]["success"])
    sat = sum(1 for r in all_records if r["kind"] == "place" and r["payload"].get("satisfied"))
    metrics.grasping = (succ, picks)
    metrics.placing_success = (sat, places)
    metrics.feedback = (questions, commands)
    metrics.task_lengths = [picks + places]
    return TaskResult(scene=scene, metrics=metrics, transcript=list(state.transcript), records=all_records)


def _judge(metrics, records, res, task_step: TaskStep):
    """Score ground-truth-annotated steps."""
    action = res.action
    if task_step.intended_target_id is not None and action.kind in ("picked", "pick_failed"):
        ok = action.payload.get("object_id") == task_step.intended_target_id
        c, t = metrics.target_selection
        metrics.target_selection = (c + ok, t + 1)
        records.append(
            {"kind": "judgement", "payload": {"stage": "target_selection", "correct": ok}}
        )
    if task_step.intended_ref_id is not None and action.kind == "placed":
        ok = action.payload.get("ref_id") == task_step.intended_ref_id
        c, t = metrics.placing_base_grounding
        metrics.placing_base_grounding = (c + ok, t + 1)
        records.append(
            {"kind": "judgement", "payload": {"stage": "placing_base_grounding", "correct": ok}}
        )
        full = (
            ok
            and action.payload.get("satisfied", False)
            and (task_step.intended_relation in (None, action.payload.get("relation")))
        )
        c, t = metrics.pick_and_place
        metrics.pick_and_place = (c + full, t + 1)
        records.append(
            {"kind": "judgement", "payload": {"stage": "pick_and_place", "correct": full}}
        )


def make_tidy_scene(seed: int = 0, grid: int = 64) -> tuple:
    """Four uniquely-colored objects to route into two place-table boxes.

    Returns (scene, script): the canonical tidy-up benchmark. Pick
    instructions are attribute-unique; place instructions route the
    first two objects into the leftmost box and the rest into the
    rightmost box.
    """
    scene = Scene(grid_h=grid, grid_w=grid, rng_seed=seed, scene_id=f"tidy-{seed}")
    layout = [
        ("ball", "red", (12, 20)),
        ("cup", "green", (30, 14)),
        ("banana", "yellow", (46, 22)),
        ("teddy", "blue", (20, 44)),
    ]
    for i, (cat, col, ctr) in enumerate(layout):
        scene.objects.append(
            SceneObject(
                id=f"t{i+1}", category=cat, color=col, size="medium", center=ctr, table="pick"
            )
        )
    scene.objects.append(
        SceneObject(
            id="binL", category="box", color="black", size="large", center=(16, 32),
            is_container=True, table="place",
        )
    )
    scene.objects.append(
        SceneObject(
            id="binR", category="box", color="white", size="large", center=(48, 32),
            is_container=True, table="place",
        )
    )
    steps = []
    for i, (cat, col, _) in enumerate(layout):
        bin_id = "binL" if i < 2 else "binR"
        bin_sel = "leftmost" if i < 2 else "rightmost"
        steps.append(
            TaskStep(
                text=make_pick_instruction(f"the {col} {cat}", derive_seed(seed, "pv", i)),
                intended_target_id=f"t{i+1}",
            )
        )
        steps.append(
            TaskStep(
                text=make_place_instruction(
                    "inside", f"the {bin_sel} box", derive_seed(seed, "pl", i)
                ),
                intended_ref_id=bin_id,
                intended_relation="inside",
            )
        )
    return scene, TaskScript(steps=steps)
