"""The interactive control loop.

One step consumes one user utterance. Pick-intent text is comprehended
over the pick table; more than one candidate within the score margin
triggers a clarification question built from a generated discriminative
expression. Confirmation answers walk the candidate queue; any other
reply re-grounds against the full candidate set. Holding an object plus
a relation phrase is place intent: the reference is grounded with the
same machinery, a location is sampled from the predicted maps, and the
gripper opens there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..language import NoRelationFound, spot_relation_span, strip_pick_verbs, tokenize
from ..placement import NoMassAvailable, sample_location
from ..seeding import derive_seed
from ..worldsim import RELATIONS, Scene, pick, place, relation_oracle
from .state import NO_TOKENS, YES_TOKENS, DialogueState, SystemAction


@dataclass
class StepResult:
    state: DialogueState
    scene: Scene
    action: SystemAction
    records: list = field(default_factory=list)  # ActionRecord dicts


def _record(kind: str, **payload) -> dict:
    return {"kind": kind, "payload": payload}


def _ask(state, scene, bundle, intent, seed, records) -> SystemAction:
    head = state.candidate_queue[0]
    table = "place" if intent == "place" else "pick"
    description = bundle.describe(scene, table, head, seed=seed)
    action = SystemAction(
        kind="question",
        text=f"Do you mean {description}?",
        payload={"candidate_id": head, "intent": intent},
    )
    state.phase = "awaiting_confirmation"
    records.append(_record("question", candidate_id=head, intent=intent))
    return action


def _execute_pick(state, scene, target_id, grasp_p, seed, records):
    outcome = pick(scene, target_id, grasp_p, derive_seed(seed, "grasp", target_id))
    records.append(_record("pick_attempt", object_id=target_id, success=outcome.success))
    state.candidate_queue = []
    state.confirmed_target = target_id
    state.pending_intent = None
    if outcome.success:
        state.phase = "holding_object"
        action = SystemAction(
            kind="picked", text=f"Picked up {target_id}.", payload={"object_id": target_id}
        )
    else:
        state.phase = "idle"
        action = SystemAction(
            kind="pick_failed",
            text=f"Grasp of {target_id} failed.",
            payload={"object_id": target_id},
        )
    return outcome.scene, action


def _execute_place(state, scene, ref_id, relation, bundle, place_p, seed, records):
    held = scene.gripper
    try:
        maps = bundle.placement_maps(scene, "place", ref_id)
        u, v = sample_location(maps, relation, derive_seed(seed, "sample", ref_id, relation))
    except NoMassAvailable:
        state.candidate_queue = []
        state.phase = "holding_object"
        return scene, SystemAction(
            kind="error",
            text=f"I cannot find anywhere {relation} {ref_id} to place this.",
            payload={"ref_id": ref_id, "relation": relation},
        )
    rng = np.random.default_rng(np.random.PCG64(derive_seed(seed, "slip", ref_id)))
    if rng.random() >= place_p:
        # placement execution slip: the release lands a few cells off
        u = int(min(max(u + rng.integers(-3, 4), 0), scene.grid_w - 1))
        v = int(min(max(v + rng.integers(-3, 4), 0), scene.grid_h - 1))
    outcome = place(scene, (u, v), "place")
    after = outcome.scene
    ref = after.find(ref_id)
    # satisfaction is judged at the sampled cell, the granularity the
    # maps are defined on; the outcome kind records what the object's
    # real footprint did (nudges, overhangs)
    satisfied = relation in relation_oracle(after, (u, v, u + 1, v + 1), ref)
    records.append(
        _record(
            "place",
            object_id=held.id,
            ref_id=ref_id,
            relation=relation,
            location=[int(u), int(v)],
            outcome=outcome.kind,
            satisfied=satisfied,
        )
    )
    state.phase = "idle"
    state.candidate_queue = []
    state.pending_intent = None
    state.pending_relation = None
    state.confirmed_target = None
    return after, SystemAction(
        kind="placed",
        text=f"Placed {held.id} {relation} {ref_id}.",
        payload={
            "object_id": held.id,
            "ref_id": ref_id,
            "relation": relation,
            "outcome": outcome.kind,
            "satisfied": satisfied,
        },
    )


def _ground_and_act(state, scene, expr_tokens, intent, bundle, grasp_p, place_p, seed, records):
    table = "place" if intent == "place" else "pick"
    if not scene.objects_on(table):
        state.candidate_queue = []
        state.phase = "holding_object" if scene.gripper is not None else "idle"
        return scene, SystemAction(
            kind="error",
            text=f"There is nothing on the {table} table.",
            payload={"reason": "no_candidates"},
        )
    result = bundle.comprehend_tokens(scene, table, expr_tokens, seed=derive_seed(seed, "cands"))
    state.pending_tokens = list(expr_tokens)
    state.pending_intent = intent
    candidates = [
        {"id": cid, "score": result.scores[cid], "bbox": list(scene.find(cid).bbox)}
        for cid in result.ranking
    ]
    if len(result.ambiguous_set) > 1:
        state.candidate_queue = list(result.ambiguous_set)
        scene, action = scene, _ask(state, scene, bundle, intent, seed, records)
        action.payload["candidates"] = candidates
        return scene, action
    target = result.ranking[0]
    if intent == "pick":
        scene, action = _execute_pick(state, scene, target, grasp_p, seed, records)
    else:
        scene, action = _execute_place(
            state, scene, target, state.pending_relation, bundle, place_p, seed, records
        )
    action.payload["candidates"] = candidates
    return scene, action


def step(
    state: DialogueState,
    scene: Scene,
    user_text: str,
    bundle,
    seed: int,
    grasp_p: float = 1.0,
    place_p: float = 1.0,
) -> StepResult:
    records = [_record("user_turn", text=user_text)]
    state.say("user", user_text)
    tokens = tokenize(user_text)
    if not tokens:
        action = SystemAction(kind="error", text="Say something like 'fetch the red cup'.")
        state.say("system", action.text)
        return StepResult(state=state, scene=scene, action=action, records=records)

    if state.phase == "awaiting_confirmation":
        scene, action = _handle_confirmation(
            state, scene, tokens, bundle, grasp_p, place_p, seed, records
        )
    elif scene.gripper is not None:
        scene, action = _handle_holding(
            state, scene, tokens, bundle, grasp_p, place_p, seed, records
        )
    else:
        # pick intent
        expr = strip_pick_verbs(tokens)
        scene, action = _ground_and_act(
            state, scene, expr, "pick", bundle, grasp_p, place_p, seed, records
        )
    state.say("system", action.text)
    state.check(scene)
    return StepResult(state=state, scene=scene, action=action, records=records)


def _handle_confirmation(state, scene, tokens, bundle, grasp_p, place_p, seed, records):
    intent = state.pending_intent or "pick"
    if len(tokens) == 1 and tokens[0] in YES_TOKENS:
        target = state.candidate_queue[0]
        state.confirmed_target = target
        if intent == "pick":
            return _execute_pick(state, scene, target, grasp_p, seed, records)
        return _execute_place(
            state, scene, target, state.pending_relation, bundle, place_p, seed, records
        )
    if len(tokens) == 1 and tokens[0] in NO_TOKENS:
        state.candidate_queue = state.candidate_queue[1:]
        if state.candidate_queue:
            return scene, _ask(state, scene, bundle, intent, seed, records)
        state.phase = "holding_object" if scene.gripper is not None else "idle"
        state.pending_intent = None
        return scene, SystemAction(
            kind="error",
            text="Sorry, I am out of guesses. Please rephrase the instruction.",
            payload={"reason": "queue_exhausted"},
        )
    # correcting response: re-ground the new expression on the full set
    state.candidate_queue = []
    state.phase = "holding_object" if scene.gripper is not None else "idle"
    expr = tokens[1:] if tokens[0] in NO_TOKENS else tokens
    if intent == "pick":
        expr = strip_pick_verbs(expr)
    return _ground_and_act(
        state, scene, expr, intent, bundle, grasp_p, place_p, derive_seed(seed, "correct"), records
    )


def _handle_holding(state, scene, tokens, bundle, grasp_p, place_p, seed, records):
    try:
        label, start, end = spot_relation_span(tokens)
    except NoRelationFound:
        return scene, SystemAction(
            kind="question",
            text="Where should I place it?",
            payload={"reason": "no_relation"},
        )
    if label not in RELATIONS:
        raise AssertionError(f"lexicon produced unknown relation {label!r}")
    state.pending_relation = label
    ref_tokens = tokens[end:]
    if not ref_tokens:
        return scene, SystemAction(
            kind="question",
            text="Which object should I place it relative to?",
            payload={"reason": "no_reference"},
        )
    return _ground_and_act(
        state, scene, ref_tokens, "place", bundle, grasp_p, place_p, seed, records
    )


def retry_pick(state: DialogueState, scene: Scene, object_id: str, grasp_p: float, seed: int) -> StepResult:
    """Re-execute a failed grasp without re-grounding (a regrasp)."""
    records = [_record("regrasp", object_id=object_id)]
    scene, action = _execute_pick(state, scene, object_id, grasp_p, seed, records)
    state.say("system", action.text)
    return StepResult(state=state, scene=scene, action=action, records=records)
