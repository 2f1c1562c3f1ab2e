import { describe, expect, it } from 'vitest';

import type { ActionResponse, Scene } from '../src/api.js';
import { applyError, applyResponse, applyUserTurn, initialState, routeFor } from '../src/state.js';

const scene: Scene = {
  schema: 1,
  grid: { h: 64, w: 64 },
  objects: [],
  gripper: null,
  event_log: [],
  rng_seed: 0,
  scene_id: 's',
};

function resp(action: ActionResponse['action'], extra: Partial<ActionResponse> = {}): ActionResponse {
  return { action, detail: `${action} happened`, scene, candidates: null, ...extra };
}

describe('routing', () => {
  it('routes to /instruction when idle and /response while a question pends', () => {
    let state = initialState('sid', scene);
    expect(routeFor(state)).toBe('instruction');
    state = applyResponse(state, resp('question', {
      candidates: [
        { id: 'a', score: 0.9, bbox: [0, 0, 1, 1] },
        { id: 'b', score: 0.85, bbox: [0, 0, 1, 1] },
      ],
    }));
    expect(state.pendingQuestion).toBe(true);
    expect(routeFor(state)).toBe('response');
    state = applyResponse(state, resp('picked'));
    expect(routeFor(state)).toBe('instruction');
  });
});

describe('applyResponse', () => {
  it('highlights the top-scored candidate on questions', () => {
    const state = applyResponse(initialState('sid', scene), resp('question', {
      candidates: [
        { id: 'weak', score: 0.2, bbox: [0, 0, 1, 1] },
        { id: 'strong', score: 0.8, bbox: [0, 0, 1, 1] },
      ],
    }));
    expect(state.highlighted).toBe('strong');
    expect(state.candidates.length).toBe(2);
  });

  it('clears highlight and heatmap after a pick', () => {
    let state = initialState('sid', scene);
    state = { ...state, heatmap: { relation: 'left', ref: 'x', grid: [[1]], opacity: 1 } };
    state = applyResponse(state, resp('picked'));
    expect(state.highlighted).toBeNull();
    expect(state.heatmap).toBeNull();
    expect(state.pendingQuestion).toBe(false);
  });

  it('appends both speakers to the transcript in order', () => {
    let state = initialState('sid', scene);
    state = applyUserTurn(state, 'fetch the cup');
    state = applyResponse(state, resp('picked'));
    expect(state.transcript.map((t) => t.speaker)).toEqual(['user', 'robot']);
  });

  it('records errors as robot turns without corrupting state', () => {
    let state = initialState('sid', scene);
    state = applyUserTurn(state, 'hello');
    state = applyError(state, 'network down');
    expect(state.busy).toBe(false);
    expect(state.transcript.at(-1)?.text).toContain('network down');
  });
});
