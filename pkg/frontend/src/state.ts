// View state: a pure record updated from server responses only.
// The client renders what the server said; it never infers.

import { ActionResponse, Candidate, Scene } from './api.js';

export interface ChatTurn {
  speaker: 'user' | 'robot';
  text: string;
}

export interface HeatmapSelection {
  relation: string;
  ref: string;
  grid: number[][];
  opacity: number;
}

export interface ViewState {
  sessionId: string;
  scene: Scene | null;
  transcript: ChatTurn[];
  candidates: Candidate[];
  highlighted: string | null; // candidate the pending question asks about
  heatmap: HeatmapSelection | null;
  pendingQuestion: boolean;
  busy: boolean;
}

export function initialState(sessionId: string, scene: Scene): ViewState {
  return {
    sessionId,
    scene,
    transcript: [],
    candidates: [],
    highlighted: null,
    heatmap: null,
    pendingQuestion: false,
    busy: false,
  };
}

// Route rule: while a question is pending, every input is a response,
// never a fresh instruction.
export function routeFor(state: ViewState): 'instruction' | 'response' {
  return state.pendingQuestion ? 'response' : 'instruction';
}

export function applyUserTurn(state: ViewState, text: string): ViewState {
  return { ...state, transcript: [...state.transcript, { speaker: 'user', text }], busy: true };
}

export function applyResponse(state: ViewState, resp: ActionResponse): ViewState {
  const pending = resp.action === 'question';
  let highlighted: string | null = null;
  if (pending && resp.candidates && resp.candidates.length > 0) {
    // the queue head (highest score) is the one being asked about
    highlighted = [...resp.candidates].sort((a, b) => b.score - a.score)[0].id;
  }
  return {
    ...state,
    scene: resp.scene,
    transcript: [...state.transcript, { speaker: 'robot', text: resp.detail }],
    candidates: resp.candidates ?? (pending ? state.candidates : []),
    highlighted,
    pendingQuestion: pending,
    busy: false,
    // a scene change invalidates any precomputed heatmap overlay
    heatmap: resp.action === 'picked' || resp.action === 'placed' ? null : state.heatmap,
  };
}

export function applyError(state: ViewState, message: string): ViewState {
  return {
    ...state,
    transcript: [...state.transcript, { speaker: 'robot', text: `[error] ${message}` }],
    busy: false,
  };
}

export function applyHeatmap(state: ViewState, sel: HeatmapSelection | null): ViewState {
  return { ...state, heatmap: sel };
}
