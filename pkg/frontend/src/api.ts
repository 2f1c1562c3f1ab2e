// Typed client for the tabletalk session service.

export interface SceneObject {
  id: string;
  category: string;
  color: string;
  size: string;
  center: [number, number];
  z_layer: number;
  is_container: boolean;
  table: 'pick' | 'place';
  bbox: [number, number, number, number];
  interior: [number, number, number, number] | null;
}

export interface Scene {
  schema: number;
  grid: { h: number; w: number };
  objects: SceneObject[];
  gripper: SceneObject | null;
  event_log: unknown[];
  rng_seed: number;
  scene_id: string;
}

export interface Candidate {
  id: string;
  score: number;
  bbox: [number, number, number, number];
}

export type ActionKind = 'picked' | 'placed' | 'question' | 'error';

export interface ActionResponse {
  action: ActionKind;
  detail: string;
  scene: Scene;
  candidates: Candidate[] | null;
}

export interface CreateSessionResponse {
  session_id: string;
  scene: Scene;
}

export interface MapsResponse {
  relation: string;
  ref: string;
  grid: number[][];
}

export const RELATIONS = ['inside', 'left', 'right', 'in_front', 'behind', 'on_top'] as const;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(base + path, {
    headers: { 'Content-Type': 'application/json' },
    ...init,
  });
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      detail = body.error ?? detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class Client {
  constructor(private base: string) {}

  createSession(seed?: number, sceneConfig?: Record<string, unknown>): Promise<CreateSessionResponse> {
    return request(this.base, '/sessions', {
      method: 'POST',
      body: JSON.stringify({ seed: seed ?? null, scene_config: sceneConfig ?? null }),
    });
  }

  getScene(sessionId: string): Promise<Scene> {
    return request(this.base, `/sessions/${sessionId}/scene`);
  }

  instruction(sessionId: string, text: string): Promise<ActionResponse> {
    return request(this.base, `/sessions/${sessionId}/instruction`, {
      method: 'POST',
      body: JSON.stringify({ text }),
    });
  }

  response(sessionId: string, text: string): Promise<ActionResponse> {
    return request(this.base, `/sessions/${sessionId}/response`, {
      method: 'POST',
      body: JSON.stringify({ text }),
    });
  }

  maps(sessionId: string, relation: string, ref: string): Promise<MapsResponse> {
    return request(this.base, `/sessions/${sessionId}/maps/${relation}?ref=${encodeURIComponent(ref)}`);
  }

  transcript(sessionId: string): Promise<{ turns: { speaker: string; text: string }[] }> {
    return request(this.base, `/sessions/${sessionId}/transcript`);
  }

  health(): Promise<{ status: string }> {
    return request(this.base, '/healthz');
  }
}
