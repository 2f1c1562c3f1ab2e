// Browser bootstrap: one session, one canvas, one chat box.

import { ApiError, Client, RELATIONS, Scene } from './api.js';
import { candidateBars, canvasSize, renderScene } from './renderer.js';
import {
  ViewState,
  applyError,
  applyHeatmap,
  applyResponse,
  applyUserTurn,
  initialState,
  routeFor,
} from './state.js';

const API_BASE = (window as { TABLETALK_API?: string }).TABLETALK_API ?? 'http://127.0.0.1:8008';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

class App {
  private client = new Client(API_BASE);
  private state!: ViewState;
  private canvas = el<HTMLCanvasElement>('scene');
  private chatLog = el<HTMLDivElement>('chat-log');
  private input = el<HTMLInputElement>('chat-input');
  private sendBtn = el<HTMLButtonElement>('send');
  private yesBtn = el<HTMLButtonElement>('yes');
  private noBtn = el<HTMLButtonElement>('no');
  private modeChip = el<HTMLSpanElement>('mode');
  private sidebar = el<HTMLDivElement>('candidates');
  private relationSel = el<HTMLSelectElement>('relation');
  private refSel = el<HTMLSelectElement>('ref');
  private opacity = el<HTMLInputElement>('opacity');
  private newSceneBtn = el<HTMLButtonElement>('new-scene');

  async start(): Promise<void> {
    for (const rel of RELATIONS) {
      const opt = document.createElement('option');
      opt.value = rel;
      opt.textContent = rel;
      this.relationSel.appendChild(opt);
    }
    await this.newSession();
    this.sendBtn.addEventListener('click', () => void this.send());
    this.input.addEventListener('keydown', (e) => {
      if (e.key === 'Enter') void this.send();
    });
    this.yesBtn.addEventListener('click', () => void this.send('yes'));
    this.noBtn.addEventListener('click', () => void this.send('no'));
    this.newSceneBtn.addEventListener('click', () => void this.newSession());
    this.relationSel.addEventListener('change', () => void this.refreshHeatmap());
    this.refSel.addEventListener('change', () => void this.refreshHeatmap());
    this.opacity.addEventListener('input', () => void this.refreshHeatmap());
  }

  private async newSession(): Promise<void> {
    const created = await this.client.createSession(undefined, {
      n_pick: 6,
      n_place: 2,
      ambiguity: true,
      place_containers_only: true,
    });
    this.state = initialState(created.session_id, created.scene);
    this.syncRefOptions(created.scene);
    this.render();
  }

  private async send(forced?: string): Promise<void> {
    const text = forced ?? this.input.value.trim();
    if (!text || this.state.busy) return;
    this.input.value = '';
    this.state = applyUserTurn(this.state, text);
    this.render();
    const route = routeFor(this.state);
    try {
      const resp =
        route === 'response'
          ? await this.client.response(this.state.sessionId, text)
          : await this.client.instruction(this.state.sessionId, text);
      this.state = applyResponse(this.state, resp);
      this.syncRefOptions(resp.scene);
    } catch (err) {
      const msg = err instanceof ApiError ? `${err.status}: ${err.message}` : String(err);
      this.state = applyError(this.state, msg);
    }
    this.render();
  }

  private syncRefOptions(scene: Scene): void {
    const current = this.refSel.value;
    this.refSel.innerHTML = '';
    const blank = document.createElement('option');
    blank.value = '';
    blank.textContent = '(no heatmap)';
    this.refSel.appendChild(blank);
    for (const obj of scene.objects.filter((o) => o.table === 'place')) {
      const opt = document.createElement('option');
      opt.value = obj.id;
      opt.textContent = `${obj.id} (${obj.color} ${obj.category})`;
      this.refSel.appendChild(opt);
    }
    const values = Array.from(this.refSel.options).map((o) => o.value);
    this.refSel.value = values.includes(current) ? current : '';
  }

  private async refreshHeatmap(): Promise<void> {
    const ref = this.refSel.value;
    const relation = this.relationSel.value;
    if (!ref || !relation) {
      this.state = applyHeatmap(this.state, null);
      this.render();
      return;
    }
    try {
      const maps = await this.client.maps(this.state.sessionId, relation, ref);
      this.state = applyHeatmap(this.state, {
        relation,
        ref,
        grid: maps.grid,
        opacity: Number(this.opacity.value) / 100,
      });
    } catch (err) {
      const msg = err instanceof ApiError ? err.message : String(err);
      this.state = applyError(this.state, `heatmap: ${msg}`);
    }
    this.render();
  }

  private render(): void {
    const scene = this.state.scene;
    if (scene) {
      const size = canvasSize(scene);
      if (this.canvas.width !== size.width) this.canvas.width = size.width;
      if (this.canvas.height !== size.height) this.canvas.height = size.height;
      const ctx = this.canvas.getContext('2d');
      if (ctx) {
        renderScene(ctx, scene, {
          highlighted: this.state.highlighted,
          heatmap: this.state.heatmap,
        });
      }
    }
    this.chatLog.innerHTML = '';
    for (const turn of this.state.transcript) {
      const div = document.createElement('div');
      div.className = `turn ${turn.speaker}`;
      div.textContent = `${turn.speaker === 'user' ? 'you' : 'robot'}: ${turn.text}`;
      this.chatLog.appendChild(div);
    }
    this.chatLog.scrollTop = this.chatLog.scrollHeight;

    const answering = this.state.pendingQuestion;
    this.modeChip.textContent = answering ? 'answering question' : 'instructing';
    this.modeChip.className = answering ? 'chip question' : 'chip';
    this.yesBtn.disabled = !answering;
    this.noBtn.disabled = !answering;
    this.input.placeholder = answering
      ? 'yes / no / correction ("no the red cup")'
      : 'e.g. fetch the yellow thing';

    this.sidebar.innerHTML = '';
    for (const bar of candidateBars(this.state.candidates)) {
      const row = document.createElement('div');
      row.className = 'bar-row' + (bar.id === this.state.highlighted ? ' highlighted' : '');
      const fill = document.createElement('div');
      fill.className = 'bar-fill';
      fill.style.width = `${bar.widthPct}%`;
      const label = document.createElement('span');
      label.textContent = bar.label;
      row.appendChild(fill);
      row.appendChild(label);
      this.sidebar.appendChild(row);
    }
  }
}

void new App().start();
