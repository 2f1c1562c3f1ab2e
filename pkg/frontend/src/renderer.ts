// Grid-accurate top-down canvas rendering of the two tables.
//
// Drawing goes through the Ctx2D subset below so tests can substitute a
// recording context; nothing here reaches back to the server.

import { Candidate, Scene, SceneObject } from './api.js';
import { HeatmapSelection } from './state.js';

export interface Ctx2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  textAlign: CanvasTextAlign;
  textBaseline: CanvasTextBaseline;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
}

export interface Layout {
  cell: number; // pixels per grid cell
  gap: number; // pixels between the two tables
  margin: number;
}

export const DEFAULT_LAYOUT: Layout = { cell: 6, gap: 24, margin: 10 };

const COLOR_CSS: Record<string, string> = {
  red: '#c0392b',
  green: '#27873f',
  blue: '#2563ae',
  yellow: '#d4ac0d',
  black: '#222222',
  white: '#f4f4f4',
};

export function canvasSize(scene: Scene, layout: Layout = DEFAULT_LAYOUT): { width: number; height: number } {
  const { h, w } = scene.grid;
  return {
    width: layout.margin * 2 + layout.cell * w * 2 + layout.gap,
    height: layout.margin * 2 + layout.cell * h + 40, // 40px gripper strip
  };
}

export function tableOrigin(table: 'pick' | 'place', layout: Layout, scene: Scene): { x: number; y: number } {
  const x = table === 'pick' ? layout.margin : layout.margin + scene.grid.w * layout.cell + layout.gap;
  return { x, y: layout.margin };
}

function drawObject(
  ctx: Ctx2D,
  obj: SceneObject,
  ox: number,
  oy: number,
  cell: number,
  highlighted: boolean,
): void {
  const [x0, y0, x1, y1] = obj.bbox;
  const px = ox + x0 * cell;
  const py = oy + y0 * cell;
  const w = (x1 - x0) * cell;
  const h = (y1 - y0) * cell;
  ctx.fillStyle = COLOR_CSS[obj.color] ?? '#888888';
  ctx.fillRect(px, py, w, h);
  ctx.strokeStyle = obj.z_layer > 0 ? '#ff8800' : '#555555';
  ctx.lineWidth = obj.z_layer > 0 ? 2 : 1;
  ctx.strokeRect(px, py, w, h);
  if (obj.is_container && obj.interior) {
    const [ix0, iy0, ix1, iy1] = obj.interior;
    ctx.fillStyle = 'rgba(255,255,255,0.35)';
    ctx.fillRect(ox + ix0 * cell, oy + iy0 * cell, (ix1 - ix0) * cell, (iy1 - iy0) * cell);
  }
  ctx.fillStyle = obj.color === 'black' ? '#ffffff' : '#000000';
  ctx.font = `${Math.max(cell * 1.6, 8)}px sans-serif`;
  ctx.textAlign = 'center';
  ctx.textBaseline = 'middle';
  ctx.fillText(obj.category[0], px + w / 2, py + h / 2);
  if (highlighted) {
    ctx.strokeStyle = '#e91e63';
    ctx.lineWidth = 3;
    ctx.strokeRect(px - 2, py - 2, w + 4, h + 4);
  }
}

export function drawHeatmap(
  ctx: Ctx2D,
  grid: number[][],
  ox: number,
  oy: number,
  cell: number,
  opacity: number,
): number {
  let painted = 0;
  for (let y = 0; y < grid.length; y++) {
    for (let x = 0; x < grid[y].length; x++) {
      const v = grid[y][x];
      if (v <= 0.004) continue; // skip invisible cells
      ctx.fillStyle = `rgba(233,30,99,${(v * opacity).toFixed(3)})`;
      ctx.fillRect(ox + x * cell, oy + y * cell, cell, cell);
      painted++;
    }
  }
  return painted;
}

export interface RenderStats {
  objectsDrawn: number;
  heatmapCells: number;
  highlighted: string | null;
}

export function renderScene(
  ctx: Ctx2D,
  scene: Scene,
  opts: {
    layout?: Layout;
    highlighted?: string | null;
    heatmap?: HeatmapSelection | null;
  } = {},
): RenderStats {
  const layout = opts.layout ?? DEFAULT_LAYOUT;
  const { cell } = layout;
  const size = canvasSize(scene, layout);
  ctx.clearRect(0, 0, size.width, size.height);

  let objectsDrawn = 0;
  for (const table of ['pick', 'place'] as const) {
    const { x: ox, y: oy } = tableOrigin(table, layout, scene);
    ctx.fillStyle = '#e8e0d2';
    ctx.fillRect(ox, oy, scene.grid.w * cell, scene.grid.h * cell);
    ctx.strokeStyle = '#999999';
    ctx.lineWidth = 1;
    ctx.strokeRect(ox, oy, scene.grid.w * cell, scene.grid.h * cell);
    ctx.fillStyle = '#666666';
    ctx.font = '12px sans-serif';
    ctx.textAlign = 'left';
    ctx.textBaseline = 'top';
    ctx.fillText(table === 'pick' ? 'pick table' : 'place table', ox, oy + scene.grid.h * cell + 4);

    const objs = scene.objects
      .filter((o) => o.table === table)
      .sort((a, b) => a.z_layer - b.z_layer || a.id.localeCompare(b.id));
    for (const obj of objs) {
      drawObject(ctx, obj, ox, oy, cell, opts.highlighted === obj.id);
      objectsDrawn++;
    }
  }

  let heatmapCells = 0;
  if (opts.heatmap) {
    const { x: ox, y: oy } = tableOrigin('place', layout, scene);
    heatmapCells = drawHeatmap(ctx, opts.heatmap.grid, ox, oy, cell, opts.heatmap.opacity);
  }

  // gripper strip under the tables
  const stripY = layout.margin + scene.grid.h * cell + 20;
  ctx.fillStyle = '#444444';
  ctx.font = '12px sans-serif';
  ctx.textAlign = 'left';
  ctx.textBaseline = 'top';
  if (scene.gripper) {
    ctx.fillText(
      `gripper: holding ${scene.gripper.color} ${scene.gripper.category} (${scene.gripper.id})`,
      layout.margin,
      stripY,
    );
  } else {
    ctx.fillText('gripper: empty', layout.margin, stripY);
  }

  return { objectsDrawn, heatmapCells, highlighted: opts.highlighted ?? null };
}

export function candidateBars(candidates: Candidate[]): { id: string; widthPct: number; label: string }[] {
  // scores live in [-1, 1]; bars map that to [0, 100]
  return [...candidates]
    .sort((a, b) => b.score - a.score)
    .map((c) => ({
      id: c.id,
      widthPct: Math.round(((c.score + 1) / 2) * 100),
      label: `${c.id}  ${c.score.toFixed(3)}`,
    }));
}
