import { describe, expect, it } from 'vitest';

import type { Scene, SceneObject } from '../src/api.js';
import { DEFAULT_LAYOUT, candidateBars, drawHeatmap, renderScene, tableOrigin } from '../src/renderer.js';
import { FakeContext } from './fake_canvas.js';

function obj(partial: Partial<SceneObject> & { id: string }): SceneObject {
  return {
    category: 'cup',
    color: 'red',
    size: 'medium',
    center: [20, 20],
    z_layer: 0,
    is_container: false,
    table: 'pick',
    bbox: [18, 18, 23, 23],
    interior: null,
    ...partial,
  } as SceneObject;
}

function scene(objects: SceneObject[], gripper: SceneObject | null = null): Scene {
  return {
    schema: 1,
    grid: { h: 64, w: 64 },
    objects,
    gripper,
    event_log: [],
    rng_seed: 0,
    scene_id: 's',
  };
}

describe('renderScene', () => {
  it('draws two empty table rectangles for an empty scene', () => {
    const ctx = new FakeContext();
    const stats = renderScene(ctx, scene([]));
    expect(stats.objectsDrawn).toBe(0);
    const tables = ctx.byOp('fillRect').filter((o) => o.fillStyle === '#e8e0d2');
    expect(tables.length).toBe(2);
    expect(ctx.byOp('clearRect').length).toBe(1);
  });

  it('draws one filled rect per object, scaled to the grid', () => {
    const objs = [
      obj({ id: 'a' }),
      obj({ id: 'b', color: 'blue', center: [40, 40], bbox: [38, 38, 43, 43] }),
      obj({ id: 'c', table: 'place', color: 'yellow' }),
    ];
    const ctx = new FakeContext();
    const stats = renderScene(ctx, scene(objs));
    expect(stats.objectsDrawn).toBe(3);
    const cell = DEFAULT_LAYOUT.cell;
    const { x: ox, y: oy } = tableOrigin('pick', DEFAULT_LAYOUT, scene(objs));
    const objectRects = ctx.byOp('fillRect').filter((o) => o.fillStyle.startsWith('#') && o.fillStyle !== '#e8e0d2');
    expect(objectRects.length).toBeGreaterThanOrEqual(3);
    expect(objectRects[0].args).toEqual([ox + 18 * cell, oy + 18 * cell, 5 * cell, 5 * cell]);
  });

  it('marks the highlighted candidate with a thick stroke', () => {
    const ctx = new FakeContext();
    renderScene(ctx, scene([obj({ id: 'a' }), obj({ id: 'b', center: [40, 40], bbox: [38, 38, 43, 43] })]), {
      highlighted: 'b',
    });
    const highlight = ctx.byOp('strokeRect').filter((o) => o.strokeStyle === '#e91e63');
    expect(highlight.length).toBe(1);
  });

  it('shows the held object in the gripper strip', () => {
    const held = obj({ id: 'h', color: 'green', category: 'ball' });
    const ctx = new FakeContext();
    renderScene(ctx, scene([], held));
    const texts = ctx.byOp('fillText').map((o) => o.args[0]);
    expect(texts.some((t) => String(t).includes('holding green ball'))).toBe(true);
  });

  it('renders container interiors lighter', () => {
    const box = obj({
      id: 'bin',
      category: 'box',
      is_container: true,
      bbox: [10, 10, 21, 21],
      interior: [11, 11, 20, 20],
      table: 'place',
    });
    const ctx = new FakeContext();
    renderScene(ctx, scene([box]));
    const interior = ctx.byOp('fillRect').filter((o) => o.fillStyle === 'rgba(255,255,255,0.35)');
    expect(interior.length).toBe(1);
  });
});

describe('drawHeatmap', () => {
  it('paints exactly the cells above threshold with value-proportional alpha', () => {
    const grid = [
      [0, 0.5, 0],
      [1.0, 0, 0.002],
    ];
    const ctx = new FakeContext();
    const painted = drawHeatmap(ctx, grid, 0, 0, 10, 0.8);
    expect(painted).toBe(2); // 0.002 is under the visibility threshold
    const rects = ctx.byOp('fillRect');
    expect(rects.length).toBe(2);
    expect(rects[0].fillStyle).toBe(`rgba(233,30,99,${(0.5 * 0.8).toFixed(3)})`);
    expect(rects[0].args).toEqual([10, 0, 10, 10]);
    expect(rects[1].fillStyle).toBe(`rgba(233,30,99,${(1.0 * 0.8).toFixed(3)})`);
  });

  it('sampled cell alpha tracks the grid value', () => {
    const grid = [[0.25]];
    const ctx = new FakeContext();
    drawHeatmap(ctx, grid, 0, 0, 4, 1.0);
    expect(ctx.byOp('fillRect')[0].fillStyle).toBe('rgba(233,30,99,0.250)');
  });
});

describe('candidateBars', () => {
  it('sorts by score and maps [-1,1] to [0,100]', () => {
    const bars = candidateBars([
      { id: 'low', score: -1, bbox: [0, 0, 1, 1] },
      { id: 'hi', score: 1, bbox: [0, 0, 1, 1] },
      { id: 'mid', score: 0, bbox: [0, 0, 1, 1] },
    ]);
    expect(bars.map((b) => b.id)).toEqual(['hi', 'mid', 'low']);
    expect(bars.map((b) => b.widthPct)).toEqual([100, 50, 0]);
  });
});
