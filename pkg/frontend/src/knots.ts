import type { KnotTable } from "./types.js";

/** Pixel-space transform of a data rectangle; the only "math" the UI does
 * is this axis scaling. */
export interface Transform {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
  width: number;
  height: number;
}

export function dataToPx(
  t: Transform,
  x: number,
  y: number,
): { px: number; py: number } {
  const px = ((x - t.xMin) / (t.xMax - t.xMin)) * t.width;
  const py = (1 - (y - t.yMin) / (t.yMax - t.yMin)) * t.height;
  return { px, py };
}

export function pxToDataY(t: Transform, py: number): number {
  return t.yMin + (1 - py / t.height) * (t.yMax - t.yMin);
}

export interface KnotHandle {
  index: number;
  k: number;
  y: number;
  dragging: boolean;
}

export const HIT_RADIUS_PX = 8;

/** Draggable control-point handles.  The handle table always mirrors the
 * server's knot table; drags change a working copy that is sent to the
 * server, and the next payload (or snapshot) resynchronizes it. */
export class KnotHandles {
  private handles: KnotHandle[] = [];
  private dragIndex: number | null = null;

  constructor(readonly allowXDrag = false) {}

  get all(): readonly KnotHandle[] {
    return this.handles;
  }

  get yValues(): number[] {
    return this.handles.map((h) => h.y);
  }

  /** Resynchronize with the server's table (invariant: handles == server
   * knots whenever no drag is active). */
  syncFromServer(table: KnotTable): void {
    if (this.dragIndex !== null) return; // don't yank a handle mid-drag
    this.handles = table.k.map((k, i) => ({
      index: i,
      k,
      y: table.y[i] as number,
      dragging: false,
    }));
  }

  hitTest(t: Transform, px: number, py: number): number | null {
    let best: number | null = null;
    let bestDist = HIT_RADIUS_PX;
    for (const h of this.handles) {
      const p = dataToPx(t, h.k, h.y);
      const dist = Math.hypot(p.px - px, p.py - py);
      if (dist <= bestDist) {
        bestDist = dist;
        best = h.index;
      }
    }
    return best;
  }

  beginDrag(index: number): boolean {
    const h = this.handles[index];
    if (!h || this.dragIndex !== null) return false;
    this.dragIndex = index;
    h.dragging = true;
    return true;
  }

  /** Move the active handle.  Only y moves; x-dragging is available behind
   * the constructor flag (knot positions are not refined automatically, so
   * moving them is an expert action). */
  drag(t: Transform, px: number, py: number): number[] | null {
    if (this.dragIndex === null) return null;
    const h = this.handles[this.dragIndex] as KnotHandle;
    h.y = pxToDataY(t, py);
    if (this.allowXDrag) {
      const left = this.handles[this.dragIndex - 1];
      const right = this.handles[this.dragIndex + 1];
      let k = t.xMin + (px / t.width) * (t.xMax - t.xMin);
      // keep strict ordering; endpoints stay pinned
      if (!left || !right) {
        k = h.k;
      } else {
        const eps = 1e-6;
        k = Math.min(Math.max(k, left.k + eps), right.k - eps);
      }
      h.k = k;
    }
    return this.yValues;
  }

  endDrag(): number[] | null {
    if (this.dragIndex === null) return null;
    const h = this.handles[this.dragIndex] as KnotHandle;
    h.dragging = false;
    this.dragIndex = null;
    return this.yValues;
  }

  get isDragging(): boolean {
    return this.dragIndex !== null;
  }
}
