/**
 * View state for the annotation client.
 *
 * The two viewports of the dual view share one transform object and one
 * slice index by construction, so "both views zoom and pan together" is an
 * invariant of the store rather than something event handlers must maintain.
 * The single view shows one modality at a time behind a toggle that
 * preserves every other piece of state.
 */

import { Dims, Run } from "./rle.js";
import { Axis } from "./stroke.js";
import { IDENTITY, Transform, panBy, zoomAt } from "./transform.js";

export type Mode = "dual" | "single";
export type Modality = "anatomical" | "functional";
export type ScribbleClass = "foreground" | "background";
export type ViewportId = "left" | "right";

export interface Brush {
  cls: ScribbleClass;
  radius: number;
}

export interface Cursor {
  col: number;
  row: number;
}

export interface ViewState {
  mode: Mode;
  activeModality: Modality;
  axis: Axis;
  sliceIndex: number;
  transform: Transform;
  brush: Brush;
  overlayOpacity: number;
  cursor: Cursor | null;
}

export class ViewStore {
  readonly dims: Dims;
  private state: ViewState;
  private listeners: Array<() => void> = [];

  constructor(dims: Dims) {
    this.dims = dims;
    this.state = {
      mode: "dual",
      activeModality: "anatomical",
      axis: 2,
      sliceIndex: Math.floor(dims[2] / 2),
      transform: { ...IDENTITY },
      brush: { cls: "foreground", radius: 2 },
      overlayOpacity: 0.45,
      cursor: null,
    };
  }

  snapshot(): Readonly<ViewState> {
    return this.state;
  }

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener();
  }

  /** Both dual viewports *are* the same transform; there is no per-side copy. */
  viewportTransform(_which: ViewportId): Transform {
    return this.state.transform;
  }

  viewportModality(which: ViewportId): Modality {
    if (this.state.mode === "dual") {
      return which === "left" ? "anatomical" : "functional";
    }
    return this.state.activeModality;
  }

  /** Cursor is mirrored: both viewports report the same image position. */
  viewportCursor(_which: ViewportId): Cursor | null {
    return this.state.cursor;
  }

  setMode(mode: Mode): void {
    this.update({ mode });
  }

  toggleModality(): void {
    this.update({
      activeModality: this.state.activeModality === "anatomical" ? "functional" : "anatomical",
    });
  }

  setAxis(axis: Axis): void {
    const limit = this.dims[axis];
    this.update({ axis, sliceIndex: Math.min(this.state.sliceIndex, limit - 1) });
  }

  setSlice(index: number): void {
    const limit = this.dims[this.state.axis];
    this.update({ sliceIndex: Math.max(0, Math.min(limit - 1, Math.round(index))) });
  }

  zoomAt(x: number, y: number, factor: number): void {
    this.update({ transform: zoomAt(this.state.transform, x, y, factor) });
  }

  panBy(dx: number, dy: number): void {
    this.update({ transform: panBy(this.state.transform, dx, dy) });
  }

  setBrush(brush: Partial<Brush>): void {
    this.update({ brush: { ...this.state.brush, ...brush } });
  }

  setOverlayOpacity(opacity: number): void {
    this.update({ overlayOpacity: Math.max(0, Math.min(1, opacity)) });
  }

  setCursor(cursor: Cursor | null): void {
    this.update({ cursor });
  }
}

/**
 * Client-side mirror of the service's cumulative scribble state, with the
 * same later-wins class-switch rule, plus the latest mask overlay.
 */
export class AnnotationState {
  readonly dims: Dims;
  mask: Uint8Array;
  foreground: Uint8Array;
  background: Uint8Array;

  constructor(dims: Dims) {
    this.dims = dims;
    const n = dims[0] * dims[1] * dims[2];
    this.mask = new Uint8Array(n);
    this.foreground = new Uint8Array(n);
    this.background = new Uint8Array(n);
  }

  applyMask(mask: Uint8Array): void {
    if (mask.length !== this.mask.length) {
      throw new Error("mask length does not match volume");
    }
    this.mask = mask;
  }

  applyScribbleDelta(cls: ScribbleClass, runs: Run[]): void {
    const mine = cls === "foreground" ? this.foreground : this.background;
    const other = cls === "foreground" ? this.background : this.foreground;
    for (const [start, length] of runs) {
      mine.fill(1, start, start + length);
      other.fill(0, start, start + length);
    }
  }

  scribbleVoxels(cls: ScribbleClass): number {
    const data = cls === "foreground" ? this.foreground : this.background;
    let count = 0;
    for (const v of data) count += v;
    return count;
  }
}
