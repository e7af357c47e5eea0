/**
 * Rasterization of brush strokes on a slice into voxel runs.
 *
 * Slice pixel (col, row) maps onto volume coordinates per view axis:
 *   axis 2 (axial):    (col, row) -> (x=col, y=row, z=slice)
 *   axis 1 (coronal):  (col, row) -> (x=col, y=slice, z=row)
 *   axis 0 (sagittal): (col, row) -> (x=slice, y=col, z=row)
 * matching the orientation of the service's slice images.
 */

import { Dims, Run, encodeRuns, linearIndex, voxelCount } from "./rle.js";

export type Axis = 0 | 1 | 2;

export interface StrokePoint {
  col: number;
  row: number;
}

export function sliceShape(dims: Dims, axis: Axis): [number, number] {
  if (axis === 2) return [dims[0], dims[1]];
  if (axis === 1) return [dims[0], dims[2]];
  return [dims[1], dims[2]];
}

export function voxelOf(dims: Dims, axis: Axis, slice: number, col: number, row: number): number {
  if (axis === 2) return linearIndex(dims, col, row, slice);
  if (axis === 1) return linearIndex(dims, col, slice, row);
  return linearIndex(dims, slice, col, row);
}

/**
 * Pixels covered by sweeping a disc of `radius` along the polyline, clipped
 * to the slice bounds. A single point yields one disc.
 */
export function rasterizeStroke(
  path: StrokePoint[],
  radius: number,
  width: number,
  height: number,
): Set<number> {
  const pixels = new Set<number>();
  if (path.length === 0) return pixels;

  const stamp = (cx: number, cy: number) => {
    const r = Math.max(0, radius);
    const x0 = Math.max(0, Math.ceil(cx - r));
    const x1 = Math.min(width - 1, Math.floor(cx + r));
    const y0 = Math.max(0, Math.ceil(cy - r));
    const y1 = Math.min(height - 1, Math.floor(cy + r));
    for (let y = y0; y <= y1; y++) {
      for (let x = x0; x <= x1; x++) {
        const dx = x - cx;
        const dy = y - cy;
        if (dx * dx + dy * dy <= r * r) {
          pixels.add(y * width + x);
        }
      }
    }
    // the clicked pixel itself always registers, even with a sub-pixel brush
    const px = Math.round(cx);
    const py = Math.round(cy);
    if (px >= 0 && px < width && py >= 0 && py < height) {
      pixels.add(py * width + px);
    }
  };

  stamp(path[0].col, path[0].row);
  for (let i = 1; i < path.length; i++) {
    const a = path[i - 1];
    const b = path[i];
    const steps = Math.max(1, Math.ceil(Math.hypot(b.col - a.col, b.row - a.row)));
    for (let s = 1; s <= steps; s++) {
      const t = s / steps;
      stamp(a.col + (b.col - a.col) * t, a.row + (b.row - a.row) * t);
    }
  }
  return pixels;
}

/** Stroke pixels on the current slice, as sorted voxel runs for the service. */
export function strokeToRuns(
  path: StrokePoint[],
  radius: number,
  dims: Dims,
  axis: Axis,
  slice: number,
): Run[] {
  const [width, height] = sliceShape(dims, axis);
  const mask = new Uint8Array(voxelCount(dims));
  for (const pixel of rasterizeStroke(path, radius, width, height)) {
    const col = pixel % width;
    const row = Math.floor(pixel / width);
    mask[voxelOf(dims, axis, slice, col, row)] = 1;
  }
  return encodeRuns(mask);
}
