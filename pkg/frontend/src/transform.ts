/** 2-D zoom/pan transform shared by linked viewports. */

export interface Transform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export const IDENTITY: Transform = { scale: 1, offsetX: 0, offsetY: 0 };

export function screenToImage(t: Transform, x: number, y: number): [number, number] {
  return [(x - t.offsetX) / t.scale, (y - t.offsetY) / t.scale];
}

export function imageToScreen(t: Transform, col: number, row: number): [number, number] {
  return [col * t.scale + t.offsetX, row * t.scale + t.offsetY];
}

/** Zoom by `factor`, keeping the screen point (x, y) fixed. */
export function zoomAt(t: Transform, x: number, y: number, factor: number): Transform {
  const scale = Math.min(64, Math.max(1 / 16, t.scale * factor));
  const applied = scale / t.scale;
  return {
    scale,
    offsetX: x - (x - t.offsetX) * applied,
    offsetY: y - (y - t.offsetY) * applied,
  };
}

export function panBy(t: Transform, dx: number, dy: number): Transform {
  return { scale: t.scale, offsetX: t.offsetX + dx, offsetY: t.offsetY + dy };
}
