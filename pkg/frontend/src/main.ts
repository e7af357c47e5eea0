/** Browser entry point: binds the annotation controller to the DOM. */

import { AnnotatorApp } from "./app.js";
import { SessionClient } from "./api.js";
import { Dims } from "./rle.js";
import { Modality, ViewportId } from "./state.js";
import { sliceShape, voxelOf, StrokePoint } from "./stroke.js";
import { imageToScreen, screenToImage } from "./transform.js";

const WINDOW_PRESETS: Record<Modality, { center: number; width: number } | undefined> = {
  anatomical: { center: 0.5, width: 2.0 }, // soft-tissue-like on normalized volumes
  functional: undefined, // full range; hot colormap applied below
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function hotColor(gray: number): [number, number, number] {
  const r = Math.min(255, gray * 3);
  const g = Math.min(255, Math.max(0, gray * 3 - 255));
  const b = Math.min(255, Math.max(0, gray * 3 - 510));
  return [r, g, b];
}

class ViewportBinding {
  readonly canvas: HTMLCanvasElement;
  private image: HTMLImageElement | null = null;
  private imageKey = "";

  constructor(
    readonly which: ViewportId,
    canvas: HTMLCanvasElement,
    private readonly app: AnnotatorApp,
  ) {
    this.canvas = canvas;
    this.bindEvents();
  }

  private modality(): Modality {
    return this.app.view!.viewportModality(this.which);
  }

  private bindEvents(): void {
    let stroke: StrokePoint[] | null = null;
    let panning = false;
    let last: [number, number] = [0, 0];

    this.canvas.addEventListener("wheel", (event) => {
      event.preventDefault();
      const factor = event.deltaY < 0 ? 1.2 : 1 / 1.2;
      this.app.view?.zoomAt(event.offsetX, event.offsetY, factor);
    });

    this.canvas.addEventListener("mousedown", (event) => {
      if (!this.app.view) return;
      if (event.button === 1 || event.button === 2 || event.shiftKey) {
        panning = true;
        last = [event.offsetX, event.offsetY];
      } else if (event.button === 0 && !this.app.sealed) {
        stroke = [this.imagePoint(event)];
      }
    });

    this.canvas.addEventListener("mousemove", (event) => {
      if (!this.app.view) return;
      const point = this.imagePoint(event);
      this.app.view.setCursor(point);
      if (panning) {
        this.app.view.panBy(event.offsetX - last[0], event.offsetY - last[1]);
        last = [event.offsetX, event.offsetY];
      } else if (stroke) {
        stroke.push(point);
      }
    });

    const finish = () => {
      panning = false;
      if (stroke) {
        const path = stroke;
        stroke = null;
        this.app.strokeCompleted(path).catch(() => undefined);
      }
    };
    this.canvas.addEventListener("mouseup", finish);
    this.canvas.addEventListener("mouseleave", () => {
      finish();
      this.app.view?.setCursor(null);
    });
    this.canvas.addEventListener("contextmenu", (event) => event.preventDefault());
  }

  private imagePoint(event: MouseEvent): StrokePoint {
    const t = this.app.view!.viewportTransform(this.which);
    const [col, row] = screenToImage(t, event.offsetX, event.offsetY);
    return { col, row };
  }

  render(): void {
    const app = this.app;
    if (!app.session || !app.view || !app.annotations) return;
    const view = app.view.snapshot();
    const dims = app.dims;
    const [width, height] = sliceShape(dims, view.axis);
    const modality = this.modality();
    const key = `${modality}:${view.axis}:${view.sliceIndex}`;
    if (key !== this.imageKey) {
      this.imageKey = key;
      const image = new Image();
      image.onload = () => {
        this.image = image;
        this.render();
      };
      image.src = app.client.sliceUrl(
        app.session.id, view.axis, view.sliceIndex, modality, WINDOW_PRESETS[modality],
      );
      return;
    }

    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.setTransform(1, 0, 0, 1, 0, 0);
    ctx.fillStyle = "#111";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    const t = app.view.viewportTransform(this.which);
    ctx.setTransform(t.scale, 0, 0, t.scale, t.offsetX, t.offsetY);
    ctx.imageSmoothingEnabled = false;
    if (this.image) {
      if (modality === "functional") {
        ctx.drawImage(this.colorized(this.image), 0, 0);
      } else {
        ctx.drawImage(this.image, 0, 0);
      }
    }
    ctx.drawImage(this.overlay(dims, view.axis, view.sliceIndex, width, height,
                               view.overlayOpacity), 0, 0);

    // mirrored crosshair
    const cursor = app.view.viewportCursor(this.which);
    if (cursor) {
      ctx.setTransform(1, 0, 0, 1, 0, 0);
      const [sx, sy] = imageToScreen(t, cursor.col, cursor.row);
      ctx.strokeStyle = "rgba(255,255,0,0.8)";
      ctx.lineWidth = 1;
      ctx.beginPath();
      ctx.moveTo(sx - 8, sy);
      ctx.lineTo(sx + 8, sy);
      ctx.moveTo(sx, sy - 8);
      ctx.lineTo(sx, sy + 8);
      ctx.stroke();
    }
  }

  private colorized(image: HTMLImageElement): HTMLCanvasElement {
    const off = document.createElement("canvas");
    off.width = image.width;
    off.height = image.height;
    const ctx = off.getContext("2d")!;
    ctx.drawImage(image, 0, 0);
    const data = ctx.getImageData(0, 0, off.width, off.height);
    for (let i = 0; i < data.data.length; i += 4) {
      const [r, g, b] = hotColor(data.data[i]);
      data.data[i] = r;
      data.data[i + 1] = g;
      data.data[i + 2] = b;
    }
    ctx.putImageData(data, 0, 0);
    return off;
  }

  private overlay(dims: Dims, axis: 0 | 1 | 2, slice: number, width: number,
                  height: number, opacity: number): HTMLCanvasElement {
    const off = document.createElement("canvas");
    off.width = width;
    off.height = height;
    const ctx = off.getContext("2d")!;
    const data = ctx.createImageData(width, height);
    const ann = this.app.annotations!;
    const alpha = Math.round(opacity * 255);
    for (let row = 0; row < height; row++) {
      for (let col = 0; col < width; col++) {
        const v = voxelOf(dims, axis, slice, col, row);
        const o = (row * width + col) * 4;
        if (ann.foreground[v]) {
          data.data.set([80, 220, 80, 255], o);
        } else if (ann.background[v]) {
          data.data.set([230, 80, 80, 255], o);
        } else if (ann.mask[v]) {
          data.data.set([70, 130, 255, alpha], o);
        }
      }
    }
    ctx.putImageData(data, 0, 0);
    return off;
  }
}

function setupUi(): void {
  const serviceInput = el<HTMLInputElement>("service-url");
  serviceInput.value =
    new URLSearchParams(location.search).get("service") ?? "http://localhost:8008";

  let app = new AnnotatorApp(new SessionClient(serviceInput.value));
  const left = el<HTMLCanvasElement>("viewport-left");
  const right = el<HTMLCanvasElement>("viewport-right");
  let bindings = [
    new ViewportBinding("left", left, app),
    new ViewportBinding("right", right, app),
  ];

  const status = el<HTMLElement>("status");
  const slider = el<HTMLInputElement>("slice-slider");

  const renderAll = () => {
    const view = app.view?.snapshot();
    if (view) {
      el<HTMLElement>("viewport-right-wrap").style.display =
        view.mode === "dual" ? "inline-block" : "none";
      el<HTMLButtonElement>("toggle-modality").disabled = view.mode !== "single";
      slider.max = String(app.dims[view.axis] - 1);
      slider.value = String(view.sliceIndex);
      el<HTMLElement>("slice-label").textContent =
        `axis ${view.axis} / slice ${view.sliceIndex}`;
    }
    for (const binding of bindings) binding.render();
    const busy = app.busy ? " [busy]" : "";
    const latency = app.lastAction
      ? `${app.lastAction.action}: ${app.lastAction.latencyMs} ms`
      : "";
    status.textContent = (app.lastError ? `error: ${app.lastError} ` : latency) + busy;
    for (const id of ["propose", "refine", "submit"]) {
      el<HTMLButtonElement>(id).disabled = app.busy || app.sealed || !app.session;
    }
  };

  el<HTMLButtonElement>("open-session").addEventListener("click", async () => {
    app = new AnnotatorApp(new SessionClient(serviceInput.value));
    bindings = [new ViewportBinding("left", left, app), new ViewportBinding("right", right, app)];
    app.subscribe(renderAll);
    try {
      await app.open({
        anatomical_ref: el<HTMLInputElement>("anatomical-ref").value,
        functional_ref: el<HTMLInputElement>("functional-ref").value,
        backend: el<HTMLSelectElement>("backend").value,
        gt_ref: el<HTMLInputElement>("gt-ref").value || undefined,
      });
      app.view!.subscribe(renderAll);
      renderAll();
    } catch (error) {
      status.textContent = `error: ${error instanceof Error ? error.message : error}`;
    }
  });

  el<HTMLButtonElement>("propose").addEventListener("click", () => {
    app.propose().catch(() => undefined);
  });
  el<HTMLButtonElement>("refine").addEventListener("click", () => {
    app.refine().catch(() => undefined);
  });
  el<HTMLButtonElement>("submit").addEventListener("click", async () => {
    try {
      const record = await app.submit();
      status.textContent =
        `submitted: ${record.events.length} events, ` +
        `${record.total_seconds.toFixed(1)}s` +
        (record.final_dice !== null ? `, dice ${record.final_dice.toFixed(3)}` : "");
    } catch {
      /* surfaced via lastError */
    }
  });

  el<HTMLSelectElement>("mode").addEventListener("change", (event) => {
    app.view?.setMode((event.target as HTMLSelectElement).value as "dual" | "single");
  });
  el<HTMLButtonElement>("toggle-modality").addEventListener("click", () => {
    app.view?.toggleModality();
  });
  slider.addEventListener("input", () => app.view?.setSlice(Number(slider.value)));
  el<HTMLSelectElement>("axis").addEventListener("change", (event) => {
    app.view?.setAxis(Number((event.target as HTMLSelectElement).value) as 0 | 1 | 2);
  });
  for (const cls of ["foreground", "background"] as const) {
    el<HTMLInputElement>(`brush-${cls}`).addEventListener("change", () => {
      app.view?.setBrush({ cls });
    });
  }
  el<HTMLInputElement>("brush-radius").addEventListener("input", (event) => {
    app.view?.setBrush({ radius: Number((event.target as HTMLInputElement).value) });
  });
  el<HTMLInputElement>("overlay-opacity").addEventListener("input", (event) => {
    app.view?.setOverlayOpacity(Number((event.target as HTMLInputElement).value));
  });

  app.subscribe(renderAll);
  renderAll();
}

setupUi();
