/**
 * DOM-free annotation controller: one session, one view store, one mutating
 * request in flight at a time. Strokes update the local overlay
 * optimistically and are rolled back if the service rejects them; after
 * every completed action the mask overlay is re-fetched so the client never
 * drifts from the service.
 */

import { SessionClient, SessionInfo, SubmitRecord } from "./api.js";
import { Dims, Run, maskFromWire } from "./rle.js";
import { AnnotationState, ScribbleClass, ViewStore } from "./state.js";
import { StrokePoint, strokeToRuns } from "./stroke.js";

export interface ActionResult {
  action: string;
  latencyMs: number;
}

export class AnnotatorApp {
  readonly client: SessionClient;
  session: SessionInfo | null = null;
  view: ViewStore | null = null;
  annotations: AnnotationState | null = null;
  sealed = false;
  lastAction: ActionResult | null = null;
  lastError: string | null = null;
  private inFlight = false;
  private listeners: Array<() => void> = [];

  constructor(client: SessionClient) {
    this.client = client;
  }

  get busy(): boolean {
    return this.inFlight;
  }

  get dims(): Dims {
    if (!this.session) throw new Error("no session loaded");
    return this.session.dims as Dims;
  }

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  async open(body: {
    anatomical_ref: string;
    functional_ref: string;
    backend?: string;
    gt_ref?: string;
  }): Promise<void> {
    this.session = await this.client.createSession(body);
    this.view = new ViewStore(this.dims);
    this.annotations = new AnnotationState(this.dims);
    this.sealed = false;
    this.notify();
  }

  private async mutate<T>(action: string, run: () => Promise<T>): Promise<T> {
    if (!this.session) throw new Error("no session loaded");
    if (this.sealed) throw new Error("session is sealed");
    if (this.inFlight) throw new Error("another request is in flight");
    this.inFlight = true;
    this.lastError = null;
    this.notify();
    const started = Date.now();
    try {
      const result = await run();
      this.lastAction = { action, latencyMs: Date.now() - started };
      return result;
    } catch (error) {
      this.lastError = error instanceof Error ? error.message : String(error);
      throw error;
    } finally {
      this.inFlight = false;
      this.notify();
    }
  }

  private async refreshMask(): Promise<void> {
    if (!this.session || !this.annotations) return;
    const wire = await this.client.mask(this.session.id);
    this.annotations.applyMask(maskFromWire(wire));
  }

  async propose(): Promise<void> {
    await this.mutate("propose", async () => {
      const summary = await this.client.propose(this.session!.id);
      this.annotations!.applyMask(maskFromWire(summary.mask));
    });
  }

  async refine(): Promise<void> {
    await this.mutate("refine", async () => {
      const summary = await this.client.refine(this.session!.id);
      this.annotations!.applyMask(maskFromWire(summary.mask));
    });
  }

  async submit(): Promise<SubmitRecord> {
    return this.mutate("submit", async () => {
      const record = await this.client.submit(this.session!.id);
      this.sealed = true;
      return record;
    });
  }

  /**
   * Rasterize a completed stroke on the current slice and post it. The local
   * scribble overlay updates immediately and rolls back on rejection.
   */
  async strokeCompleted(path: StrokePoint[]): Promise<Run[]> {
    if (!this.session || !this.view || !this.annotations) throw new Error("no session loaded");
    const state = this.view.snapshot();
    const runs = strokeToRuns(path, state.brush.radius, this.dims, state.axis, state.sliceIndex);
    if (runs.length === 0) return runs;
    const cls: ScribbleClass = state.brush.cls;

    const undo = {
      foreground: this.annotations.foreground.slice(),
      background: this.annotations.background.slice(),
    };
    this.annotations.applyScribbleDelta(cls, runs);
    this.notify();
    try {
      await this.mutate("scribble", async () => {
        await this.client.sendScribbles(
          this.session!.id,
          cls === "foreground" ? runs : [],
          cls === "background" ? runs : [],
        );
        await this.refreshMask();
      });
    } catch (error) {
      this.annotations.foreground = undo.foreground;
      this.annotations.background = undo.background;
      this.notify();
      throw error;
    }
    return runs;
  }
}
