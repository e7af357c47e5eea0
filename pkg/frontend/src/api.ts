/** Thin typed client for the annotation session service. */

import { MaskWire, Run } from "./rle.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface SessionInfo {
  id: string;
  dims: number[];
  spacing: number[];
  backend: string;
  sealed: boolean;
  study_mode: boolean;
  schema_version: number;
}

export interface MaskSummary {
  voxel_count: number;
  mask: MaskWire;
  dice: number | null;
  schema_version: number;
}

export interface SubmitRecord {
  id: string;
  backend: string;
  events: Array<{ kind: string; timestamp: number; dice: number | null }>;
  total_seconds: number;
  final_voxel_count: number;
  final_dice: number | null;
  schema_version: number;
}

export class ServiceError extends Error {
  constructor(readonly status: number, detail: string) {
    super(`service error ${status}: ${detail}`);
  }
}

export class SessionClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        detail = (await response.json()).detail ?? detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ServiceError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createSession(body: {
    anatomical_ref: string;
    functional_ref: string;
    backend?: string;
    gt_ref?: string;
  }): Promise<SessionInfo> {
    return this.request("POST", "/sessions", body);
  }

  info(id: string): Promise<SessionInfo> {
    return this.request("GET", `/sessions/${id}`);
  }

  propose(id: string): Promise<MaskSummary> {
    return this.request("POST", `/sessions/${id}/propose`);
  }

  refine(id: string): Promise<MaskSummary> {
    return this.request("POST", `/sessions/${id}/refine`);
  }

  submit(id: string): Promise<SubmitRecord> {
    return this.request("POST", `/sessions/${id}/submit`);
  }

  sendScribbles(id: string, foreground: Run[], background: Run[]): Promise<unknown> {
    return this.request("POST", `/sessions/${id}/scribbles`, { foreground, background });
  }

  async mask(id: string): Promise<MaskWire> {
    const body = await this.request<{ mask: MaskWire }>("GET", `/sessions/${id}/mask`);
    return body.mask;
  }

  sliceUrl(
    id: string,
    axis: number,
    index: number,
    modality: string,
    window?: { center: number; width: number },
  ): string {
    const params = new URLSearchParams({
      axis: String(axis),
      index: String(index),
      modality,
    });
    if (window) {
      params.set("window_center", String(window.center));
      params.set("window_width", String(window.width));
    }
    return `${this.baseUrl}/sessions/${id}/slice?${params}`;
  }
}
