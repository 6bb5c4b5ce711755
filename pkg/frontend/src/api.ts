// Thin typed client over the session service's HTTP+JSON API.

import type { EnhanceParams } from "./enhance.js";

export interface CellPayload {
  i: number;
  j: number;
  params: EnhanceParams | null;
  valid: boolean;
}

export interface GridPayload {
  cells: CellPayload[];
  level: number;
  iteration: number;
  best: EnhanceParams;
}

export interface CreatedSession {
  id: string;
  grid: GridPayload;
}

export interface ChooseResponse {
  grid: GridPayload;
  iteration: number;
  completed_plane: boolean;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class GalleryClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      let code = "error";
      let message = `${resp.status}`;
      try {
        const body = (await resp.json()) as { code?: string; message?: string };
        code = body.code ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, code, message);
    }
    return (await resp.json()) as T;
  }

  uploadImage(data: Blob | ArrayBuffer): Promise<{ id: string }> {
    return this.request("/images", { method: "POST", body: data });
  }

  createSession(
    imageId: string,
    options: { seed?: number; grid_res?: number; levels?: number } = {},
  ): Promise<CreatedSession> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ image_id: imageId, ...options }),
    });
  }

  getGrid(sessionId: string): Promise<GridPayload> {
    return this.request(`/sessions/${sessionId}/grid`);
  }

  choose(sessionId: string, i: number, j: number): Promise<ChooseResponse> {
    return this.request(`/sessions/${sessionId}/choose`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ i, j }),
    });
  }

  satisfied(sessionId: string): Promise<{ count: number }> {
    return this.request(`/sessions/${sessionId}/satisfied`, { method: "POST" });
  }

  best(sessionId: string): Promise<EnhanceParams> {
    return this.request(`/sessions/${sessionId}/best`);
  }

  async snapshot(sessionId: string): Promise<string> {
    const resp = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/snapshot`);
    if (!resp.ok) {
      throw new ApiError(resp.status, "error", `${resp.status}`);
    }
    return resp.text();
  }

  restore(document: string): Promise<CreatedSession> {
    return this.request("/sessions/restore", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: document,
    });
  }
}
