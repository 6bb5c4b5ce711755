// Grid view state machine: guards clicks, owns the zoom animation window,
// and mirrors the last payload received from the service.

import type { ChooseResponse, GalleryClient, GridPayload } from "./api.js";
import type { EnhanceParams } from "./enhance.js";

export interface GridViewState {
  sessionId: string | null;
  grid: GridPayload | null;
  animating: boolean;
  busy: boolean;
  bestParams: EnhanceParams | null;
  satisfiedCount: number;
  completedIteration: number | null;
  lastError: string | null;
}

export type StateListener = (state: GridViewState) => void;

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class GridController {
  private state: GridViewState = {
    sessionId: null,
    grid: null,
    animating: false,
    busy: false,
    bestParams: null,
    satisfiedCount: 0,
    completedIteration: null,
    lastError: null,
  };

  private listeners: StateListener[] = [];

  /** Zoom animation duration; cosmetic, so tests run it at 0. */
  animationMs = 1500;

  constructor(private readonly client: GalleryClient) {}

  getState(): Readonly<GridViewState> {
    return this.state;
  }

  onChange(listener: StateListener): void {
    this.listeners.push(listener);
  }

  private update(patch: Partial<GridViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  async start(image: Blob | ArrayBuffer, seed?: number): Promise<void> {
    this.update({ busy: true, lastError: null });
    try {
      const { id } = await this.client.uploadImage(image);
      const created = await this.client.createSession(id, seed === undefined ? {} : { seed });
      this.update({
        sessionId: created.id,
        grid: created.grid,
        bestParams: created.grid.best,
        completedIteration: null,
        satisfiedCount: 0,
      });
    } catch (err) {
      this.update({ lastError: String(err) });
      throw err;
    } finally {
      this.update({ busy: false });
    }
  }

  /**
   * Click cell (i, j). Returns false without touching the network when the
   * cell is invalid or unknown, or while a request or animation is running.
   */
  async click(i: number, j: number): Promise<boolean> {
    const { grid, sessionId, animating, busy } = this.state;
    if (!grid || sessionId === null || animating || busy) {
      return false;
    }
    const cell = grid.cells.find((c) => c.i === i && c.j === j);
    if (!cell || !cell.valid) {
      return false;
    }
    this.update({ busy: true, lastError: null });
    let response: ChooseResponse;
    try {
      response = await this.client.choose(sessionId, i, j);
    } catch (err) {
      // rejected by the service: flash the error, keep the grid unchanged
      this.update({ busy: false, lastError: String(err) });
      return false;
    }
    this.update({ animating: true });
    if (this.animationMs > 0) {
      await sleep(this.animationMs);
    }
    this.update({
      animating: false,
      busy: false,
      grid: response.grid,
      bestParams: response.grid.best,
      completedIteration: response.completed_plane ? response.iteration : null,
    });
    return true;
  }

  async pressSatisfied(): Promise<void> {
    const { sessionId } = this.state;
    if (sessionId === null) {
      return;
    }
    try {
      const ack = await this.client.satisfied(sessionId);
      this.update({ satisfiedCount: ack.count });
    } catch (err) {
      this.update({ lastError: String(err) });
    }
  }

  async refreshBest(): Promise<void> {
    const { sessionId } = this.state;
    if (sessionId === null) {
      return;
    }
    const params = await this.client.best(sessionId);
    this.update({ bestParams: params });
  }
}
