import { describe, expect, it } from "vitest";

import { ApiError, type ChooseResponse, type GalleryClient, type GridPayload } from "../src/api.js";
import { neutralParams, paramsToVector, vectorToParams } from "../src/enhance.js";
import { GridController } from "../src/state.js";

function gridPayload(level: number, iteration: number, invalid: Array<[number, number]> = []): GridPayload {
  const cells = [];
  for (let i = -2; i <= 2; i++) {
    for (let j = -2; j <= 2; j++) {
      const bad = invalid.some(([a, b]) => a === i && b === j);
      cells.push({
        i,
        j,
        params: bad ? null : vectorToParams(paramsToVector(neutralParams())),
        valid: !bad,
      });
    }
  }
  return { cells, level, iteration, best: neutralParams() };
}

class StubClient {
  chooseCalls: Array<[number, number]> = [];
  satisfiedCalls = 0;
  nextResponses: ChooseResponse[] = [];
  failNextChoose: ApiError | null = null;

  async uploadImage(): Promise<{ id: string }> {
    return { id: "img-1" };
  }

  async createSession(): Promise<{ id: string; grid: GridPayload }> {
    return { id: "sess-1", grid: gridPayload(0, 0, [[2, 2]]) };
  }

  async getGrid(): Promise<GridPayload> {
    return gridPayload(0, 0);
  }

  async choose(_id: string, i: number, j: number): Promise<ChooseResponse> {
    if (this.failNextChoose) {
      const err = this.failNextChoose;
      this.failNextChoose = null;
      throw err;
    }
    this.chooseCalls.push([i, j]);
    const next = this.nextResponses.shift();
    if (!next) {
      throw new Error("stub exhausted");
    }
    return next;
  }

  async satisfied(): Promise<{ count: number }> {
    this.satisfiedCalls += 1;
    return { count: this.satisfiedCalls };
  }

  async best(): Promise<ReturnType<typeof neutralParams>> {
    return neutralParams();
  }

  async snapshot(): Promise<string> {
    return "{}";
  }

  async restore(): Promise<{ id: string; grid: GridPayload }> {
    return { id: "sess-1", grid: gridPayload(0, 0) };
  }
}

function makeController(): { controller: GridController; stub: StubClient } {
  const stub = new StubClient();
  const controller = new GridController(stub as unknown as GalleryClient);
  controller.animationMs = 0;
  return { controller, stub };
}

describe("GridController", () => {
  it("start populates session and grid", async () => {
    const { controller } = makeController();
    await controller.start(new ArrayBuffer(4));
    const state = controller.getState();
    expect(state.sessionId).toBe("sess-1");
    expect(state.grid?.cells).toHaveLength(25);
  });

  it("never sends a choose request for an invalid cell", async () => {
    const { controller, stub } = makeController();
    await controller.start(new ArrayBuffer(4));
    const clicked = await controller.click(2, 2); // invalid in the stub grid
    expect(clicked).toBe(false);
    expect(stub.chooseCalls).toHaveLength(0);
  });

  it("ignores out-of-grid clicks", async () => {
    const { controller, stub } = makeController();
    await controller.start(new ArrayBuffer(4));
    expect(await controller.click(9, 9)).toBe(false);
    expect(stub.chooseCalls).toHaveLength(0);
  });

  it("applies the returned grid after a click", async () => {
    const { controller, stub } = makeController();
    await controller.start(new ArrayBuffer(4));
    stub.nextResponses.push({ grid: gridPayload(1, 0), iteration: 0, completed_plane: false });
    const clicked = await controller.click(0, 0);
    expect(clicked).toBe(true);
    expect(stub.chooseCalls).toEqual([[0, 0]]);
    expect(controller.getState().grid?.level).toBe(1);
    expect(controller.getState().completedIteration).toBeNull();
  });

  it("raises the iteration banner when a plane completes", async () => {
    const { controller, stub } = makeController();
    await controller.start(new ArrayBuffer(4));
    stub.nextResponses.push({ grid: gridPayload(0, 1), iteration: 1, completed_plane: true });
    await controller.click(1, 0);
    expect(controller.getState().completedIteration).toBe(1);
  });

  it("blocks clicks while animating", async () => {
    const { controller, stub } = makeController();
    await controller.start(new ArrayBuffer(4));
    controller.animationMs = 30;
    stub.nextResponses.push({ grid: gridPayload(1, 0), iteration: 0, completed_plane: false });
    const first = controller.click(0, 0);
    // allow the stub response to resolve and the animation window to open
    await new Promise((resolve) => setTimeout(resolve, 5));
    const second = await controller.click(0, 1);
    expect(second).toBe(false);
    expect(await first).toBe(true);
    expect(stub.chooseCalls).toEqual([[0, 0]]);
  });

  it("a rejected choice leaves the grid unchanged and records the error", async () => {
    const { controller, stub } = makeController();
    await controller.start(new ArrayBuffer(4));
    stub.failNextChoose = new ApiError(409, "invalid-cell", "cell outside the space");
    const clicked = await controller.click(0, 0);
    expect(clicked).toBe(false);
    const state = controller.getState();
    expect(state.grid?.level).toBe(0);
    expect(state.lastError).toContain("cell outside the space");
    expect(state.busy).toBe(false);
  });

  it("tracks the satisfied count", async () => {
    const { controller } = makeController();
    await controller.start(new ArrayBuffer(4));
    await controller.pressSatisfied();
    await controller.pressSatisfied();
    expect(controller.getState().satisfiedCount).toBe(2);
  });
});
