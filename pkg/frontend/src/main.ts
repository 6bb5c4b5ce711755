// Browser entry point: upload, zoomable grid, satisfied button, best view.

import { GalleryClient } from "./api.js";
import { neutralParams, type EnhanceParams } from "./enhance.js";
import { drawToCanvas, loadPreviewBase, renderPreview } from "./render.js";
import { GridController } from "./state.js";

const BASE_URL: string =
  (window as unknown as { GALLERY_BASE_URL?: string }).GALLERY_BASE_URL ??
  "http://localhost:8000";

const GRID_PREVIEW_SIDE = 112;

const client = new GalleryClient(BASE_URL);
const controller = new GridController(client);

let gridBase: ImageData | null = null;
let bestBase: ImageData | null = null;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

const gridEl = el<HTMLDivElement>("grid");
const bannerEl = el<HTMLDivElement>("banner");
const statusEl = el<HTMLDivElement>("status");
const bestCanvas = el<HTMLCanvasElement>("best-view");
const fileInput = el<HTMLInputElement>("photo-input");
const satisfiedBtn = el<HTMLButtonElement>("satisfied");
const satisfiedCountEl = el<HTMLSpanElement>("satisfied-count");
const animateToggle = el<HTMLInputElement>("animate-toggle");

animateToggle.addEventListener("change", () => {
  controller.animationMs = animateToggle.checked ? 1500 : 0;
});

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  if (!file) {
    return;
  }
  statusEl.textContent = "uploading...";
  try {
    gridBase = await loadPreviewBase(file, GRID_PREVIEW_SIDE);
    bestBase = await loadPreviewBase(file);
    await controller.start(file);
    statusEl.textContent = "pick the option you like best";
  } catch (err) {
    statusEl.textContent = `could not load that image: ${String(err)}`;
  }
});

satisfiedBtn.addEventListener("click", () => void controller.pressSatisfied());

function renderGrid(): void {
  const state = controller.getState();
  gridEl.classList.toggle("zooming", state.animating);
  if (!state.grid || !gridBase) {
    return;
  }
  const radius = Math.floor(Math.sqrt(state.grid.cells.length) / 2);
  gridEl.innerHTML = "";
  gridEl.style.gridTemplateColumns = `repeat(${2 * radius + 1}, 1fr)`;
  for (const cell of state.grid.cells) {
    const slot = document.createElement("div");
    slot.className = "cell";
    // screen position proportional to the grid offsets
    slot.style.gridColumn = String(cell.i + radius + 1);
    slot.style.gridRow = String(cell.j + radius + 1);
    if (!cell.valid || cell.params === null) {
      slot.classList.add("disabled");
    } else {
      const canvas = document.createElement("canvas");
      drawToCanvas(canvas, renderPreview(gridBase, cell.params as EnhanceParams));
      slot.appendChild(canvas);
      slot.addEventListener("click", () => void controller.click(cell.i, cell.j));
    }
    gridEl.appendChild(slot);
  }
  bannerEl.textContent =
    state.completedIteration !== null
      ? `plane ${state.completedIteration} finished - new search plane ready`
      : "";
  satisfiedCountEl.textContent = String(state.satisfiedCount);
  if (bestBase) {
    drawToCanvas(bestCanvas, renderPreview(bestBase, state.bestParams ?? neutralParams()));
  }
  if (state.lastError) {
    statusEl.textContent = state.lastError;
  }
}

controller.onChange(renderGrid);
