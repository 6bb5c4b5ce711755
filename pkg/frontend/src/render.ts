// Canvas helpers: downscaled base image and per-pixel preview rendering.

import { enhanceImage, type EnhanceParams, type RgbaImage } from "./enhance.js";

export const PREVIEW_MAX_SIDE = 256;

/** Decode and downscale so the longest side is at most `maxSide` pixels. */
export async function loadPreviewBase(
  file: Blob,
  maxSide: number = PREVIEW_MAX_SIDE,
): Promise<ImageData> {
  const bitmap = await createImageBitmap(file);
  const scale = Math.min(1, maxSide / Math.max(bitmap.width, bitmap.height));
  const width = Math.max(1, Math.round(bitmap.width * scale));
  const height = Math.max(1, Math.round(bitmap.height * scale));
  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    throw new Error("2d canvas context unavailable");
  }
  ctx.drawImage(bitmap, 0, 0, width, height);
  bitmap.close();
  return ctx.getImageData(0, 0, width, height);
}

export function renderPreview(base: ImageData, params: EnhanceParams): ImageData {
  const src: RgbaImage = { data: base.data, width: base.width, height: base.height };
  const out = enhanceImage(src, params);
  // fresh copy pins the backing store to a plain ArrayBuffer for ImageData
  return new ImageData(new Uint8ClampedArray(out.data), out.width, out.height);
}

export function drawToCanvas(canvas: HTMLCanvasElement, image: ImageData): void {
  canvas.width = image.width;
  canvas.height = image.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    throw new Error("2d canvas context unavailable");
  }
  ctx.putImageData(image, 0, 0);
}
