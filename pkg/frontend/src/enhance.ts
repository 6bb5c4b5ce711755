// 12-parameter enhancement pipeline, mirroring the service's reference
// implementation operation for operation. The shared golden-vector file
// holds both sides to +-1/255 per channel.

export interface BalanceRow {
  R: number;
  G: number;
  B: number;
}

export interface EnhanceParams {
  brightness: number;
  contrast: number;
  saturation: number;
  balance: {
    shadows: BalanceRow;
    midtones: BalanceRow;
    highlights: BalanceRow;
  };
}

export const PARAM_COUNT = 12;

const BRIGHTNESS_STRENGTH = 0.6;
const BALANCE_STRENGTH = 0.4;
const LUMA_R = 0.299;
const LUMA_G = 0.587;
const LUMA_B = 0.114;

export function neutralParams(): EnhanceParams {
  const row = (): BalanceRow => ({ R: 0.5, G: 0.5, B: 0.5 });
  return {
    brightness: 0.5,
    contrast: 0.5,
    saturation: 0.5,
    balance: { shadows: row(), midtones: row(), highlights: row() },
  };
}

// canonical ordering: brightness, contrast, saturation, then the balance
// block row-major by region (shadows, midtones, highlights) and channel
export function paramsToVector(p: EnhanceParams): number[] {
  const b = p.balance;
  return [
    p.brightness,
    p.contrast,
    p.saturation,
    b.shadows.R, b.shadows.G, b.shadows.B,
    b.midtones.R, b.midtones.G, b.midtones.B,
    b.highlights.R, b.highlights.G, b.highlights.B,
  ];
}

export function vectorToParams(v: readonly number[]): EnhanceParams {
  if (v.length !== PARAM_COUNT) {
    throw new Error(`expected ${PARAM_COUNT} parameters, got ${v.length}`);
  }
  const row = (k: number): BalanceRow => ({ R: v[k], G: v[k + 1], B: v[k + 2] });
  return {
    brightness: v[0],
    contrast: v[1],
    saturation: v[2],
    balance: { shadows: row(3), midtones: row(6), highlights: row(9) },
  };
}

function clamp01(x: number): number {
  return x < 0 ? 0 : x > 1 ? 1 : x;
}

/**
 * Enhance one pixel with channels in [0, 1]. The contrast and saturation
 * steps use the `c + (c - anchor) * (factor - 1)` form so neutral
 * parameters are a bit-exact identity.
 */
export function applyEnhancementVec(
  r: number,
  g: number,
  b: number,
  vec: readonly number[],
): [number, number, number] {
  const brightness = BRIGHTNESS_STRENGTH * (vec[0] - 0.5);
  r += brightness;
  g += brightness;
  b += brightness;

  const contrast = Math.pow(2, 2 * (vec[1] - 0.5)) - 1;
  r += (r - 0.5) * contrast;
  g += (g - 0.5) * contrast;
  b += (b - 0.5) * contrast;

  const saturation = Math.pow(2, 2 * (vec[2] - 0.5)) - 1;
  let luma = r * LUMA_R + g * LUMA_G + b * LUMA_B;
  r += (r - luma) * saturation;
  g += (g - luma) * saturation;
  b += (b - luma) * saturation;

  luma = r * LUMA_R + g * LUMA_G + b * LUMA_B;
  const wShadow = (1 - luma) * (1 - luma);
  const wMid = 2 * luma * (1 - luma);
  const wHigh = luma * luma;
  r += BALANCE_STRENGTH * (wShadow * (vec[3] - 0.5) + wMid * (vec[6] - 0.5) + wHigh * (vec[9] - 0.5));
  g += BALANCE_STRENGTH * (wShadow * (vec[4] - 0.5) + wMid * (vec[7] - 0.5) + wHigh * (vec[10] - 0.5));
  b += BALANCE_STRENGTH * (wShadow * (vec[5] - 0.5) + wMid * (vec[8] - 0.5) + wHigh * (vec[11] - 0.5));

  return [clamp01(r), clamp01(g), clamp01(b)];
}

export function applyEnhancement(
  rgb: readonly [number, number, number],
  params: EnhanceParams,
): [number, number, number] {
  return applyEnhancementVec(rgb[0], rgb[1], rgb[2], paramsToVector(params));
}

/** Minimal ImageData-shaped surface so pixel code runs outside a browser. */
export interface RgbaImage {
  data: Uint8ClampedArray;
  width: number;
  height: number;
}

export function enhanceImage(src: RgbaImage, params: EnhanceParams): RgbaImage {
  const vec = paramsToVector(params);
  const out = new Uint8ClampedArray(src.data.length);
  for (let k = 0; k < src.data.length; k += 4) {
    const [r, g, b] = applyEnhancementVec(
      src.data[k] / 255,
      src.data[k + 1] / 255,
      src.data[k + 2] / 255,
      vec,
    );
    out[k] = Math.round(r * 255);
    out[k + 1] = Math.round(g * 255);
    out[k + 2] = Math.round(b * 255);
    out[k + 3] = src.data[k + 3];
  }
  return { data: out, width: src.width, height: src.height };
}
