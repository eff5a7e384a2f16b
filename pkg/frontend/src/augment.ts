/**
 * Seeded affine augmentation of square grayscale rasters: random
 * translation, rotation, scale, and shear about the canvas center,
 * sampled from symmetric ranges that contain the identity. Output uses
 * inverse-mapped bilinear sampling, so a pure translation moves the ink
 * centroid by exactly the drawn offset (minus any boundary clipping).
 */
import { Rng } from "./rng";
import { Raster } from "./raster";

export interface AugmentRanges {
  maxTranslation: number; // px, +/-
  rotationRange: number; // degrees, +/-
  scaleRange: [number, number]; // multiplicative, brackets 1.0
  shearRange: number; // degrees, +/-
}

export const IDENTITY_RANGES: AugmentRanges = {
  maxTranslation: 0,
  rotationRange: 0,
  scaleRange: [1, 1],
  shearRange: 0,
};

export function validateRanges(r: AugmentRanges): void {
  if (r.maxTranslation < 0 || r.rotationRange < 0 || r.shearRange < 0) {
    throw new Error("augmentation ranges must be non-negative");
  }
  const [lo, hi] = r.scaleRange;
  if (!(lo > 0 && lo <= 1 && hi >= 1)) {
    throw new Error(`scaleRange must bracket 1.0, got [${lo}, ${hi}]`);
  }
}

function isIdentity(r: AugmentRanges): boolean {
  return (
    r.maxTranslation === 0 &&
    r.rotationRange === 0 &&
    r.shearRange === 0 &&
    r.scaleRange[0] === 1 &&
    r.scaleRange[1] === 1
  );
}

/** Forward 3x3 matrix (row-major, acting on [x, y, 1]). */
function forwardMatrix(
  tx: number,
  ty: number,
  angleDeg: number,
  scale: number,
  shearDeg: number,
  center: number,
): number[] {
  const theta = (angleDeg * Math.PI) / 180;
  const sh = Math.tan((shearDeg * Math.PI) / 180);
  const cos = Math.cos(theta);
  const sin = Math.sin(theta);
  // rotation * shear * scale
  const a = scale * cos;
  const b = scale * (cos * sh - sin);
  const d = scale * sin;
  const e = scale * (sin * sh + cos);
  const c = center - a * center - b * center + tx;
  const f = center - d * center - e * center + ty;
  return [a, b, c, d, e, f];
}

function invert([a, b, c, d, e, f]: number[]): number[] {
  const det = a * e - b * d;
  if (det === 0) throw new Error("degenerate affine transform");
  const ia = e / det;
  const ib = -b / det;
  const id = -d / det;
  const ie = a / det;
  return [ia, ib, -(ia * c + ib * f), id, ie, -(id * c + ie * f)];
}

function bilinear(pixels: Float32Array, size: number, x: number, y: number): number {
  if (x < -1 || y < -1 || x > size || y > size) return 0;
  const x0 = Math.floor(x);
  const y0 = Math.floor(y);
  const fx = x - x0;
  const fy = y - y0;
  let value = 0;
  for (const [dx, dy, w] of [
    [0, 0, (1 - fx) * (1 - fy)],
    [1, 0, fx * (1 - fy)],
    [0, 1, (1 - fx) * fy],
    [1, 1, fx * fy],
  ] as const) {
    const xi = x0 + dx;
    const yi = y0 + dy;
    if (xi >= 0 && xi < size && yi >= 0 && yi < size && w > 0) {
      value += w * pixels[yi * size + xi];
    }
  }
  return value;
}

/**
 * Random affine copy of a raster, deterministic given the rng state.
 * Retries up to 10 draws when all ink lands outside the canvas.
 */
export function augment(raster: Raster, ranges: AugmentRanges, rng: Rng): Raster {
  validateRanges(ranges);
  if (isIdentity(ranges)) {
    return { ...raster, pixels: raster.pixels.slice() };
  }
  const size = raster.size;
  const center = (size - 1) / 2;
  for (let attempt = 0; attempt < 10; attempt++) {
    const tx = rng.uniform(-ranges.maxTranslation, ranges.maxTranslation);
    const ty = rng.uniform(-ranges.maxTranslation, ranges.maxTranslation);
    const angle = rng.uniform(-ranges.rotationRange, ranges.rotationRange);
    const scale = rng.uniform(ranges.scaleRange[0], ranges.scaleRange[1]);
    const shear = rng.uniform(-ranges.shearRange, ranges.shearRange);
    const inverse = invert(forwardMatrix(tx, ty, angle, scale, shear, center));
    const out = new Float32Array(size * size);
    let ink = 0;
    for (let y = 0; y < size; y++) {
      for (let x = 0; x < size; x++) {
        const sx = inverse[0] * x + inverse[1] * y + inverse[2];
        const sy = inverse[3] * x + inverse[4] * y + inverse[5];
        const v = Math.min(1, Math.max(0, bilinear(raster.pixels, size, sx, sy)));
        out[y * size + x] = v;
        if (v > 0) ink++;
      }
    }
    if (ink > 0) {
      return { ...raster, pixels: out };
    }
  }
  throw new Error(
    `augmentation pushed all ink off canvas after 10 attempts (U+${raster.codepoint
      .toString(16)
      .toUpperCase()})`,
  );
}
