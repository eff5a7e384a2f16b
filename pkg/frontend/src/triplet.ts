/**
 * Triplet sampling from weak labels and the triplet objective.
 *
 * Weak labels: two renders of the same codepoint form an anchor/positive
 * pair; a uniformly drawn different codepoint supplies the negative. No
 * curated homoglyph labels are consumed anywhere. Distance is one minus
 * cosine similarity, so the hinge reads
 *
 *     loss = max(0, (1 - cos(a, p)) - (1 - cos(a, n)) + margin).
 */
import * as tf from "@tensorflow/tfjs";

import { augment, AugmentRanges, IDENTITY_RANGES } from "./augment";
import { Raster, RasterIndex } from "./raster";
import { Rng } from "./rng";

export interface Triplet {
  anchor: Raster;
  positive: Raster;
  negative: Raster;
}

export interface SamplerOptions {
  ranges: AugmentRanges;
  augmentEnabled: boolean;
}

/**
 * Draw one triplet: anchor codepoint uniform, positive from the same
 * codepoint with an independently drawn font and augmentation, negative
 * from a uniformly drawn different codepoint.
 *
 * When a codepoint has a single font and augmentation is disabled, the
 * positive falls back to the anchor's render unchanged (documented
 * fallback; the pair is then trivially satisfied).
 */
export function sampleTriplet(
  index: RasterIndex,
  rng: Rng,
  options: SamplerOptions,
): Triplet {
  const codepoints = [...index.keys()].sort((a, b) => a - b);
  if (codepoints.length < 2) {
    throw new Error("need at least two codepoints to sample triplets");
  }
  const anchorCp = rng.choice(codepoints);
  const renders = index.get(anchorCp)!;
  const ranges = options.augmentEnabled ? options.ranges : IDENTITY_RANGES;

  const anchor = augment(rng.choice(renders), ranges, rng);
  const positive = augment(rng.choice(renders), ranges, rng);

  let negativeCp = rng.choice(codepoints);
  while (negativeCp === anchorCp) {
    negativeCp = rng.choice(codepoints);
  }
  const negative = augment(rng.choice(index.get(negativeCp)!), ranges, rng);
  return { anchor, positive, negative };
}

/** Batched tfjs triplet loss over unit-normalized embedding rows. */
export function tripletLossTf(
  anchor: tf.Tensor2D,
  positive: tf.Tensor2D,
  negative: tf.Tensor2D,
  margin: number,
): tf.Scalar {
  return tf.tidy(() => {
    const dap = tf.sub(1, tf.sum(tf.mul(anchor, positive), 1));
    const dan = tf.sub(1, tf.sum(tf.mul(anchor, negative), 1));
    return tf.mean(tf.relu(tf.add(tf.sub(dap, dan), margin))) as tf.Scalar;
  });
}

// Plain float64 reference implementation of the same objective (general
// cosine, so finite-difference perturbations off the unit sphere are
// handled exactly), used by the gradient check.

function dot(x: number[], y: number[]): number {
  let s = 0;
  for (let i = 0; i < x.length; i++) s += x[i] * y[i];
  return s;
}

function norm(x: number[]): number {
  return Math.sqrt(dot(x, x));
}

function cosine(x: number[], y: number[]): number {
  return dot(x, y) / (norm(x) * norm(y));
}

export function tripletLossScalar(
  a: number[],
  p: number[],
  n: number[],
  margin: number,
): number {
  const hinge = 1 - cosine(a, p) - (1 - cosine(a, n)) + margin;
  return Math.max(0, hinge);
}

/** d cos(x, y) / dx = y / (|x||y|) - cos(x, y) x / |x|^2 */
function cosineGradX(x: number[], y: number[]): number[] {
  const nx = norm(x);
  const ny = norm(y);
  const c = dot(x, y) / (nx * ny);
  return x.map((xi, i) => y[i] / (nx * ny) - (c * xi) / (nx * nx));
}

export interface TripletGrad {
  da: number[];
  dp: number[];
  dn: number[];
}

/** Analytic gradient of tripletLossScalar at (a, p, n). */
export function tripletLossGrad(
  a: number[],
  p: number[],
  n: number[],
  margin: number,
): TripletGrad {
  const zero = (v: number[]) => v.map(() => 0);
  if (tripletLossScalar(a, p, n, margin) <= 0) {
    return { da: zero(a), dp: zero(p), dn: zero(n) };
  }
  // loss = cos(a, n) - cos(a, p) + margin  (inside the hinge)
  const gradCosApA = cosineGradX(a, p);
  const gradCosAnA = cosineGradX(a, n);
  return {
    da: a.map((_, i) => gradCosAnA[i] - gradCosApA[i]),
    dp: cosineGradX(p, a).map((v) => -v),
    dn: cosineGradX(n, a),
  };
}
