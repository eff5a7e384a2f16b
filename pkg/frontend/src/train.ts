/**
 * Training loop: minimize the triplet objective over weakly labeled
 * render triplets, optionally penalizing L2 drift from the initial
 * weights, then export one unit-normalized embedding per codepoint
 * (deterministic render: first font in sorted order, no augmentation)
 * as an HGEM file plus a per-step loss CSV.
 */
import * as fs from "fs";
import * as tf from "@tensorflow/tfjs";

import { AugmentRanges } from "./augment";
import { HgemEntry, writeHgem } from "./hgem";
import { BackboneConfig, buildBackbone, embedBatch, normalizeRows, DEFAULT_BACKBONE } from "./model";
import { RasterIndex } from "./raster";
import { Rng } from "./rng";
import { sampleTriplet, tripletLossTf } from "./triplet";

export interface TrainConfig {
  margin: number;
  regWeight: number; // L2-to-initial-weights strength
  batchSize: number;
  steps: number;
  learningRate: number;
  seed: number;
  augmentEnabled: boolean;
  augment: AugmentRanges;
  backbone: BackboneConfig;
}

export const DEFAULT_TRAIN_CONFIG: TrainConfig = {
  margin: 0.2,
  regWeight: 0,
  batchSize: 8,
  steps: 200,
  learningRate: 1e-3,
  seed: 7,
  augmentEnabled: true,
  augment: {
    maxTranslation: 3,
    rotationRange: 8,
    scaleRange: [0.9, 1.1],
    shearRange: 4,
  },
  backbone: DEFAULT_BACKBONE,
};

export interface LossRow {
  step: number;
  loss: number;
  regTerm: number;
}

export interface TrainResult {
  model: tf.LayersModel;
  lossHistory: LossRow[];
}

function validate(config: TrainConfig): void {
  if (config.margin <= 0) throw new Error("margin must be positive");
  if (config.regWeight < 0) throw new Error("regWeight must be non-negative");
  if (config.batchSize < 1 || config.steps < 1) {
    throw new Error("batchSize and steps must be positive");
  }
}

function batchTriplets(
  index: RasterIndex,
  rng: Rng,
  config: TrainConfig,
): [Float32Array[], Float32Array[], Float32Array[]] {
  const anchors: Float32Array[] = [];
  const positives: Float32Array[] = [];
  const negatives: Float32Array[] = [];
  for (let i = 0; i < config.batchSize; i++) {
    const triplet = sampleTriplet(index, rng, {
      ranges: config.augment,
      augmentEnabled: config.augmentEnabled,
    });
    anchors.push(triplet.anchor.pixels);
    positives.push(triplet.positive.pixels);
    negatives.push(triplet.negative.pixels);
  }
  return [anchors, positives, negatives];
}

/** Mean triplet loss on a fixed seeded draw, without updating weights. */
export function evaluateTripletLoss(
  model: tf.LayersModel,
  index: RasterIndex,
  config: TrainConfig,
  evalSeed: number,
  count = 64,
): number {
  const rng = new Rng(evalSeed);
  const evalConfig = { ...config, batchSize: count };
  const [anchors, positives, negatives] = batchTriplets(index, rng, evalConfig);
  const size = config.backbone.inputSize;
  return tf.tidy(() => {
    const loss = tripletLossTf(
      embedBatch(model, anchors, size),
      embedBatch(model, positives, size),
      embedBatch(model, negatives, size),
      config.margin,
    );
    return loss.dataSync()[0];
  });
}

export function train(index: RasterIndex, config: TrainConfig): TrainResult {
  validate(config);
  const model = buildBackbone(config.backbone);
  const optimizer = tf.train.adam(config.learningRate);
  const rng = new Rng(config.seed);
  const size = config.backbone.inputSize;
  const weights = model.trainableWeights.map((w) => w.read() as tf.Variable);
  const initial = config.regWeight > 0 ? weights.map((w) => tf.keep(w.clone())) : [];

  const lossHistory: LossRow[] = [];
  for (let step = 0; step < config.steps; step++) {
    const [anchors, positives, negatives] = batchTriplets(index, rng, config);
    let tripletPart = 0;
    let regPart = 0;
    const cost = optimizer.minimize(
      () =>
        tf.tidy(() => {
          const loss = tripletLossTf(
            embedBatch(model, anchors, size),
            embedBatch(model, positives, size),
            embedBatch(model, negatives, size),
            config.margin,
          );
          let reg = tf.scalar(0);
          if (config.regWeight > 0) {
            for (let i = 0; i < weights.length; i++) {
              reg = tf.add(
                reg,
                tf.sum(tf.square(tf.sub(weights[i], initial[i]))),
              ) as tf.Scalar;
            }
            reg = tf.mul(reg, config.regWeight) as tf.Scalar;
          }
          tripletPart = loss.dataSync()[0];
          regPart = reg.dataSync()[0];
          return tf.add(loss, reg) as tf.Scalar;
        }),
      true,
    );
    const total = cost!.dataSync()[0];
    cost!.dispose();
    if (!Number.isFinite(total)) {
      throw new Error(
        `non-finite loss at step ${step}: triplet=${tripletPart} reg=${regPart}`,
      );
    }
    lossHistory.push({ step, loss: tripletPart, regTerm: regPart });
  }
  initial.forEach((t) => t.dispose());
  return { model, lossHistory };
}

export function writeLossCsv(filePath: string, history: LossRow[]): void {
  const lines = ["step,loss,reg_term"];
  for (const row of history) {
    lines.push(`${row.step},${row.loss},${row.regTerm}`);
  }
  fs.writeFileSync(filePath, lines.join("\n") + "\n");
}

/**
 * Embed the deterministic render of every codepoint (first font in
 * sorted order, no augmentation) and return unit-norm HGEM entries.
 */
export function exportEmbeddings(
  model: tf.LayersModel,
  index: RasterIndex,
  inputSize: number,
): HgemEntry[] {
  const codepoints = [...index.keys()].sort((a, b) => a - b);
  const batch = codepoints.map((c) => index.get(c)![0].pixels);
  const rows = tf.tidy(() => {
    const stacked = tf.tensor4d(
      Float32Array.from(batch.flatMap((p) => [...p])),
      [batch.length, inputSize, inputSize, 1],
    );
    return normalizeRows(model.predict(stacked) as tf.Tensor2D);
  });
  const data = rows.arraySync() as number[][];
  rows.dispose();
  return codepoints.map((codepoint, i) => ({
    codepoint,
    values: Float32Array.from(data[i]),
  }));
}

export function trainAndExport(
  index: RasterIndex,
  config: TrainConfig,
  hgemPath: string,
  lossCsvPath: string,
): TrainResult {
  const result = train(index, config);
  writeLossCsv(lossCsvPath, result.lossHistory);
  writeHgem(
    hgemPath,
    exportEmbeddings(result.model, index, config.backbone.inputSize),
  );
  return result;
}
