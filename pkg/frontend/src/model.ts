/**
 * Desk-scale embedding backbone: a three-block strided CNN whose
 * penultimate feature maps, flattened and unit-normalized, form the
 * embedding. Trains from random initialization, so the L2-to-initial
 * regularizer stands in for the L2-to-pretrained term a full pretrained
 * backbone would use.
 */
import * as tf from "@tensorflow/tfjs";

export interface BackboneConfig {
  inputSize: number; // square raster side
  channels: [number, number, number];
  seed: number;
}

export const DEFAULT_BACKBONE: BackboneConfig = {
  inputSize: 64,
  channels: [8, 16, 32],
  seed: 42,
};

export function buildBackbone(config: BackboneConfig): tf.LayersModel {
  const input = tf.input({
    shape: [config.inputSize, config.inputSize, 1],
  });
  let x = input as tf.SymbolicTensor;
  config.channels.forEach((filters, i) => {
    x = tf.layers
      .conv2d({
        filters,
        kernelSize: 3,
        strides: 2,
        padding: "same",
        activation: "relu",
        kernelInitializer: tf.initializers.glorotUniform({
          seed: config.seed + i,
        }),
        name: `block${i + 1}`,
      })
      .apply(x) as tf.SymbolicTensor;
  });
  const flat = tf.layers.flatten({ name: "embedding" }).apply(x) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: flat });
}

/** Unit-normalized embeddings for a batch of rasters. */
export function embedBatch(
  model: tf.LayersModel,
  batch: Float32Array[],
  size: number,
): tf.Tensor2D {
  return tf.tidy(() => {
    const stacked = tf.tensor4d(
      concatPixels(batch),
      [batch.length, size, size, 1],
    );
    const raw = model.apply(stacked, { training: true }) as tf.Tensor2D;
    return normalizeRows(raw);
  });
}

export function normalizeRows(rows: tf.Tensor2D): tf.Tensor2D {
  return tf.tidy(() => {
    const norms = tf.sqrt(tf.sum(tf.square(rows), 1, true));
    return tf.div(rows, tf.maximum(norms, 1e-12)) as tf.Tensor2D;
  });
}

function concatPixels(batch: Float32Array[]): Float32Array {
  const n = batch[0].length;
  const out = new Float32Array(batch.length * n);
  batch.forEach((pixels, i) => out.set(pixels, i * n));
  return out;
}
