/**
 * Test-time augmentation recipes.
 *
 * "none" passes tensors through untouched. "flip-crop" is the standard
 * train-time recipe applied at test time: a fair-coin horizontal flip
 * followed by a random crop from a zero-padded canvas. Randomness comes from
 * the shared counter stream; per sample the draw order is one uniform for
 * the flip, then one bounded integer each for the vertical and horizontal
 * crop offsets.
 */

import { CounterRng } from "./rng.js";

export type RecipeId = "none" | "flip-crop";

export interface AugmentConfig {
  recipe: RecipeId;
  /** zero padding on each side before cropping back to the original size */
  cropPad: number;
}

export const DEFAULT_AUGMENT: AugmentConfig = { recipe: "none", cropPad: 4 };

export function augmentSample(
  sample: Float32Array,
  shape: number[],
  config: AugmentConfig,
  stream: CounterRng,
): Float32Array {
  if (config.recipe === "none") return sample;
  if (shape.length !== 3) {
    throw new Error(`flip-crop needs [height, width, channels] tensors, got shape [${shape}]`);
  }
  const [height, width, channels] = shape;
  const flip = stream.uniform() < 0.5;
  const pad = config.cropPad;
  const dy = stream.integerBelow(2 * pad + 1) - pad;
  const dx = stream.integerBelow(2 * pad + 1) - pad;

  const out = new Float32Array(sample.length);
  for (let y = 0; y < height; y++) {
    const srcY = y + dy;
    if (srcY < 0 || srcY >= height) continue; // padded region stays zero
    for (let x = 0; x < width; x++) {
      const srcX = x + dx;
      if (srcX < 0 || srcX >= width) continue;
      const readX = flip ? width - 1 - srcX : srcX;
      const src = (srcY * width + readX) * channels;
      const dst = (y * width + x) * channels;
      for (let c = 0; c < channels; c++) out[dst + c] = sample[src + c];
    }
  }
  return out;
}
