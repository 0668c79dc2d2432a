/**
 * Minimal inference engine for dense-stack classifier checkpoints.
 *
 * Checkpoint layout: a JSON descriptor next to a float32 little-endian
 * weights file holding, per layer, the weight matrix row-major
 * [inputs][units] followed by the bias [units]. Forward passes accumulate in
 * float64; logits are rounded to float32 at the end, which is also the
 * precision they are stored at, so downstream scoring sees exactly what the
 * model emitted.
 */

import { readFile } from "node:fs/promises";
import path from "node:path";

export interface LayerSpec {
  units: number;
  activation: "relu" | "linear";
}

export interface ModelDescriptor {
  format: string;
  inputShape: number[];
  classes: number;
  layers: LayerSpec[];
  weightsFile: string;
}

export interface DenseStackModel {
  descriptor: ModelDescriptor;
  /** per layer: weights (inputs*units, row-major by input), then bias */
  weights: { matrix: Float64Array; bias: Float64Array }[];
  inputSize: number;
}

export const MODEL_FORMAT = "dense-stack-v1";

export async function loadModel(descriptorPath: string): Promise<DenseStackModel> {
  const descriptor = JSON.parse(await readFile(descriptorPath, "utf-8")) as ModelDescriptor;
  if (descriptor.format !== MODEL_FORMAT) {
    throw new Error(`unsupported model format ${descriptor.format}`);
  }
  if (!descriptor.layers.length) throw new Error("model has no layers");
  const last = descriptor.layers[descriptor.layers.length - 1];
  if (last.units !== descriptor.classes) {
    throw new Error(
      `output layer has ${last.units} units but the model declares ${descriptor.classes} classes`,
    );
  }
  const raw = await readFile(path.join(path.dirname(descriptorPath), descriptor.weightsFile));
  const view = new DataView(raw.buffer, raw.byteOffset, raw.byteLength);
  const inputSize = descriptor.inputShape.reduce((a, b) => a * b, 1);

  const weights: DenseStackModel["weights"] = [];
  let offset = 0;
  let fanIn = inputSize;
  const readF32 = () => {
    const v = view.getFloat32(offset, true);
    offset += 4;
    return v;
  };
  for (const layer of descriptor.layers) {
    const matrix = new Float64Array(fanIn * layer.units);
    for (let i = 0; i < matrix.length; i++) matrix[i] = readF32();
    const bias = new Float64Array(layer.units);
    for (let i = 0; i < bias.length; i++) bias[i] = readF32();
    weights.push({ matrix, bias });
    fanIn = layer.units;
  }
  if (offset !== raw.byteLength) {
    throw new Error(
      `weights file holds ${raw.byteLength} bytes but the descriptor needs ${offset}`,
    );
  }
  return { descriptor, weights, inputSize };
}

/** Logits for one flattened input, rounded to float32. */
export function forward(model: DenseStackModel, input: Float32Array | Float64Array): Float32Array {
  if (input.length !== model.inputSize) {
    throw new Error(`input has ${input.length} values, model expects ${model.inputSize}`);
  }
  let x = Float64Array.from(input);
  model.weights.forEach(({ matrix, bias }, layerIndex) => {
    const layer = model.descriptor.layers[layerIndex];
    const y = new Float64Array(layer.units);
    for (let u = 0; u < layer.units; u++) y[u] = bias[u];
    for (let i = 0; i < x.length; i++) {
      const xi = x[i];
      if (xi === 0) continue;
      const row = i * layer.units;
      for (let u = 0; u < layer.units; u++) y[u] += xi * matrix[row + u];
    }
    if (layer.activation === "relu") {
      for (let u = 0; u < y.length; u++) if (y[u] < 0) y[u] = 0;
    }
    x = y;
  });
  return Float32Array.from(x, Math.fround);
}

/** Argmax with lowest-index tie-breaking, matching the scoring toolkit. */
export function argmax(values: ArrayLike<number>): number {
  let best = 0;
  for (let i = 1; i < values.length; i++) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}
