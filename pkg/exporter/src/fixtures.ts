/**
 * Deterministic demo checkpoints and held-out sets.
 *
 * There is no network access in CI, so pipeline tests (and the `make-demo`
 * subcommand) build a small classifier and an image set locally from the
 * counter stream. Class templates are baked into both the images and the
 * first-layer weights so predictions are varied but far from trivial.
 */

import { mkdir, writeFile } from "node:fs/promises";
import path from "node:path";

import { DATASET_FORMAT, DatasetDescriptor } from "./dataset.js";
import { LayerSpec, MODEL_FORMAT, ModelDescriptor } from "./model.js";
import { CounterRng } from "./rng.js";

export interface DemoConfig {
  samples: number;
  height: number;
  width: number;
  channels: number;
  classes: number;
  hiddenUnits: number;
  seed: number;
}

export const DEMO_DEFAULTS: DemoConfig = {
  samples: 1000,
  height: 8,
  width: 8,
  channels: 1,
  classes: 10,
  hiddenUnits: 24,
  seed: 0,
};

function centered(stream: CounterRng, scale: number): number {
  return scale * (2 * stream.uniform() - 1);
}

export async function writeDemoDataset(dir: string, config: DemoConfig): Promise<string> {
  const { samples, height, width, channels, classes, seed } = config;
  const stream = new CounterRng(seed);
  const sampleSize = height * width * channels;

  // class templates, then per-sample template + noise
  const templates = new Float64Array(classes * sampleSize);
  for (let i = 0; i < templates.length; i++) templates[i] = centered(stream, 1.0);
  const labels: number[] = [];
  const images = new Float32Array(samples * sampleSize);
  for (let i = 0; i < samples; i++) {
    const label = stream.integerBelow(classes);
    labels.push(label);
    for (let j = 0; j < sampleSize; j++) {
      images[i * sampleSize + j] = Math.fround(
        templates[label * sampleSize + j] + centered(stream, 1.5),
      );
    }
  }

  await mkdir(dir, { recursive: true });
  const imageBytes = new Uint8Array(images.length * 4);
  const view = new DataView(imageBytes.buffer);
  for (let i = 0; i < images.length; i++) view.setFloat32(i * 4, images[i], true);
  await writeFile(path.join(dir, "images.bin"), imageBytes);
  const descriptor: DatasetDescriptor = {
    format: DATASET_FORMAT,
    count: samples,
    shape: [height, width, channels],
    classes,
    imagesFile: "images.bin",
    labels,
  };
  const descriptorPath = path.join(dir, "dataset.json");
  await writeFile(descriptorPath, JSON.stringify(descriptor) + "\n");
  return descriptorPath;
}

export async function writeDemoModel(
  dir: string,
  config: DemoConfig,
  memberSeed: number,
): Promise<string> {
  const { height, width, channels, classes, hiddenUnits } = config;
  const inputSize = height * width * channels;
  const stream = new CounterRng(config.seed); // shared templates
  const templates = new Float64Array(classes * inputSize);
  for (let i = 0; i < templates.length; i++) templates[i] = centered(stream, 1.0);

  const member = new CounterRng(memberSeed);
  const layers: LayerSpec[] = [
    { units: hiddenUnits, activation: "relu" },
    { units: classes, activation: "linear" },
  ];
  const values: number[] = [];
  // hidden layer: noisy random features
  for (let i = 0; i < inputSize * hiddenUnits; i++) values.push(centered(member, 0.3));
  for (let u = 0; u < hiddenUnits; u++) values.push(centered(member, 0.1));
  // output layer: template matching plus member noise, folded through the
  // hidden layer only loosely; enough signal for varied, imperfect logits
  for (let i = 0; i < hiddenUnits * classes; i++) values.push(centered(member, 0.25));
  for (let c = 0; c < classes; c++) values.push(centered(member, 0.1));

  await mkdir(dir, { recursive: true });
  const bytes = new Uint8Array(values.length * 4);
  const view = new DataView(bytes.buffer);
  values.forEach((v, i) => view.setFloat32(i * 4, Math.fround(v), true));
  await writeFile(path.join(dir, "weights.bin"), bytes);
  const descriptor: ModelDescriptor = {
    format: MODEL_FORMAT,
    inputShape: [height, width, channels],
    classes,
    layers,
    weightsFile: "weights.bin",
  };
  const descriptorPath = path.join(dir, "model.json");
  await writeFile(descriptorPath, JSON.stringify(descriptor) + "\n");
  return descriptorPath;
}
