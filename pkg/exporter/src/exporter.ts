/**
 * Run classifier checkpoints over a held-out set and dump one UQEB container
 * per ensemble member and augmentation draw, plus a manifest.
 *
 * The exporter never pools members or draws: combining predictive
 * distributions is the scoring toolkit's job, so those semantics live in
 * exactly one place. Labels are copied unchanged into every container.
 */

import { createHash } from "node:crypto";
import { mkdir, writeFile } from "node:fs/promises";
import path from "node:path";

import { AugmentConfig, DEFAULT_AUGMENT, augmentSample } from "./augment.js";
import { ImageSet, loadDataset, sampleOf } from "./dataset.js";
import { DenseStackModel, forward, loadModel } from "./model.js";
import { CounterRng } from "./rng.js";
import { encodeUqeb } from "./uqeb.js";

export interface ExportSpec {
  /** checkpoint descriptor paths, one per ensemble member */
  modelPaths: string[];
  datasetPath: string;
  augment?: AugmentConfig;
  drawsPerMember?: number;
  outDir: string;
  seed?: number;
}

export interface ExportedFile {
  file: string;
  sha256: string;
  member: number;
  draw: number;
}

export interface ExportManifest {
  tool: string;
  version: string;
  models: string[];
  dataset: string;
  augmentation: AugmentConfig;
  drawsPerMember: number;
  seed: number;
  samples: number;
  classes: number;
  files: ExportedFile[];
}

export const TOOL_NAME = "uqeb-exporter";
export const TOOL_VERSION = "0.1.0";

export function memberLogits(
  model: DenseStackModel,
  dataset: ImageSet,
  augment: AugmentConfig,
  stream: CounterRng,
): Float32Array {
  const { count, classes, shape } = dataset.descriptor;
  if (model.descriptor.classes !== classes) {
    throw new Error(
      `model emits ${model.descriptor.classes} classes but the dataset declares ${classes}`,
    );
  }
  if (model.inputSize !== dataset.sampleSize) {
    throw new Error(
      `model expects ${model.inputSize} input values but samples hold ${dataset.sampleSize}`,
    );
  }
  const logits = new Float32Array(count * classes);
  for (let i = 0; i < count; i++) {
    const image = augmentSample(sampleOf(dataset, i), shape, augment, stream);
    logits.set(forward(model, image), i * classes);
  }
  return logits;
}

export async function exportPredictions(spec: ExportSpec): Promise<ExportManifest> {
  const augment = spec.augment ?? DEFAULT_AUGMENT;
  const draws = spec.drawsPerMember ?? 1;
  const seed = spec.seed ?? 0;
  if (draws < 1) throw new Error("drawsPerMember must be >= 1");
  if (!spec.modelPaths.length) throw new Error("need at least one model checkpoint");

  const dataset = await loadDataset(spec.datasetPath);
  const labels = Uint32Array.from(dataset.descriptor.labels);
  const models: DenseStackModel[] = [];
  for (const p of spec.modelPaths) models.push(await loadModel(p));

  await mkdir(spec.outDir, { recursive: true });
  const stream = new CounterRng(seed);
  const files: ExportedFile[] = [];
  for (let m = 0; m < models.length; m++) {
    for (let d = 0; d < draws; d++) {
      const logits = memberLogits(models[m], dataset, augment, stream);
      const bytes = encodeUqeb({
        members: 1,
        samples: dataset.descriptor.count,
        classes: dataset.descriptor.classes,
        labels,
        logits,
      });
      const name = `member_${String(m).padStart(3, "0")}_draw_${String(d).padStart(3, "0")}.uqeb`;
      await writeFile(path.join(spec.outDir, name), bytes);
      files.push({
        file: name,
        sha256: createHash("sha256").update(bytes).digest("hex"),
        member: m,
        draw: d,
      });
    }
  }

  const manifest: ExportManifest = {
    tool: TOOL_NAME,
    version: TOOL_VERSION,
    models: spec.modelPaths.map((p) => path.basename(p)),
    dataset: path.basename(spec.datasetPath),
    augmentation: augment,
    drawsPerMember: draws,
    seed,
    samples: dataset.descriptor.count,
    classes: dataset.descriptor.classes,
    files,
  };
  await writeFile(
    path.join(spec.outDir, "manifest.json"),
    JSON.stringify(manifest, null, 2) + "\n",
  );
  return manifest;
}
