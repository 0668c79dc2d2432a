#!/usr/bin/env node
/**
 * uqeb-export: dump classifier logits as UQEB containers.
 *
 *   uqeb-export run --model m.json [--model m2.json ...] --dataset d.json \
 *       --outdir out/ [--augment none|flip-crop] [--crop-pad 4] \
 *       [--draws 1] [--seed 0]
 *   uqeb-export make-demo --outdir demo/ [--samples 1000] [--classes 10] \
 *       [--members 1] [--seed 0]
 */

import { parseArgs } from "node:util";
import path from "node:path";

import { exportPredictions } from "./exporter.js";
import { DEMO_DEFAULTS, writeDemoDataset, writeDemoModel } from "./fixtures.js";
import { RecipeId } from "./augment.js";

async function runExport(argv: string[]): Promise<void> {
  const { values } = parseArgs({
    args: argv,
    options: {
      model: { type: "string", multiple: true },
      dataset: { type: "string" },
      outdir: { type: "string" },
      augment: { type: "string", default: "none" },
      "crop-pad": { type: "string", default: "4" },
      draws: { type: "string", default: "1" },
      seed: { type: "string", default: "0" },
    },
  });
  if (!values.model?.length || !values.dataset || !values.outdir) {
    throw new Error("run requires --model, --dataset, and --outdir");
  }
  if (values.augment !== "none" && values.augment !== "flip-crop") {
    throw new Error(`unknown augmentation recipe ${values.augment}`);
  }
  const manifest = await exportPredictions({
    modelPaths: values.model,
    datasetPath: values.dataset,
    outDir: values.outdir,
    augment: { recipe: values.augment as RecipeId, cropPad: Number(values["crop-pad"]) },
    drawsPerMember: Number(values.draws),
    seed: Number(values.seed),
  });
  console.log(`wrote ${manifest.files.length} containers to ${values.outdir}`);
}

async function runMakeDemo(argv: string[]): Promise<void> {
  const { values } = parseArgs({
    args: argv,
    options: {
      outdir: { type: "string" },
      samples: { type: "string", default: String(DEMO_DEFAULTS.samples) },
      classes: { type: "string", default: String(DEMO_DEFAULTS.classes) },
      members: { type: "string", default: "1" },
      seed: { type: "string", default: "0" },
    },
  });
  if (!values.outdir) throw new Error("make-demo requires --outdir");
  const config = {
    ...DEMO_DEFAULTS,
    samples: Number(values.samples),
    classes: Number(values.classes),
    seed: Number(values.seed),
  };
  const datasetPath = await writeDemoDataset(path.join(values.outdir, "dataset"), config);
  const members = Number(values.members);
  for (let m = 0; m < members; m++) {
    await writeDemoModel(path.join(values.outdir, `model_${m}`), config, config.seed + 1000 + m);
  }
  console.log(`wrote demo dataset (${config.samples} samples) and ${members} model(s)`);
  console.log(`dataset descriptor: ${datasetPath}`);
}

async function main(): Promise<void> {
  const [, , command, ...rest] = process.argv;
  try {
    if (command === "run") await runExport(rest);
    else if (command === "make-demo") await runMakeDemo(rest);
    else {
      console.error("usage: uqeb-export <run|make-demo> [options]");
      process.exitCode = 2;
    }
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    process.exitCode = 1;
  }
}

void main();
