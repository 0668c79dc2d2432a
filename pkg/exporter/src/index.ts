export { CounterRng } from "./rng.js";
export {
  HEADER_SIZE,
  UQEB_DTYPE_F32,
  UQEB_MAGIC,
  UQEB_VERSION,
  decodeUqeb,
  encodeUqeb,
  validateUqeb,
  type UqebData,
} from "./uqeb.js";
export { argmax, forward, loadModel, MODEL_FORMAT, type DenseStackModel } from "./model.js";
export { DATASET_FORMAT, loadDataset, sampleOf, type ImageSet } from "./dataset.js";
export { augmentSample, DEFAULT_AUGMENT, type AugmentConfig, type RecipeId } from "./augment.js";
export {
  exportPredictions,
  memberLogits,
  TOOL_NAME,
  TOOL_VERSION,
  type ExportManifest,
  type ExportSpec,
} from "./exporter.js";
export { DEMO_DEFAULTS, writeDemoDataset, writeDemoModel, type DemoConfig } from "./fixtures.js";
