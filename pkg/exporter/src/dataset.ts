/**
 * Held-out image sets: a JSON descriptor (shape, labels) next to a float32
 * little-endian binary of the image tensors, sample-major.
 */

import { readFile } from "node:fs/promises";
import path from "node:path";

export interface DatasetDescriptor {
  format: string;
  count: number;
  /** per-sample tensor shape, e.g. [8, 8, 1] */
  shape: number[];
  classes: number;
  imagesFile: string;
  labels: number[];
}

export interface ImageSet {
  descriptor: DatasetDescriptor;
  /** count * prod(shape) float32 values, sample-major */
  images: Float32Array;
  sampleSize: number;
}

export const DATASET_FORMAT = "image-set-v1";

export async function loadDataset(descriptorPath: string): Promise<ImageSet> {
  const descriptor = JSON.parse(await readFile(descriptorPath, "utf-8")) as DatasetDescriptor;
  if (descriptor.format !== DATASET_FORMAT) {
    throw new Error(`unsupported dataset format ${descriptor.format}`);
  }
  if (descriptor.labels.length !== descriptor.count) {
    throw new Error(
      `descriptor lists ${descriptor.labels.length} labels for ${descriptor.count} samples`,
    );
  }
  for (const label of descriptor.labels) {
    if (!Number.isInteger(label) || label < 0 || label >= descriptor.classes) {
      throw new Error(`label ${label} out of range [0, ${descriptor.classes})`);
    }
  }
  const sampleSize = descriptor.shape.reduce((a, b) => a * b, 1);
  const raw = await readFile(path.join(path.dirname(descriptorPath), descriptor.imagesFile));
  const expected = 4 * descriptor.count * sampleSize;
  if (raw.byteLength !== expected) {
    throw new Error(`images file holds ${raw.byteLength} bytes, expected ${expected}`);
  }
  const view = new DataView(raw.buffer, raw.byteOffset, raw.byteLength);
  const images = new Float32Array(descriptor.count * sampleSize);
  for (let i = 0; i < images.length; i++) images[i] = view.getFloat32(i * 4, true);
  return { descriptor, images, sampleSize };
}

/** View of one sample's flattened tensor. */
export function sampleOf(set: ImageSet, index: number): Float32Array {
  return set.images.subarray(index * set.sampleSize, (index + 1) * set.sampleSize);
}
