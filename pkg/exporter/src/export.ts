/** Run a classifier checkpoint over directory-per-class image trees and
 * write one logit record per image as canonical JSONL.
 *
 * Records are ordered by image file path so identical inputs always
 * produce byte-identical output. Unreadable images are skipped with a
 * warning and counted; structural problems (missing directories, class
 * name mismatches, wrong checkpoint dimension) are hard errors.
 */

import * as tf from "@tensorflow/tfjs";
import { mkdirSync, readdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { ExportError } from "./errors.js";
import { ExportManifest } from "./manifest.js";
import { decodePpm, ppmToFloats, PpmError } from "./ppm.js";
import { DatasetRecord, datasetText } from "./jsonl.js";
import { loadCheckpoint, logitModel, modelInputSize, outputDimension } from "./model.js";

export interface ImageEntry {
  path: string;
  split: string;
  label: string | null;
  tag: string | null;
}

export interface ExportResult {
  exported: number;
  skipped: number;
  output: string;
}

const BATCH_SIZE = 32;

/** List every image file under the manifest's split directories, sorted by path. */
export function collectImages(manifest: ExportManifest): ImageEntry[] {
  const entries: ImageEntry[] = [];
  for (const split of Object.keys(manifest.splits)) {
    const root = manifest.splits[split];
    let groups;
    try {
      groups = readdirSync(root, { withFileTypes: true });
    } catch (err) {
      throw new ExportError(`cannot list ${split} directory ${root}: ${(err as Error).message}`);
    }
    for (const group of groups) {
      // layout is one subdirectory per class; stray files at this level are not images
      if (!group.isDirectory()) continue;
      if (split !== "unseen" && !manifest.classes.includes(group.name)) {
        throw new ExportError(
          `${split} directory ${JSON.stringify(group.name)} is not in the class list; ` +
            "class directory names must match the class list exactly",
        );
      }
      const dir = join(root, group.name);
      let files;
      try {
        files = readdirSync(dir, { withFileTypes: true });
      } catch (err) {
        throw new ExportError(`cannot list class directory ${dir}: ${(err as Error).message}`);
      }
      for (const file of files) {
        if (!file.isFile()) continue;
        entries.push({
          path: join(dir, file.name),
          split,
          label: split === "unseen" ? null : group.name,
          tag: split === "unseen" ? group.name : null,
        });
      }
    }
  }
  entries.sort((a, b) => (a.path < b.path ? -1 : a.path > b.path ? 1 : 0));
  return entries;
}

export async function exportLogits(manifest: ExportManifest): Promise<ExportResult> {
  const model = await loadCheckpoint(manifest.checkpoint);
  const k = outputDimension(model);
  if (k !== manifest.classes.length) {
    throw new ExportError(
      `checkpoint produces ${k}-dimensional output but the manifest lists ` +
        `${manifest.classes.length} classes`,
    );
  }
  const logits = logitModel(model);
  const { height, width } = modelInputSize(model);
  const entries = collectImages(manifest);

  const records: DatasetRecord[] = [];
  let skipped = 0;
  let pending: { entry: ImageEntry; image: tf.Tensor3D }[] = [];

  const flush = (): void => {
    if (pending.length === 0) return;
    const batch = tf.stack(pending.map(p => p.image)) as tf.Tensor4D;
    const out = logits.predict(batch) as tf.Tensor2D;
    const values = out.dataSync();
    for (let i = 0; i < pending.length; i++) {
      const entry = pending[i].entry;
      records.push({
        label: entry.label,
        logits: Array.from(values.subarray(i * k, (i + 1) * k)),
        split: entry.split,
        tag: entry.tag,
      });
    }
    batch.dispose();
    out.dispose();
    for (const p of pending) p.image.dispose();
    pending = [];
  };

  for (const entry of entries) {
    let image: tf.Tensor3D;
    try {
      const decoded = decodePpm(readFileSync(entry.path));
      image = tf.tidy(() => {
        const raw = tf.tensor3d(ppmToFloats(decoded), [decoded.height, decoded.width, 3]);
        if (decoded.height === height && decoded.width === width) return raw;
        return tf.image.resizeBilinear(raw, [height, width]);
      });
    } catch (err) {
      const readFailure = err instanceof PpmError || (err as NodeJS.ErrnoException).code !== undefined;
      if (!readFailure) throw err;
      skipped += 1;
      console.warn(`skipping unreadable image ${entry.path}: ${(err as Error).message}`);
      continue;
    }
    pending.push({ entry, image });
    if (pending.length >= BATCH_SIZE) flush();
  }
  flush();

  mkdirSync(dirname(manifest.output), { recursive: true });
  writeFileSync(manifest.output, datasetText(manifest.classes, records));
  return { exported: records.length, skipped, output: manifest.output };
}
