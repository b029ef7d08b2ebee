/** Shared test fixtures: seeded images, a toy checkpoint, a manifest. */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { encodePpm } from "../src/ppm.js";
import { buildToyModel, saveCheckpoint } from "../src/model.js";

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function randomPixels(rng: () => number, width: number, height: number): Uint8Array {
  const pixels = new Uint8Array(width * height * 3);
  for (let i = 0; i < pixels.length; i++) pixels[i] = Math.floor(rng() * 256);
  return pixels;
}

export function writeImage(path: string, rng: () => number, width = 8, height = 8): void {
  writeFileSync(path, encodePpm({ width, height, maxval: 255, pixels: randomPixels(rng, width, height) }));
}

export interface Corpus {
  root: string;
  manifestPath: string;
  checkpointPath: string;
  outputPath: string;
  classes: string[];
  imageCount: number;
}

export const CORPUS_CLASSES = ["car", "cyclist", "pedestrian"];

/** 12 train + 3 test + 2 unseen images under one tag directory, 17 total. */
export async function makeCorpus(root: string, seed = 99): Promise<Corpus> {
  const rng = mulberry32(seed);
  for (const split of ["train", "test"]) {
    const perClass = split === "train" ? 4 : 1;
    for (const name of CORPUS_CLASSES) {
      const dir = join(root, "images", split, name);
      mkdirSync(dir, { recursive: true });
      for (let i = 0; i < perClass; i++) writeImage(join(dir, `${i}.ppm`), rng);
    }
  }
  const oodDir = join(root, "images", "ood", "tram");
  mkdirSync(oodDir, { recursive: true });
  // one odd-sized image exercises the resize path
  writeImage(join(oodDir, "0.ppm"), rng, 12, 10);
  writeImage(join(oodDir, "1.ppm"), rng);

  const checkpointPath = join(root, "toy.ckpt.json");
  await saveCheckpoint(buildToyModel({ classCount: 3, inputSize: 8, seed: 7 }), checkpointPath);

  const manifestPath = join(root, "manifest.json");
  writeFileSync(
    manifestPath,
    JSON.stringify({
      classes: CORPUS_CLASSES,
      splits: { train: "images/train", test: "images/test", unseen: "images/ood" },
      checkpoint: "toy.ckpt.json",
      output: "out/logits.jsonl",
    }),
  );
  return {
    root,
    manifestPath,
    checkpointPath,
    outputPath: join(root, "out", "logits.jsonl"),
    classes: CORPUS_CLASSES,
    imageCount: 17,
  };
}
