import * as tf from "@tensorflow/tfjs";
import { mkdirSync, mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";
import { collectImages, exportLogits } from "../src/export.js";
import { loadManifest, parseManifest } from "../src/manifest.js";
import { loadCheckpoint, logitModel, modelInputSize } from "../src/model.js";
import { decodePpm, ppmToFloats } from "../src/ppm.js";
import { recordLine } from "../src/jsonl.js";
import { ExportError } from "../src/errors.js";
import { Corpus, makeCorpus, writeImage, mulberry32, CORPUS_CLASSES } from "./fixtures.js";

const root = mkdtempSync(join(tmpdir(), "logit-export-run-"));
let corpus: Corpus;

beforeAll(async () => {
  corpus = await makeCorpus(join(root, "corpus"));
  mkdirSync(join(root, "corpus"), { recursive: true });
});
afterAll(() => rmSync(root, { recursive: true, force: true }));

interface ParsedLine {
  label: string | null;
  logits: number[];
  split: string;
  tag?: string;
}

function readLines(path: string): { classes: string[]; records: ParsedLine[] } {
  const lines = readFileSync(path, "utf-8").trimEnd().split("\n");
  const header = JSON.parse(lines[0]);
  return { classes: header.classes, records: lines.slice(1).map(l => JSON.parse(l)) };
}

describe("collectImages", () => {
  it("lists every image sorted by file path with split metadata", () => {
    const manifest = loadManifest(corpus.manifestPath);
    const entries = collectImages(manifest);
    expect(entries).toHaveLength(corpus.imageCount);
    const paths = entries.map(e => e.path);
    expect(paths).toEqual([...paths].sort());
    for (const entry of entries) {
      if (entry.split === "unseen") {
        expect(entry.label).toBeNull();
        expect(entry.tag).toBe("tram");
      } else {
        expect(corpus.classes).toContain(entry.label);
        expect(entry.tag).toBeNull();
      }
    }
  });

  it("ignores stray files at the split level and allows empty class directories", () => {
    const tree = join(root, "stray");
    mkdirSync(join(tree, "train", "a"), { recursive: true });
    mkdirSync(join(tree, "train", "b"), { recursive: true });
    writeFileSync(join(tree, "train", "notes.txt"), "not an image");
    writeImage(join(tree, "train", "b", "0.ppm"), mulberry32(1));
    const manifest = parseManifest(
      { classes: ["a", "b"], splits: { train: "train" }, checkpoint: "x", output: "y" },
      tree,
    );
    const entries = collectImages(manifest);
    expect(entries).toHaveLength(1);
    expect(entries[0].label).toBe("b");
  });

  it("rejects labeled split directories that are not classes", () => {
    const tree = join(root, "rogue");
    mkdirSync(join(tree, "test", "van"), { recursive: true });
    const manifest = parseManifest(
      { classes: ["a", "b"], splits: { test: "test" }, checkpoint: "x", output: "y" },
      tree,
    );
    expect(() => collectImages(manifest)).toThrow(/"van" is not in the class list/);
  });

  it("treats unseen directory names as free-form tags, even class names", () => {
    const tree = join(root, "overlap");
    mkdirSync(join(tree, "ood", "a"), { recursive: true });
    writeImage(join(tree, "ood", "a", "0.ppm"), mulberry32(2));
    const manifest = parseManifest(
      { classes: ["a", "b"], splits: { unseen: "ood" }, checkpoint: "x", output: "y" },
      tree,
    );
    const entries = collectImages(manifest);
    expect(entries[0].label).toBeNull();
    expect(entries[0].tag).toBe("a");
  });

  it("reports missing split directories as operational errors", () => {
    const manifest = parseManifest(
      { classes: ["a", "b"], splits: { train: "nowhere" }, checkpoint: "x", output: "y" },
      join(root, "void"),
    );
    expect(() => collectImages(manifest)).toThrow(/cannot list train directory/);
  });
});

describe("exportLogits", () => {
  it("writes one record per image with the manifest classes pinned first", async () => {
    const manifest = loadManifest(corpus.manifestPath);
    const result = await exportLogits(manifest);
    expect(result).toMatchObject({ exported: 17, skipped: 0, output: corpus.outputPath });

    const { classes, records } = readLines(corpus.outputPath);
    expect(classes).toEqual(corpus.classes);
    expect(records).toHaveLength(17);
    for (const record of records) {
      expect(record.logits).toHaveLength(3);
      for (const v of record.logits) expect(Number.isFinite(v)).toBe(true);
    }
    expect(records.filter(r => r.split === "train")).toHaveLength(12);
    expect(records.filter(r => r.split === "test")).toHaveLength(3);
    const unseen = records.filter(r => r.split === "unseen");
    expect(unseen).toHaveLength(2);
    for (const record of unseen) {
      expect(record.label).toBeNull();
      expect(record.tag).toBe("tram");
    }
  });

  it("orders records by image path and reproduces per-image logits", async () => {
    const manifest = loadManifest(corpus.manifestPath);
    await exportLogits(manifest);
    const { records } = readLines(corpus.outputPath);

    const model = await loadCheckpoint(manifest.checkpoint);
    const single = logitModel(model);
    const { height, width } = modelInputSize(model);
    const entries = collectImages(manifest);
    expect(records).toHaveLength(entries.length);
    for (let i = 0; i < entries.length; i++) {
      expect(records[i].label).toBe(entries[i].label);
      expect(records[i].split).toBe(entries[i].split);
      const decoded = decodePpm(readFileSync(entries[i].path));
      const z = tf.tidy(() => {
        let image = tf.tensor3d(ppmToFloats(decoded), [decoded.height, decoded.width, 3]);
        if (decoded.height !== height || decoded.width !== width) {
          image = tf.image.resizeBilinear(image, [height, width]);
        }
        return (single.predict(image.expandDims(0)) as tf.Tensor).dataSync();
      });
      for (let c = 0; c < 3; c++) {
        expect(records[i].logits[c]).toBeCloseTo(z[c], 5);
      }
    }
  });

  it("re-renders every line from its parsed form byte-identically", async () => {
    const manifest = loadManifest(corpus.manifestPath);
    await exportLogits(manifest);
    const lines = readFileSync(corpus.outputPath, "utf-8").trimEnd().split("\n").slice(1);
    for (const line of lines) {
      const obj = JSON.parse(line) as ParsedLine;
      expect(recordLine({ label: obj.label, logits: obj.logits, split: obj.split, tag: obj.tag ?? null })).toBe(
        line,
      );
    }
  });

  it("is byte-deterministic across reruns and split listing order", async () => {
    const manifest = loadManifest(corpus.manifestPath);
    await exportLogits(manifest);
    const first = readFileSync(corpus.outputPath);
    await exportLogits(manifest);
    const second = readFileSync(corpus.outputPath);
    expect(second.equals(first)).toBe(true);

    // same directories listed in a different key order
    const reordered = parseManifest(
      {
        classes: corpus.classes,
        splits: { unseen: "images/ood", test: "images/test", train: "images/train" },
        checkpoint: "toy.ckpt.json",
        output: "out/reordered.jsonl",
      },
      corpus.root,
    );
    await exportLogits(reordered);
    expect(readFileSync(join(corpus.root, "out", "reordered.jsonl")).equals(first)).toBe(true);
  });

  it("skips unreadable images with a warning and a count", async () => {
    const broken = await makeCorpus(join(root, "broken"), 7);
    writeFileSync(join(broken.root, "images", "train", "car", "zz-bad.ppm"), "P6 not really");
    writeFileSync(join(broken.root, "images", "test", "cyclist", "zz-noise.ppm"), "garbage");
    const warn = vi.spyOn(console, "warn").mockImplementation(() => {});
    try {
      const result = await exportLogits(loadManifest(broken.manifestPath));
      expect(result.exported).toBe(17);
      expect(result.skipped).toBe(2);
      const calls = warn.mock.calls.map(args => String(args[0]));
      expect(calls.some(c => c.includes("zz-bad.ppm"))).toBe(true);
      expect(calls.some(c => c.includes("zz-noise.ppm"))).toBe(true);
    } finally {
      warn.mockRestore();
    }
    const { records } = readLines(broken.outputPath);
    expect(records).toHaveLength(17);
  });

  it("rejects checkpoints whose width disagrees with the class list", async () => {
    const manifest = loadManifest(corpus.manifestPath);
    manifest.classes = [...corpus.classes, "van"];
    await expect(exportLogits(manifest)).rejects.toThrow(
      /checkpoint produces 3-dimensional output but the manifest lists 4 classes/,
    );
  });

  it("surfaces structural problems as ExportError, not silent skips", async () => {
    const manifest = loadManifest(corpus.manifestPath);
    manifest.splits = { ...manifest.splits, validation: join(corpus.root, "absent") };
    await expect(exportLogits(manifest)).rejects.toThrow(ExportError);
  });
});
