import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, describe, expect, it } from "vitest";
import { loadManifest, parseManifest } from "../src/manifest.js";
import { ExportError } from "../src/errors.js";

const root = mkdtempSync(join(tmpdir(), "logit-export-manifest-"));
afterAll(() => rmSync(root, { recursive: true, force: true }));

const VALID = {
  classes: ["car", "cyclist"],
  splits: { train: "images/train", unseen: "ood" },
  checkpoint: "toy.ckpt.json",
  output: "out/logits.jsonl",
};

describe("parseManifest", () => {
  it("resolves relative paths against the manifest directory", () => {
    const manifest = parseManifest(VALID, "/base");
    expect(manifest.splits.train).toBe("/base/images/train");
    expect(manifest.splits.unseen).toBe("/base/ood");
    expect(manifest.checkpoint).toBe("/base/toy.ckpt.json");
    expect(manifest.output).toBe("/base/out/logits.jsonl");
  });

  it("keeps absolute paths as they are", () => {
    const manifest = parseManifest({ ...VALID, output: "/elsewhere/l.jsonl" }, "/base");
    expect(manifest.output).toBe("/elsewhere/l.jsonl");
  });

  it("rejects unknown and missing keys", () => {
    expect(() => parseManifest({ ...VALID, extra: 1 }, "/b")).toThrow(/unknown manifest key "extra"/);
    const { output, ...missing } = VALID;
    expect(() => parseManifest(missing, "/b")).toThrow(/missing "output"/);
  });

  it("rejects malformed class lists", () => {
    expect(() => parseManifest({ ...VALID, classes: ["only"] }, "/b")).toThrow(/at least 2/);
    expect(() => parseManifest({ ...VALID, classes: ["a", "a"] }, "/b")).toThrow(/duplicate/);
    expect(() => parseManifest({ ...VALID, classes: ["a", 3] }, "/b")).toThrow(/classes\[1\]/);
    expect(() => parseManifest({ ...VALID, classes: "car,bus" }, "/b")).toThrow(/array/);
  });

  it("rejects malformed split tables", () => {
    expect(() => parseManifest({ ...VALID, splits: {} }, "/b")).toThrow(/at least one split/);
    expect(() => parseManifest({ ...VALID, splits: { dev: "x" } }, "/b")).toThrow(/unknown split "dev"/);
    expect(() => parseManifest({ ...VALID, splits: { train: 4 } }, "/b")).toThrow(/splits\.train/);
    expect(() => parseManifest({ ...VALID, splits: ["train"] }, "/b")).toThrow(/object/);
  });

  it("rejects non-object manifests and empty path strings", () => {
    expect(() => parseManifest([], "/b")).toThrow(/JSON object/);
    expect(() => parseManifest(null, "/b")).toThrow(ExportError);
    expect(() => parseManifest({ ...VALID, checkpoint: "" }, "/b")).toThrow(/checkpoint/);
  });
});

describe("loadManifest", () => {
  it("loads a manifest file and resolves against its directory", () => {
    const path = join(root, "manifest.json");
    writeFileSync(path, JSON.stringify(VALID));
    const manifest = loadManifest(path);
    expect(manifest.checkpoint).toBe(join(root, "toy.ckpt.json"));
    expect(manifest.classes).toEqual(["car", "cyclist"]);
  });

  it("reports unreadable files and bad JSON as operational errors", () => {
    expect(() => loadManifest(join(root, "absent.json"))).toThrow(/cannot read manifest/);
    const bad = join(root, "bad.json");
    writeFileSync(bad, "{nope");
    expect(() => loadManifest(bad)).toThrow(/invalid JSON/);
  });
});
