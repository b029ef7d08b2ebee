/** Export manifest: what to run the classifier on and where results go.
 *
 * JSON file with exactly four keys:
 *   classes     ordered class names; position is the logit dimension
 *   splits      split name to image-directory path, at least one entry
 *   checkpoint  model checkpoint path
 *   output      JSONL output path
 *
 * Each split directory holds one subdirectory per class. Subdirectory
 * names in labeled splits must match the class list exactly; in the
 * unseen split they are free-form and become the record tag. Relative
 * paths are resolved against the manifest's own directory.
 */

import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { ExportError } from "./errors.js";

export const SPLITS = ["train", "validation", "test", "unseen"] as const;

export interface ExportManifest {
  classes: string[];
  splits: Record<string, string>;
  checkpoint: string;
  output: string;
}

const MANIFEST_KEYS = ["classes", "splits", "checkpoint", "output"];

function requireString(value: unknown, what: string): string {
  if (typeof value !== "string" || value === "") {
    throw new ExportError(`${what} must be a non-empty string, got ${JSON.stringify(value)}`);
  }
  return value;
}

export function parseManifest(raw: unknown, baseDir: string): ExportManifest {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ExportError("manifest must be a JSON object");
  }
  const obj = raw as Record<string, unknown>;
  for (const key of Object.keys(obj)) {
    if (!MANIFEST_KEYS.includes(key)) throw new ExportError(`unknown manifest key ${JSON.stringify(key)}`);
  }
  for (const key of MANIFEST_KEYS) {
    if (!(key in obj)) throw new ExportError(`manifest is missing ${JSON.stringify(key)}`);
  }

  if (!Array.isArray(obj.classes)) throw new ExportError("classes must be an array of class names");
  const classes = obj.classes.map((name, i) => requireString(name, `classes[${i}]`));
  if (classes.length < 2) throw new ExportError("at least 2 classes are required");
  if (new Set(classes).size !== classes.length) {
    throw new ExportError(`duplicate class names: ${JSON.stringify(classes)}`);
  }

  const rawSplits = obj.splits;
  if (typeof rawSplits !== "object" || rawSplits === null || Array.isArray(rawSplits)) {
    throw new ExportError("splits must be an object mapping split names to directories");
  }
  const splitNames = Object.keys(rawSplits as Record<string, unknown>);
  if (splitNames.length === 0) throw new ExportError("splits must name at least one split");
  const splits: Record<string, string> = {};
  for (const name of splitNames) {
    if (!(SPLITS as readonly string[]).includes(name)) {
      throw new ExportError(`unknown split ${JSON.stringify(name)}; expected one of ${SPLITS.join(", ")}`);
    }
    const dir = requireString((rawSplits as Record<string, unknown>)[name], `splits.${name}`);
    splits[name] = resolve(baseDir, dir);
  }

  return {
    classes,
    splits,
    checkpoint: resolve(baseDir, requireString(obj.checkpoint, "checkpoint")),
    output: resolve(baseDir, requireString(obj.output, "output")),
  };
}

export function loadManifest(path: string): ExportManifest {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (err) {
    throw new ExportError(`cannot read manifest ${path}: ${(err as Error).message}`);
  }
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new ExportError(`${path}: invalid JSON: ${(err as Error).message}`);
  }
  return parseManifest(raw, dirname(resolve(path)));
}
