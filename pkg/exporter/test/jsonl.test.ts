import { spawnSync } from "node:child_process";
import { describe, expect, it } from "vitest";
import { classesLine, datasetText, encodeString, formatFloat, recordLine } from "../src/jsonl.js";
import { ExportError } from "../src/errors.js";
import { mulberry32 } from "./fixtures.js";

/** What Python's format(x, ".17g") plus a trailing-".0" rule would print.
 * The consumer of these files renders floats exactly that way, so byte
 * compatibility hinges on matching it digit for digit.
 */
function pythonRenderings(values: number[]): string[] {
  const script = [
    "import json, sys",
    "for s in json.load(sys.stdin):",
    "    x = float(s)",
    "    t = format(x, '.17g')",
    "    if '.' not in t and 'e' not in t and 'E' not in t:",
    "        t += '.0'",
    "    print(t)",
  ].join("\n");
  const payload = JSON.stringify(values.map(v => (Object.is(v, -0) ? "-0" : String(v))));
  const run = spawnSync("python3", ["-c", script], { input: payload, encoding: "utf-8" });
  expect(run.status).toBe(0);
  return run.stdout.trim().split("\n");
}

describe("formatFloat", () => {
  it("matches the 17-significant-digit rendering of the consumer, digit for digit", () => {
    const values = [
      0, -0, 1, -1, 2, 0.5, -2.5, 0.1, 1 / 3, 0.95, 1.5, 100, 1230,
      1e15, 1e16, 99999999999999992, 1e17, 1.2345678e17, 1e20, -1e20,
      1e-4, 0.00044033644371666014, 1e-5, -1e-5, 1e-100, 5e-324,
      1.7976931348623157e308, 2.2250738585072014e-308,
      Math.PI, Math.E, Math.fround(0.30373930931091309),
    ];
    const rng = mulberry32(17);
    for (let i = 0; i < 3000; i++) {
      const scale = Math.pow(2, Math.floor(rng() * 120) - 60);
      values.push((rng() * 2 - 1) * scale);
    }
    // every logit the exporter writes is a widened float32
    for (let i = 0; i < 1000; i++) {
      values.push(Math.fround((rng() * 2 - 1) * 30));
    }
    const expected = pythonRenderings(values);
    expect(expected).toHaveLength(values.length);
    for (let i = 0; i < values.length; i++) {
      expect(formatFloat(values[i]), `value ${values[i]}`).toBe(expected[i]);
    }
  });

  it("keeps a float marker on integral values", () => {
    expect(formatFloat(1)).toBe("1.0");
    expect(formatFloat(-3)).toBe("-3.0");
    expect(formatFloat(100)).toBe("100.0");
    expect(formatFloat(0)).toBe("0.0");
    expect(formatFloat(-0)).toBe("-0.0");
  });

  it("rejects non-finite values", () => {
    expect(() => formatFloat(NaN)).toThrow(ExportError);
    expect(() => formatFloat(Infinity)).toThrow(/non-finite/);
  });
});

describe("encodeString", () => {
  it("escapes non-ASCII as lowercase UTF-16 unit escapes", () => {
    expect(encodeString("café")).toBe('"caf\\u00e9"');
    expect(encodeString("\u{1f600}")).toBe('"\\ud83d\\ude00"');
    expect(encodeString("")).toBe('"\\u007f"');
  });

  it("uses the short escapes for common control characters", () => {
    expect(encodeString('a"b\\c\n\t')).toBe('"a\\"b\\\\c\\n\\t"');
    expect(encodeString("")).toBe('"\\u0001"');
  });
});

describe("dataset lines", () => {
  it("renders records with sorted keys and canonical spacing", () => {
    const line = recordLine({ label: "car", logits: [1, 2.5], split: "train", tag: null });
    expect(line).toBe('{"label": "car", "logits": [1.0, 2.5], "split": "train"}');
  });

  it("renders unseen records with a null label and the tag", () => {
    const line = recordLine({ label: null, logits: [0.5, -1], split: "unseen", tag: "tram" });
    expect(line).toBe('{"label": null, "logits": [0.5, -1.0], "split": "unseen", "tag": "tram"}');
  });

  it("pins the classes header layout", () => {
    expect(classesLine(["a", "b"])).toBe('{"classes": ["a", "b"]}');
  });

  it("joins header and records with LF and a trailing newline", () => {
    const text = datasetText(["a", "b"], [{ label: "a", logits: [0.5, 1], split: "test", tag: null }]);
    expect(text).toBe('{"classes": ["a", "b"]}\n{"label": "a", "logits": [0.5, 1.0], "split": "test"}\n');
  });
});
