import { describe, expect, it } from "vitest";
import { decodePpm, encodePpm, ppmToFloats, PpmError } from "../src/ppm.js";
import { mulberry32, randomPixels } from "./fixtures.js";

function ascii(text: string): Uint8Array {
  const out = new Uint8Array(text.length);
  for (let i = 0; i < text.length; i++) out[i] = text.charCodeAt(i);
  return out;
}

describe("decodePpm", () => {
  it("round-trips an encoded image exactly", () => {
    const rng = mulberry32(5);
    const pixels = randomPixels(rng, 6, 4);
    const image = decodePpm(encodePpm({ width: 6, height: 4, maxval: 255, pixels }));
    expect(image.width).toBe(6);
    expect(image.height).toBe(4);
    expect(image.maxval).toBe(255);
    expect(Array.from(image.pixels)).toEqual(Array.from(pixels));
  });

  it("honors header comments", () => {
    const body = String.fromCharCode(...[1, 2, 3]);
    const bytes = ascii(`P6 # a comment\n# another\n1 1\n# last\n255\n${body}`);
    const image = decodePpm(bytes);
    expect(Array.from(image.pixels)).toEqual([1, 2, 3]);
  });

  it("accepts trailing bytes after the samples", () => {
    const bytes = ascii(`P6\n1 1\n255\n${String.fromCharCode(9, 9, 9)}junk`);
    expect(Array.from(decodePpm(bytes).pixels)).toEqual([9, 9, 9]);
  });

  it("rejects other netpbm flavors", () => {
    expect(() => decodePpm(ascii("P5\n1 1\n255\nx"))).toThrow(PpmError);
    expect(() => decodePpm(ascii("not an image"))).toThrow(/magic/);
  });

  it("rejects truncated sample data", () => {
    expect(() => decodePpm(ascii("P6\n2 2\n255\nxyz"))).toThrow(/expected 12 sample bytes/);
  });

  it("rejects truncated headers", () => {
    expect(() => decodePpm(ascii("P6\n2"))).toThrow(PpmError);
    expect(() => decodePpm(ascii("P6\n2 2"))).toThrow(PpmError);
  });

  it("rejects two-byte samples and zero dimensions", () => {
    expect(() => decodePpm(ascii("P6\n1 1\n65535\n......"))).toThrow(/maxval/);
    expect(() => decodePpm(ascii("P6\n0 1\n255\n"))).toThrow(PpmError);
  });

  it("rejects non-numeric dimensions", () => {
    expect(() => decodePpm(ascii("P6\n-1 1\n255\n"))).toThrow(/bad width/);
  });
});

describe("encodePpm", () => {
  it("rejects sample counts that disagree with the dimensions", () => {
    expect(() => encodePpm({ width: 2, height: 2, maxval: 255, pixels: new Uint8Array(3) })).toThrow(
      /expected 12 sample bytes/,
    );
  });

  it("rejects samples above maxval", () => {
    const pixels = new Uint8Array([0, 50, 41]);
    expect(() => encodePpm({ width: 1, height: 1, maxval: 40, pixels })).toThrow(/exceeds maxval/);
  });
});

describe("ppmToFloats", () => {
  it("rescales samples by maxval into [0, 1]", () => {
    const image = { width: 1, height: 1, maxval: 200, pixels: new Uint8Array([0, 100, 200]) };
    expect(Array.from(ppmToFloats(image))).toEqual([0, 0.5, 1]);
  });
});
