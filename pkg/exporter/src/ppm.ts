/** Binary PPM (P6) decoding and encoding.
 *
 * Only one-byte samples are supported (maxval 1..255). Header comments
 * starting with '#' are honored. A decode failure throws PpmError, which
 * the export pipeline treats as an unreadable image to skip, not a fatal
 * error.
 */

/** Raised when a byte buffer is not a decodable one-byte-sample P6 file. */
export class PpmError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "PpmError";
  }
}

export interface PpmImage {
  width: number;
  height: number;
  maxval: number;
  /** Interleaved RGB samples, row-major, width*height*3 bytes. */
  pixels: Uint8Array;
}

function isSpace(byte: number): boolean {
  // space, tab, LF, VT, FF, CR
  return byte === 32 || (byte >= 9 && byte <= 13);
}

export function decodePpm(bytes: Uint8Array): PpmImage {
  let pos = 0;

  function nextToken(): string {
    for (;;) {
      while (pos < bytes.length && isSpace(bytes[pos])) pos++;
      if (pos < bytes.length && bytes[pos] === 0x23) {
        // comment runs to end of line
        while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
        continue;
      }
      break;
    }
    const start = pos;
    while (pos < bytes.length && !isSpace(bytes[pos]) && bytes[pos] !== 0x23) pos++;
    if (pos === start) throw new PpmError("truncated header");
    let token = "";
    for (let i = start; i < pos; i++) token += String.fromCharCode(bytes[i]);
    return token;
  }

  function nextDimension(what: string): number {
    const token = nextToken();
    if (!/^\d+$/.test(token)) throw new PpmError(`bad ${what} ${JSON.stringify(token)}`);
    return parseInt(token, 10);
  }

  const magic = nextToken();
  if (magic !== "P6") throw new PpmError(`not a binary PPM file (magic ${JSON.stringify(magic)})`);
  const width = nextDimension("width");
  const height = nextDimension("height");
  const maxval = nextDimension("maxval");
  if (width < 1 || height < 1) throw new PpmError(`bad dimensions ${width}x${height}`);
  if (maxval < 1 || maxval > 255) {
    throw new PpmError(`unsupported maxval ${maxval}; only one-byte samples are handled`);
  }
  // exactly one whitespace byte separates the header from the samples
  if (pos >= bytes.length || !isSpace(bytes[pos])) throw new PpmError("missing header terminator");
  pos++;
  const need = width * height * 3;
  if (bytes.length - pos < need) {
    throw new PpmError(`expected ${need} sample bytes, found ${bytes.length - pos}`);
  }
  return { width, height, maxval, pixels: bytes.slice(pos, pos + need) };
}

export function encodePpm(image: PpmImage): Uint8Array {
  const { width, height, maxval, pixels } = image;
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new PpmError(`bad dimensions ${width}x${height}`);
  }
  if (!Number.isInteger(maxval) || maxval < 1 || maxval > 255) {
    throw new PpmError(`bad maxval ${maxval}`);
  }
  if (pixels.length !== width * height * 3) {
    throw new PpmError(`expected ${width * height * 3} sample bytes, got ${pixels.length}`);
  }
  for (const sample of pixels) {
    if (sample > maxval) throw new PpmError(`sample ${sample} exceeds maxval ${maxval}`);
  }
  const header = `P6\n${width} ${height}\n${maxval}\n`;
  const out = new Uint8Array(header.length + pixels.length);
  for (let i = 0; i < header.length; i++) out[i] = header.charCodeAt(i);
  out.set(pixels, header.length);
  return out;
}

/** Samples rescaled to [0, 1] floats, same row-major RGB layout. */
export function ppmToFloats(image: PpmImage): Float32Array {
  const out = new Float32Array(image.pixels.length);
  for (let i = 0; i < image.pixels.length; i++) out[i] = image.pixels[i] / image.maxval;
  return out;
}
