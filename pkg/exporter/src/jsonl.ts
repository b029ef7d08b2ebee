/** Canonical JSONL dataset writing.
 *
 * The output must be stable down to the byte: keys in sorted order, ": "
 * and ", " spacing, floats rendered with 17 significant digits (which
 * round-trips any IEEE-754 double exactly), non-ASCII escaped. Integral
 * floats keep a trailing ".0" so strict readers never see a bare int
 * where a float belongs.
 */

import { ExportError } from "./errors.js";

export interface DatasetRecord {
  label: string | null;
  logits: number[];
  split: string;
  tag: string | null;
}

/** Exact decimal digits of a positive finite double (no trailing zeros)
 * plus the power of ten of the leading digit. Every double is m * 2^e
 * with integers m, e, so its decimal expansion is finite and BigInt
 * arithmetic recovers it without any rounding.
 */
function exactDecimal(x: number): { digits: string; exp: number } {
  const view = new DataView(new ArrayBuffer(8));
  view.setFloat64(0, x);
  const hi = view.getUint32(0);
  const lo = view.getUint32(4);
  const biasedExp = (hi >>> 20) & 0x7ff;
  const fraction = (BigInt(hi & 0xfffff) << 32n) | BigInt(lo);
  const m = biasedExp === 0 ? fraction : fraction | (1n << 52n);
  const e = (biasedExp === 0 ? 1 : biasedExp) - 1075;
  let digits: string;
  let pointOffset: number;
  if (e >= 0) {
    digits = (m << BigInt(e)).toString();
    pointOffset = 0;
  } else {
    // m / 2^-e == m * 5^-e / 10^-e
    digits = (m * 5n ** BigInt(-e)).toString();
    pointOffset = -e;
  }
  const exp = digits.length - 1 - pointOffset;
  return { digits: digits.replace(/0+$/, ""), exp };
}

/** Round a digit string to `precision` digits, ties to even, like the
 * consumer's float renderer. Returns 1 in `bump` when a carry out of the
 * leading digit (999.. to 1000..) raised the exponent.
 */
function roundDigits(digits: string, precision: number): { digits: string; bump: number } {
  if (digits.length <= precision) return { digits, bump: 0 };
  const head = digits.slice(0, precision);
  const tail = digits.slice(precision);
  const lastKept = head.charCodeAt(precision - 1) - 48;
  // trailing zeros were stripped, so a bare "5" tail is an exact tie
  const roundUp = tail[0] > "5" || (tail[0] === "5" && (tail.length > 1 || lastKept % 2 === 1));
  if (!roundUp) return { digits: head.replace(/0+$/, ""), bump: 0 };
  const arr = head.split("");
  let i = precision - 1;
  while (i >= 0 && arr[i] === "9") {
    arr[i] = "0";
    i--;
  }
  if (i < 0) return { digits: "1", bump: 1 };
  arr[i] = String.fromCharCode(arr[i].charCodeAt(0) + 1);
  return { digits: arr.join("").replace(/0+$/, ""), bump: 0 };
}

/** Render a finite double with 17 significant digits, printf %g style. */
export function formatFloat(x: number): string {
  if (!Number.isFinite(x)) throw new ExportError(`cannot serialize non-finite value ${x}`);
  if (x === 0) return Object.is(x, -0) ? "-0.0" : "0.0";
  const negative = x < 0;
  const decimal = exactDecimal(Math.abs(x));
  const rounded = roundDigits(decimal.digits, 17);
  const digits = rounded.digits;
  const exp = decimal.exp + rounded.bump;
  let body: string;
  if (exp < -4 || exp >= 17) {
    const mantissa = digits.length > 1 ? `${digits[0]}.${digits.slice(1)}` : digits;
    const magnitude = Math.abs(exp).toString().padStart(2, "0");
    body = `${mantissa}e${exp < 0 ? "-" : "+"}${magnitude}`;
  } else if (exp >= digits.length - 1) {
    body = digits + "0".repeat(exp - digits.length + 1) + ".0";
  } else if (exp >= 0) {
    body = `${digits.slice(0, exp + 1)}.${digits.slice(exp + 1)}`;
  } else {
    body = `0.${"0".repeat(-exp - 1)}${digits}`;
  }
  return negative ? `-${body}` : body;
}

/** JSON string literal with every non-ASCII UTF-16 unit escaped. */
export function encodeString(s: string): string {
  let out = '"';
  for (let i = 0; i < s.length; i++) {
    const code = s.charCodeAt(i);
    const ch = s[i];
    if (ch === '"') out += '\\"';
    else if (ch === "\\") out += "\\\\";
    else if (code === 0x08) out += "\\b";
    else if (code === 0x09) out += "\\t";
    else if (code === 0x0a) out += "\\n";
    else if (code === 0x0c) out += "\\f";
    else if (code === 0x0d) out += "\\r";
    else if (code < 0x20 || code > 0x7e) out += "\\u" + code.toString(16).padStart(4, "0");
    else out += ch;
  }
  return out + '"';
}

export function classesLine(classes: string[]): string {
  return `{"classes": [${classes.map(encodeString).join(", ")}]}`;
}

export function recordLine(record: DatasetRecord): string {
  const label = record.label === null ? "null" : encodeString(record.label);
  const logits = record.logits.map(formatFloat).join(", ");
  let line = `{"label": ${label}, "logits": [${logits}], "split": ${encodeString(record.split)}`;
  if (record.tag !== null) line += `, "tag": ${encodeString(record.tag)}`;
  return line + "}";
}

/** Full file text: classes header first, one record per line, LF endings. */
export function datasetText(classes: string[], records: DatasetRecord[]): string {
  const lines = [classesLine(classes)];
  for (const record of records) lines.push(recordLine(record));
  return lines.join("\n") + "\n";
}
