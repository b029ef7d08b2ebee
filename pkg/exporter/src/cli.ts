/** Command line entry: `logit-export export --manifest PATH`.
 *
 * Exit codes: 0 success, 1 usage error, 2 operational failure.
 */

import { parseArgs } from "node:util";
import { ExportError } from "./errors.js";
import { loadManifest } from "./manifest.js";
import { exportLogits } from "./export.js";

const USAGE = "usage: logit-export export --manifest PATH";

export async function runCli(argv: string[]): Promise<number> {
  if (argv.length === 0) {
    console.error(USAGE);
    return 1;
  }
  if (argv[0] === "-h" || argv[0] === "--help") {
    console.log(USAGE);
    return 0;
  }
  if (argv[0] !== "export") {
    console.error(`unknown command ${JSON.stringify(argv[0])}\n${USAGE}`);
    return 1;
  }
  let manifestPath: string | undefined;
  try {
    const { values } = parseArgs({
      args: argv.slice(1),
      options: {
        manifest: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
      strict: true,
    });
    if (values.help) {
      console.log(USAGE);
      return 0;
    }
    manifestPath = values.manifest;
  } catch (err) {
    console.error(`${(err as Error).message}\n${USAGE}`);
    return 1;
  }
  if (manifestPath === undefined) {
    console.error(`--manifest is required\n${USAGE}`);
    return 1;
  }
  try {
    const manifest = loadManifest(manifestPath);
    const result = await exportLogits(manifest);
    const note =
      result.skipped === 0
        ? ""
        : ` (skipped ${result.skipped} unreadable image${result.skipped === 1 ? "" : "s"})`;
    console.log(`wrote ${result.exported} records to ${result.output}${note}`);
    return 0;
  } catch (err) {
    if (err instanceof ExportError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}
