/** Operational failure (bad manifest, unreadable directory, checkpoint mismatch). */
export class ExportError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ExportError";
  }
}
