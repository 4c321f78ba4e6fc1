/** Base class for every error raised by these bindings. */
export class RotboxBindingsError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

/**
 * An input buffer has the wrong shape for the operation.
 *
 * The message always names the expected layout (for example
 * "N rows of 5 numbers (cx, cy, w, h, theta)").
 */
export class LayoutError extends RotboxBindingsError {}

/**
 * A value inside an otherwise well-shaped buffer is unusable (NaN,
 * infinity, a fractional class id). The message names the offending
 * index.
 */
export class ValidationError extends RotboxBindingsError {}

/** The geometry engine process failed; carries its exit code and stderr. */
export class EngineError extends RotboxBindingsError {
  /** Process exit code, or null when the process could not be started. */
  readonly exitCode: number | null;
  /** Raw stderr text from the engine. */
  readonly stderr: string;

  constructor(message: string, exitCode: number | null, stderr: string) {
    super(message);
    this.exitCode = exitCode;
    this.stderr = stderr;
  }
}
