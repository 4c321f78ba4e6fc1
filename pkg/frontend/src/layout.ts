import { LayoutError, ValidationError } from "./errors.js";

/** Rows-of-numbers view of a batch, one entity per row. */
export type NumberRows = ReadonlyArray<ReadonlyArray<number>>;

/**
 * Accepted batch layouts: an array of fixed-width rows, or one
 * contiguous row-major Float64Array whose length is a multiple of the
 * row width.
 */
export type RowBuffer = Float64Array | NumberRows;

export const BOX_LAYOUT = "N rows of 5 numbers (cx, cy, w, h, theta)";
export const OFFSET_LAYOUT = "N rows of 5 numbers (tx, ty, tw, th, ttheta)";
export const QUAD_LAYOUT = "N rows of 8 numbers (x1, y1, ..., x4, y4)";

/**
 * Copy a caller buffer into plain rows, validating shape and finiteness.
 * The copy is what gets serialized, so caller buffers are never touched
 * after this returns.
 */
export function toRows(
  input: RowBuffer,
  width: number,
  label: string,
  layout: string,
): number[][] {
  const rows: number[][] = [];
  if (input instanceof Float64Array) {
    if (input.length % width !== 0) {
      throw new LayoutError(
        `${label} must be ${layout}; a flat buffer of length ` +
          `${input.length} is not a multiple of ${width}`,
      );
    }
    for (let i = 0; i * width < input.length; i++) {
      rows.push(Array.from(input.subarray(i * width, (i + 1) * width)));
    }
  } else {
    for (let i = 0; i < input.length; i++) {
      const row = input[i];
      if (!Array.isArray(row) || row.length !== width) {
        throw new LayoutError(
          `${label}[${i}] has ${Array.isArray(row) ? row.length : typeof row} ` +
            `values; expected ${layout}`,
        );
      }
      rows.push(row.slice());
    }
  }
  for (let i = 0; i < rows.length; i++) {
    for (let j = 0; j < width; j++) {
      const value = rows[i][j];
      if (typeof value !== "number" || !Number.isFinite(value)) {
        throw new ValidationError(`${label}[${i}][${j}] is not finite: ${value}`);
      }
    }
  }
  return rows;
}

/** Validate a parallel scalar array (scores) against the batch size. */
export function toScalars(
  input: ArrayLike<number>,
  label: string,
  expected: number,
): number[] {
  if (input.length !== expected) {
    throw new LayoutError(
      `${label} has ${input.length} values but the batch has ${expected} rows`,
    );
  }
  const values = Array.from(input);
  for (let i = 0; i < values.length; i++) {
    if (typeof values[i] !== "number" || !Number.isFinite(values[i])) {
      throw new ValidationError(`${label}[${i}] is not finite: ${values[i]}`);
    }
  }
  return values;
}

/** Validate a parallel integer array (class ids) against the batch size. */
export function toIntegers(
  input: ArrayLike<number>,
  label: string,
  expected: number,
): number[] {
  const values = toScalars(input, label, expected);
  for (let i = 0; i < values.length; i++) {
    if (!Number.isInteger(values[i])) {
      throw new ValidationError(`${label}[${i}] is not an integer: ${values[i]}`);
    }
  }
  return values;
}
