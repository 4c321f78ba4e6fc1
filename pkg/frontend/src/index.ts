/**
 * rotbox-bindings - batched oriented-box geometry for Node
 *
 * Thin typed bindings over the rotbox geometry engine. Batches cross
 * the boundary as N×5 rows (cx, cy, w, h, theta; theta in radians,
 * y axis pointing down), either as arrays of rows or as one contiguous
 * row-major Float64Array. Results agree with the engine's own library
 * to 1e-12 because values travel as shortest-roundtrip decimal text.
 *
 * Inputs are validated, copied, and serialized up front: no operation
 * ever mutates a caller buffer. Each call runs in its own engine
 * process, so concurrent calls overlap instead of serializing.
 *
 * @example
 * ```typescript
 * import { batchedIou, batchedNms } from "rotbox-bindings";
 *
 * const matrix = await batchedIou(
 *   [[10, 10, 8, 4, 0.3]],
 *   [[11, 10, 8, 4, 0.35]],
 * );
 * const kept = await batchedNms(boxes, scores, classIds, { iouThresh: 0.5 });
 * ```
 */

import { runEngine } from "./engine.js";
import { EngineError, LayoutError, ValidationError } from "./errors.js";
import {
  BOX_LAYOUT,
  OFFSET_LAYOUT,
  QUAD_LAYOUT,
  toIntegers,
  toRows,
  toScalars,
  type NumberRows,
  type RowBuffer,
} from "./layout.js";

export { EngineError, LayoutError, RotboxBindingsError, ValidationError } from "./errors.js";
export { interpreter } from "./engine.js";
export type { NumberRows, RowBuffer } from "./layout.js";

/** Version of the bindings; kept in lockstep with the engine package. */
export const VERSION = "0.1.0";

function parseJson(stdout: string, context: string): any {
  try {
    return JSON.parse(stdout);
  } catch (cause) {
    throw new EngineError(
      `${context}: engine produced unparseable output: ${(cause as Error).message}`,
      0,
      "",
    );
  }
}

// ---------------------------------------------------------------- iou

/**
 * Pairwise IoU between two box batches.
 *
 * Returns a dense rows-by-columns matrix: entry [i][j] is the IoU of
 * `a` row i against `b` row j. Either batch may be empty, giving a
 * matrix with zero rows or zero columns.
 */
export async function batchedIou(
  a: RowBuffer,
  b: RowBuffer,
): Promise<number[][]> {
  const rowsA = toRows(a, 5, "a", BOX_LAYOUT);
  const rowsB = toRows(b, 5, "b", BOX_LAYOUT);
  if (rowsA.length === 0 || rowsB.length === 0) {
    return rowsA.map(() => []);
  }
  const stdout = await runEngine(
    ["iou", "--json", "--sparse", "-"],
    JSON.stringify({ a: rowsA, b: rowsB }),
  );
  const lines = stdout.trim().split("\n");
  const [n, m] = lines[0].split(",").map(Number);
  if (n !== rowsA.length || m !== rowsB.length) {
    throw new EngineError(
      `iou: engine reported a ${n}x${m} matrix for a ` +
        `${rowsA.length}x${rowsB.length} request`,
      0,
      "",
    );
  }
  const matrix: number[][] = [];
  for (let i = 0; i < n; i++) {
    matrix.push(new Array<number>(m).fill(0));
  }
  for (let k = 1; k < lines.length; k++) {
    const parts = lines[k].split(",");
    matrix[Number(parts[0])][Number(parts[1])] = Number(parts[2]);
  }
  return matrix;
}

// ---------------------------------------------------------------- nms

export interface NmsOptions {
  /** Suppression overlap threshold in (0, 1]. Default 0.5. */
  iouThresh?: number;
  /** Drop detections scoring below this before suppression. Default 0. */
  scoreThresh?: number;
  /** Suppress across classes instead of within each class. Default false. */
  classAgnostic?: boolean;
}

/**
 * Greedy rotated non-maximum suppression.
 *
 * Returns the indices of surviving detections, in descending score
 * order, indexing into the original input arrays (score filtering does
 * not renumber).
 */
export async function batchedNms(
  boxes: RowBuffer,
  scores: ArrayLike<number>,
  classIds?: ArrayLike<number>,
  options: NmsOptions = {},
): Promise<number[]> {
  const rows = toRows(boxes, 5, "boxes", BOX_LAYOUT);
  const scoreValues = toScalars(scores, "scores", rows.length);
  const classValues = classIds
    ? toIntegers(classIds, "classIds", rows.length)
    : new Array<number>(rows.length).fill(0);
  if (rows.length === 0) {
    return [];
  }
  const args = [
    "nms",
    "--json",
    "-",
    "--iou-thresh",
    String(options.iouThresh ?? 0.5),
    "--score-thresh",
    String(options.scoreThresh ?? 0),
  ];
  if (options.classAgnostic) {
    args.push("--class-agnostic");
  }
  const stdout = await runEngine(
    args,
    JSON.stringify({ boxes: rows, scores: scoreValues, class_ids: classValues }),
  );
  return parseJson(stdout, "nms").kept as number[];
}

// -------------------------------------------------------------- align

/** A dense feature map in height × width × channels row-major layout. */
export interface FeatureMap {
  height: number;
  width: number;
  channels: number;
  /** Flat buffer of exactly height*width*channels values. */
  data: Float64Array | ReadonlyArray<number>;
}

export interface AlignOptions {
  /** Pooling grid is k×k bins. Default 7. */
  k?: number;
  /** Sampling points per bin side. Default 2. */
  samplesPerBinSide?: number;
  /** Position-sensitive pooling (one channel group per bin). Default true. */
  positionSensitive?: boolean;
}

/**
 * Rotated RoI pooling over a feature map, one pooled vector per box.
 *
 * Position-sensitive mode requires `channels` to be divisible by k*k
 * and reads bin (i, j) from its own channel group; plain mode pools
 * every channel in every bin.
 */
export async function batchedAlign(
  features: FeatureMap,
  boxes: RowBuffer,
  options: AlignOptions = {},
): Promise<number[][]> {
  const { height, width, channels } = features;
  for (const [label, value] of [
    ["height", height],
    ["width", width],
    ["channels", channels],
  ] as const) {
    if (!Number.isInteger(value) || value <= 0) {
      throw new LayoutError(`features.${label} must be a positive integer, got ${value}`);
    }
  }
  const expected = height * width * channels;
  if (features.data.length !== expected) {
    throw new LayoutError(
      `features.data has ${features.data.length} values; expected ` +
        `height*width*channels = ${expected} in row-major order`,
    );
  }
  const data = Array.from(features.data);
  for (let i = 0; i < data.length; i++) {
    if (typeof data[i] !== "number" || !Number.isFinite(data[i])) {
      throw new ValidationError(`features.data[${i}] is not finite: ${data[i]}`);
    }
  }
  const rows = toRows(boxes, 5, "boxes", BOX_LAYOUT);
  if (rows.length === 0) {
    return [];
  }
  const stdout = await runEngine(
    ["align", "-"],
    JSON.stringify({
      height,
      width,
      channels,
      data,
      boxes: rows,
      k: options.k ?? 7,
      samples_per_bin_side: options.samplesPerBinSide ?? 2,
      position_sensitive: options.positionSensitive ?? true,
    }),
  );
  return parseJson(stdout, "align").pooled as number[][];
}

// ------------------------------------------------------ encode/decode

/**
 * Offsets that carry each anchor onto the paired target box, one
 * (tx, ty, tw, th, ttheta) row per pair.
 */
export async function batchedEncode(
  anchors: RowBuffer,
  targets: RowBuffer,
): Promise<number[][]> {
  const anchorRows = toRows(anchors, 5, "anchors", BOX_LAYOUT);
  const targetRows = toRows(targets, 5, "targets", BOX_LAYOUT);
  if (anchorRows.length !== targetRows.length) {
    throw new LayoutError(
      `anchors has ${anchorRows.length} rows but targets has ${targetRows.length}`,
    );
  }
  if (anchorRows.length === 0) {
    return [];
  }
  const stdout = await runEngine(
    ["encode", "-"],
    JSON.stringify({ anchors: anchorRows, targets: targetRows }),
  );
  return parseJson(stdout, "encode").offsets as number[][];
}

/**
 * Apply offset rows to anchor rows, returning decoded boxes in
 * canonical form (long side first, angle in [0, pi)).
 */
export async function batchedDecode(
  anchors: RowBuffer,
  offsets: RowBuffer,
): Promise<number[][]> {
  const anchorRows = toRows(anchors, 5, "anchors", BOX_LAYOUT);
  const offsetRows = toRows(offsets, 5, "offsets", OFFSET_LAYOUT);
  if (anchorRows.length !== offsetRows.length) {
    throw new LayoutError(
      `anchors has ${anchorRows.length} rows but offsets has ${offsetRows.length}`,
    );
  }
  if (anchorRows.length === 0) {
    return [];
  }
  const stdout = await runEngine(
    ["decode", "-"],
    JSON.stringify({ anchors: anchorRows, offsets: offsetRows }),
  );
  return parseJson(stdout, "decode").boxes as number[][];
}

// ------------------------------------------------------------- quads

/**
 * Minimum-area oriented box around each corner quadrilateral
 * (x1, y1, ..., x4, y4 rows), in canonical form.
 */
export async function boxFromQuad(quads: RowBuffer): Promise<number[][]> {
  const rows = toRows(quads, 8, "quads", QUAD_LAYOUT);
  if (rows.length === 0) {
    return [];
  }
  const stdout = await runEngine(["fromquad", "-"], JSON.stringify({ quads: rows }));
  return parseJson(stdout, "fromquad").boxes as number[][];
}
