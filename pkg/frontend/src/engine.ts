import { spawn } from "node:child_process";

import { EngineError } from "./errors.js";

/**
 * Resolve the Python interpreter that has the rotbox package installed.
 * Override with the ROTBOX_PYTHON environment variable.
 */
export function interpreter(): string {
  return process.env.ROTBOX_PYTHON ?? "python3";
}

/**
 * Run one engine subcommand, feeding `input` on stdin and returning its
 * stdout. Every call spawns a fresh process, so concurrent calls never
 * serialize behind each other and a failure in one cannot corrupt
 * another.
 */
export function runEngine(args: string[], input: string): Promise<string> {
  return new Promise((resolve, reject) => {
    const python = interpreter();
    const child = spawn(python, ["-m", "rotbox", ...args], {
      stdio: ["pipe", "pipe", "pipe"],
    });
    const out: Buffer[] = [];
    const err: Buffer[] = [];
    child.stdout.on("data", (chunk: Buffer) => out.push(chunk));
    child.stderr.on("data", (chunk: Buffer) => err.push(chunk));
    child.on("error", (cause) => {
      reject(
        new EngineError(`could not start ${python}: ${cause.message}`, null, ""),
      );
    });
    child.on("close", (code) => {
      const stderr = Buffer.concat(err).toString("utf8");
      if (code === 0) {
        resolve(Buffer.concat(out).toString("utf8"));
      } else {
        const detail = stderr.trim() || "(no diagnostic output)";
        reject(
          new EngineError(
            `engine exited with code ${code}: ${detail}`,
            code,
            stderr,
          ),
        );
      }
    });
    // A dying child closes its stdin first; surface the close error, not EPIPE.
    child.stdin.on("error", () => {});
    child.stdin.end(input);
  });
}
