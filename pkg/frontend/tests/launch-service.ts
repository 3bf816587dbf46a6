/**
 * vitest global setup: start the Python operation-browser service and wait
 * until it answers; tear it down when the run ends.
 */

import { spawn, ChildProcess } from "node:child_process";
import path from "node:path";
import { fileURLToPath } from "node:url";

export const SERVICE_PORT = 8913;
export const SERVICE_URL = `http://127.0.0.1:${SERVICE_PORT}`;

const repoRoot = path.resolve(
  path.dirname(fileURLToPath(import.meta.url)),
  "..",
  "..",
);

let child: ChildProcess | undefined;

async function waitUntilUp(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = new Error("service never answered");
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${SERVICE_URL}/sessions/ping/metamodels`);
      if (response.status === 404) return; // up: unknown session is expected
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw lastError;
}

export default async function setup(): Promise<() => void> {
  child = spawn(
    "python3",
    ["-m", "coevo.cli", "serve", "--port", String(SERVICE_PORT)],
    { cwd: repoRoot, stdio: ["ignore", "inherit", "inherit"] },
  );
  const exited = new Promise<never>((_, reject) => {
    child?.on("exit", (code) =>
      reject(new Error(`service exited early with code ${code}`)),
    );
  });
  await Promise.race([waitUntilUp(30000), exited]);
  return () => {
    child?.kill("SIGTERM");
  };
}
