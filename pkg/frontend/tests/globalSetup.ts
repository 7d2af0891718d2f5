// Spawns the real query service on a local port for integration tests.
// The bundled fixture catalog, hash embedder, and simulated LLM make the
// service fully deterministic, so assertions can compare exact values.

import { spawn, type ChildProcess } from "node:child_process";
import type { TestProject } from "vitest/node";

const PYTHON = process.env.SCOUT_TEST_PYTHON ?? "python3";

async function waitForHealth(base: string, timeoutMs: number): Promise<boolean> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${base}/healthz`);
      if (resp.ok) return true;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  return false;
}

export default async function setup(project: TestProject): Promise<() => Promise<void>> {
  const port = 18700 + Math.floor(Math.random() * 200);
  const base = `http://127.0.0.1:${port}`;
  const child: ChildProcess = spawn(
    PYTHON,
    ["-m", "datascout.cli", "serve", "--catalog", "fixture",
     "--addr", `127.0.0.1:${port}`, "--llm", "sim"],
    { stdio: ["ignore", "pipe", "pipe"], cwd: new URL("../..", import.meta.url).pathname },
  );
  let stderr = "";
  child.stderr?.on("data", (chunk) => {
    stderr += String(chunk);
  });

  const healthy = await waitForHealth(base, 30000);
  if (!healthy) {
    child.kill();
    throw new Error(`query service failed to start on ${base}\n${stderr}`);
  }
  project.provide("apiBase", base);

  return async () => {
    child.kill();
    await new Promise((r) => setTimeout(r, 100));
  };
}

declare module "vitest" {
  export interface ProvidedContext {
    apiBase: string;
  }
}
