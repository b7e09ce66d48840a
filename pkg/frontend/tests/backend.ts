/** Spawn one live Python backend over the 5-item fixture for the tests. */

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

export interface Backend {
  base: string;
  stop: () => void;
}

const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURE = resolve(HERE, "fixture-dataset.csv");
const REPO_ROOT = resolve(HERE, "..", "..");

export async function startBackend(): Promise<Backend> {
  const port = 8600 + Math.floor(Math.random() * 400);
  const sessionsDir = mkdtempSync(join(tmpdir(), "ct-sessions-"));
  const code = [
    "from codingtree.service import load_config, serve",
    `config = load_config(None, ${JSON.stringify(FIXTURE)}, None, ${JSON.stringify(sessionsDir)})`,
    `serve(config, port=${port})`,
  ].join("; ");
  const proc: ChildProcess = spawn("python3", ["-c", code], {
    cwd: REPO_ROOT,
    stdio: ["ignore", "pipe", "pipe"],
  });
  let stderr = "";
  proc.stderr?.on("data", (chunk) => {
    stderr += String(chunk);
  });

  const base = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30000;
  for (;;) {
    if (proc.exitCode !== null) {
      throw new Error(`backend exited early:\n${stderr}`);
    }
    try {
      const response = await fetch(`${base}/tree`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      proc.kill();
      throw new Error(`backend did not start:\n${stderr}`);
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  return { base, stop: () => proc.kill() };
}
