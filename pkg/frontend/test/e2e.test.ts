// Live round-trip against a real controller: boot the Python backend,
// request a handoff through the same client code the dialog uses, and
// watch the pending badge clear within two poll ticks.

import { type ChildProcess, spawn } from "node:child_process";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { PendingTracker } from "../src/viewmodel";

const PORT = 18900 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;
const SCENARIO = fileURLToPath(new URL("./fixtures/e2e-scenario.yaml", import.meta.url));
const STA = "00:16:ea:00:00:01";

let backend: ChildProcess | null = null;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitForAssociation(api: ApiClient, timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const stations = await api.stations();
      if (stations.some((s) => s.mac === STA)) return;
    } catch {
      // backend still booting
    }
    await sleep(200);
  }
  throw new Error("backend never associated the station");
}

function startBackend(command: string, args: string[]): ChildProcess {
  return spawn(command, args, { stdio: ["ignore", "pipe", "pipe"] });
}

beforeAll(async () => {
  const args = [
    "run",
    "--scenario",
    SCENARIO,
    "--realtime",
    "--api-addr",
    `127.0.0.1:${PORT}`,
  ];
  backend = startBackend("smartap", args);
  const fallback = new Promise<void>((resolve) => {
    backend!.once("error", () => {
      backend = startBackend("python3", ["-m", "smartap.cli", ...args]);
      resolve();
    });
    backend!.once("spawn", () => resolve());
  });
  await fallback;
  await waitForAssociation(new ApiClient(BASE));
}, 30000);

afterAll(() => {
  backend?.kill("SIGINT");
});

describe("handoff dialog round-trip on a live system", () => {
  it("drives a real handoff and the badge clears within 2 poll ticks", async () => {
    const api = new ApiClient(BASE);
    const tracker = new PendingTracker();

    const before = await api.snapshot();
    const station = before.stations.find((s) => s.mac === STA)!;
    const target = before.agents.find((a) => a.ip !== station.host)!.ip;
    const pollMs = before.params.scan_interval * 1000;

    await api.requestHandoff(STA, target);
    tracker.submit({ kind: "handoff", sta: STA, target });
    expect(tracker.size).toBe(1);

    let ticks = 0;
    while (tracker.size > 0 && ticks < 2) {
      await sleep(pollMs);
      tracker.reconcile(await api.snapshot());
      ticks += 1;
    }

    expect(tracker.size).toBe(0);
    expect(ticks).toBeLessThanOrEqual(2);
    const after = await api.snapshot();
    expect(after.stations.find((s) => s.mac === STA)!.host).toBe(target);
  }, 20000);

  it("surfaces API validation errors verbatim for a bad request", async () => {
    const api = new ApiClient(BASE);
    const snapshot = await api.snapshot();
    const host = snapshot.stations.find((s) => s.mac === STA)!.host;
    await expect(api.requestHandoff(STA, host)).rejects.toMatchObject({
      code: "validation",
      status: 400,
    });
  });
});
