import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { LatestWins } from "../src/scheduler.js";

describe("LatestWins", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("collapses a burst of edits into one request after the quiet period", async () => {
    const scheduler = new LatestWins(300);
    const applied: number[] = [];
    for (let i = 0; i < 10; i++) {
      scheduler.schedule(async () => i, (v) => applied.push(v));
      vi.advanceTimersByTime(100); // never quiet long enough to fire
    }
    expect(scheduler.requestsIssued).toBe(0);
    await vi.advanceTimersByTimeAsync(300);
    expect(scheduler.requestsIssued).toBe(1);
    expect(applied).toEqual([9]); // last write wins
  });

  it("discards an in-flight response once a newer request was issued", async () => {
    const scheduler = new LatestWins(0);
    const applied: string[] = [];
    let releaseSlow: (v: string) => void = () => undefined;
    const slow = new Promise<string>((resolve) => (releaseSlow = resolve));

    scheduler.fire(() => slow, (v) => applied.push(v));
    scheduler.fire(async () => "fast", (v) => applied.push(v));
    await vi.runAllTimersAsync();
    releaseSlow("slow");
    await vi.runAllTimersAsync();

    expect(applied).toEqual(["fast"]); // stale response dropped
    expect(scheduler.requestsIssued).toBe(2);
  });

  it("routes errors only for the newest request", async () => {
    const scheduler = new LatestWins(0);
    const errors: string[] = [];
    scheduler.fire(
      async () => {
        throw new Error("old");
      },
      () => undefined,
      (e) => errors.push(String(e)),
    );
    scheduler.fire(
      async () => {
        throw new Error("new");
      },
      () => undefined,
      (e) => errors.push(String(e)),
    );
    await vi.runAllTimersAsync();
    expect(errors).toEqual(["Error: new"]);
  });
});
