import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { LatestWins, debounce } from "../src/debounce.js";

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("fires once on the trailing edge with the latest arguments", () => {
    const calls: number[] = [];
    const d = debounce((x: number) => calls.push(x), 150);
    d.call(1);
    vi.advanceTimersByTime(100);
    d.call(2);
    vi.advanceTimersByTime(100);
    d.call(3);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(150);
    expect(calls).toEqual([3]);
  });

  it("cancel drops the pending call", () => {
    const calls: number[] = [];
    const d = debounce((x: number) => calls.push(x), 150);
    d.call(1);
    expect(d.pending()).toBe(true);
    d.cancel();
    vi.advanceTimersByTime(500);
    expect(calls).toEqual([]);
    expect(d.pending()).toBe(false);
  });

  it("separate bursts each fire", () => {
    const calls: number[] = [];
    const d = debounce((x: number) => calls.push(x), 50);
    d.call(1);
    vi.advanceTimersByTime(60);
    d.call(2);
    vi.advanceTimersByTime(60);
    expect(calls).toEqual([1, 2]);
  });
});

describe("LatestWins", () => {
  it("drops responses of superseded requests", async () => {
    const lw = new LatestWins<string>();
    const delivered: string[] = [];
    let releaseFirst!: (v: string) => void;
    const first = new Promise<string>((resolve) => (releaseFirst = resolve));
    const p1 = lw.run(() => first, (v) => delivered.push(v));
    const p2 = lw.run(() => Promise.resolve("second"), (v) => delivered.push(v));
    await p2;
    releaseFirst("first");
    await p1;
    expect(delivered).toEqual(["second"]);
  });

  it("invalidate drops in-flight deliveries", async () => {
    const lw = new LatestWins<string>();
    const delivered: string[] = [];
    let release!: (v: string) => void;
    const slow = new Promise<string>((resolve) => (release = resolve));
    const p = lw.run(() => slow, (v) => delivered.push(v));
    lw.invalidate();
    release("late");
    await p;
    expect(delivered).toEqual([]);
  });

  it("delivers errors only for the latest request", async () => {
    const lw = new LatestWins<string>();
    const errors: string[] = [];
    await lw.run(
      () => Promise.reject(new Error("boom")),
      () => undefined,
      (e) => errors.push(String(e)),
    );
    expect(errors).toHaveLength(1);
  });
});
