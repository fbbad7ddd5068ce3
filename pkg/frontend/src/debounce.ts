/** Trailing-edge debouncer; repeated calls keep only the latest arguments. */
export interface Debounced<A extends unknown[]> {
  call: (...args: A) => void;
  cancel: () => void;
  pending: () => boolean;
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  return {
    call(...args: A) {
      if (timer !== null) clearTimeout(timer);
      timer = setTimeout(() => {
        timer = null;
        fn(...args);
      }, waitMs);
    },
    cancel() {
      if (timer !== null) clearTimeout(timer);
      timer = null;
    },
    pending() {
      return timer !== null;
    },
  };
}

/**
 * Serializes async requests so only the newest response is delivered;
 * stale responses (from requests superseded while in flight) are dropped.
 */
export class LatestWins<T> {
  private seq = 0;

  async run(task: () => Promise<T>, deliver: (value: T) => void,
            onError?: (err: unknown) => void): Promise<void> {
    const ticket = ++this.seq;
    try {
      const value = await task();
      if (ticket === this.seq) deliver(value);
    } catch (err) {
      if (ticket === this.seq && onError) onError(err);
    }
  }

  invalidate(): void {
    this.seq++;
  }
}
