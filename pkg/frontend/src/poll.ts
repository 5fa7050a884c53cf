// Chained-timeout poller: the next tick is only scheduled after the
// previous one settles, so requests never overlap by construction.

export class Poller {
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private intervalMs: number;

  constructor(
    private readonly tick: () => Promise<void>,
    initialIntervalMs = 1000,
  ) {
    this.intervalMs = initialIntervalMs;
  }

  /** Poll period follows the controller's scan interval. */
  setInterval(ms: number): void {
    this.intervalMs = Math.max(100, ms);
  }

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private async loop(): Promise<void> {
    if (this.stopped) return;
    try {
      await this.tick();
    } catch {
      // tick reports its own errors; keep polling
    }
    if (this.stopped) return;
    this.timer = setTimeout(() => void this.loop(), this.intervalMs);
  }
}
