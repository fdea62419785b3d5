// Debounced latest-wins request scheduling for slider-driven edits: one
// request per quiet period, and a response is dropped whenever a newer
// request was issued before it resolved.

export class LatestWins {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private generation = 0;
  /** Requests actually issued; exposed for interaction-contract tests. */
  requestsIssued = 0;

  constructor(private readonly delayMs = 300) {}

  schedule<T>(
    run: () => Promise<T>,
    apply: (value: T) => void,
    onError?: (error: unknown) => void,
  ): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      this.fire(run, apply, onError);
    }, this.delayMs);
  }

  /** Issue immediately (used for clicks, which are deliberate). */
  fire<T>(
    run: () => Promise<T>,
    apply: (value: T) => void,
    onError?: (error: unknown) => void,
  ): void {
    const ticket = ++this.generation;
    this.requestsIssued += 1;
    run().then(
      (value) => {
        if (ticket === this.generation) {
          apply(value);
        }
      },
      (error) => {
        if (ticket === this.generation && onError) {
          onError(error);
        }
      },
    );
  }
}
