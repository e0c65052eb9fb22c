/** Trailing-edge debounce.  Used at 120 ms on knot drags so BQS feedback
 * stays live without flooding the server. */

export const DRAG_DEBOUNCE_MS = 120;

export interface Debounced<A extends unknown[]> {
  (...args: A): void;
  /** Drop any pending invocation. */
  cancel(): void;
  /** Run a pending invocation immediately. */
  flush(): void;
  readonly pending: boolean;
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number = DRAG_DEBOUNCE_MS,
): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let lastArgs: A | null = null;

  const fire = () => {
    timer = null;
    const args = lastArgs as A;
    lastArgs = null;
    fn(...args);
  };

  const wrapped = (...args: A) => {
    lastArgs = args;
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(fire, waitMs);
  };
  wrapped.cancel = () => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
    lastArgs = null;
  };
  wrapped.flush = () => {
    if (timer !== null) {
      clearTimeout(timer);
      fire();
    }
  };
  Object.defineProperty(wrapped, "pending", { get: () => timer !== null });
  return wrapped as Debounced<A>;
}
