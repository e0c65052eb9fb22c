import type {
  BackgroundPayload,
  BqsReadout,
  FtPayload,
  KnotTable,
  RTrace,
  Snapshot,
  Stage,
} from "./types.js";
import { ApiError } from "./api.js";

/** Monotonically increasing request sequence; responses carrying a stale
 * sequence number are discarded so out-of-order completions can never
 * overwrite newer state. */
export class SequenceGate {
  private issued = 0;
  private applied = 0;

  next(): number {
    return ++this.issued;
  }

  /** True exactly when `seq` is newer than everything applied so far. */
  accept(seq: number): boolean {
    if (seq <= this.applied) return false;
    this.applied = seq;
    return true;
  }
}

/** Serializes mutations: the server allows one in-flight mutation per
 * session (409 otherwise), so requests queue here and a 409 that still
 * slips through (e.g. another tab) is retried once after the configured
 * delay. */
export class MutationQueue {
  private chain: Promise<unknown> = Promise.resolve();

  constructor(private readonly retryDelayMs = 150) {}

  run<T>(op: () => Promise<T>): Promise<T> {
    const next = this.chain.then(
      async (): Promise<T> => {
        try {
          return await op();
        } catch (err) {
          if (err instanceof ApiError && err.isConcurrency) {
            await new Promise((r) => setTimeout(r, this.retryDelayMs));
            return op();
          }
          throw err;
        }
      },
    );
    this.chain = next.catch(() => undefined);
    return next;
  }
}

export interface ViewState {
  sessionId: string | null;
  stage: Stage;
  rTraces: Set<RTrace>;
  background: BackgroundPayload | null;
  ft: FtPayload | null;
  knotOverride: number[] | null;
  error: string | null;
}

export function emptyViewState(): ViewState {
  return {
    sessionId: null,
    stage: "raw",
    rTraces: new Set<RTrace>(["magnitude"]),
    background: null,
    ft: null,
    knotOverride: null,
    error: null,
  };
}

/** Single source of truth for what the panels render.  All numeric content
 * comes straight from server payloads. */
export class Store {
  readonly seq = new SequenceGate();
  private state: ViewState = emptyViewState();
  private listeners = new Set<(s: ViewState) => void>();

  get view(): ViewState {
    return this.state;
  }

  subscribe(fn: (s: ViewState) => void): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  patch(partial: Partial<ViewState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  /** Apply a payload only if its sequence number is still current. */
  applyBackground(seq: number, payload: BackgroundPayload): boolean {
    if (!this.seq.accept(seq)) return false;
    this.patch({ background: payload, error: null });
    return true;
  }

  applyFt(seq: number, payload: FtPayload): boolean {
    if (!this.seq.accept(seq)) return false;
    this.patch({ ft: payload, error: null });
    return true;
  }

  /** Rebuild the whole view from a session snapshot (refresh-safe: the
   * snapshot alone reconstructs every panel). */
  applySnapshot(snapshot: Snapshot): void {
    this.state = {
      ...emptyViewState(),
      sessionId: snapshot.id,
      stage: this.state.stage,
      rTraces: this.state.rTraces,
      background: snapshot.background,
      ft: snapshot.ft,
      knotOverride: snapshot.knot_y_override,
    };
    this.emit();
  }

  get bqs(): BqsReadout | null {
    return this.state.background?.bqs ?? null;
  }

  get knots(): KnotTable | null {
    return this.state.background?.knots ?? null;
  }
}
