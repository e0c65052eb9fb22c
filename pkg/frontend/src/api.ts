import type {
  BackgroundPayload,
  BackgroundUpdate,
  ColumnOverride,
  FtPayload,
  FtUpdate,
  SessionCreated,
  Snapshot,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }

  /** 409 = another mutation of the same session is still in flight. */
  get isConcurrency(): boolean {
    return this.status === 409;
  }
}

async function toError(resp: Response): Promise<ApiError> {
  let detail = resp.statusText;
  try {
    const body = await resp.json();
    detail = body.detail ?? body.error ?? detail;
  } catch {
    /* non-JSON error body */
  }
  return new ApiError(resp.status, String(detail));
}

/** Thin typed client for the serve API.  `fetchImpl` is injectable so the
 * test suite can run without a server. */
export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) =>
      fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    raw?: false,
  ): Promise<T>;
  private async request(
    method: string,
    path: string,
    body: unknown,
    raw: true,
  ): Promise<string>;
  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    raw = false,
  ): Promise<T | string> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      if (typeof body === "string") {
        init.body = body;
      } else {
        init.body = JSON.stringify(body);
        init.headers = { "content-type": "application/json" };
      }
    }
    const resp = await this.fetchImpl(this.base + path, init);
    if (!resp.ok) throw await toError(resp);
    if (resp.status === 204) return undefined as T;
    return raw ? resp.text() : ((await resp.json()) as T);
  }

  createSession(fileText: string): Promise<SessionCreated> {
    return this.request("POST", "/api/session", fileText);
  }

  snapshot(sid: string): Promise<Snapshot> {
    return this.request("GET", `/api/session/${sid}`);
  }

  setColumns(
    sid: string,
    roles: ColumnOverride,
  ): Promise<{ energy: number[]; mu: number[]; e0: number }> {
    return this.request("POST", `/api/session/${sid}/columns`, roles);
  }

  setE0Method(
    sid: string,
    method: string,
  ): Promise<{ e0: number; e0_by_method: Record<string, number> }> {
    return this.request("POST", `/api/session/${sid}/e0`, { method });
  }

  setBackground(
    sid: string,
    update: BackgroundUpdate,
  ): Promise<BackgroundPayload> {
    return this.request("POST", `/api/session/${sid}/background`, update);
  }

  refine(sid: string): Promise<BackgroundPayload> {
    return this.request("POST", `/api/session/${sid}/refine`);
  }

  setFt(sid: string, update: FtUpdate): Promise<FtPayload> {
    return this.request("POST", `/api/session/${sid}/ft`, update);
  }

  exportText(sid: string, format: string): Promise<string> {
    return this.request(
      "GET",
      `/api/session/${sid}/export?format=${encodeURIComponent(format)}`,
      undefined,
      true,
    );
  }

  deleteSession(sid: string): Promise<void> {
    return this.request("DELETE", `/api/session/${sid}`);
  }
}
