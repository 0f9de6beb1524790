// Typed client for the audit service. Every successful response body is
// recorded in `intercepted`, so tests can prove that anything displayed is
// traceable to a service response.

import type {
  Finding,
  HealthResponse,
  QueueKind,
  QueueOrder,
  QueueResponse,
  RecordsResponse,
  Report,
  SchemaResponse,
  TagAction,
  TagResponse,
} from "./types.js";

export interface InterceptedResponse {
  path: string;
  body: unknown;
}

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly error: string,
    readonly detail: string,
  ) {
    super(`${error}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  readonly intercepted: InterceptedResponse[] = [];

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const err = (body ?? {}) as { error?: string; detail?: string };
      throw new ApiRequestError(
        response.status,
        err.error ?? `http_${response.status}`,
        err.detail ?? response.statusText,
      );
    }
    this.intercepted.push({ path, body });
    return body as T;
  }

  health(): Promise<HealthResponse> {
    return this.request<HealthResponse>("/api/health");
  }

  schema(): Promise<SchemaResponse> {
    return this.request<SchemaResponse>("/api/schema");
  }

  records(filter?: string): Promise<RecordsResponse> {
    const query = filter ? `?filter=${encodeURIComponent(filter)}` : "";
    return this.request<RecordsResponse>(`/api/records${query}`);
  }

  queue(kind: QueueKind, order: QueueOrder, seed = 0): Promise<QueueResponse> {
    const query = `?kind=${kind}&order=${order}&seed=${seed}`;
    return this.request<QueueResponse>(`/api/queue${query}`);
  }

  report(): Promise<Report> {
    return this.request<Report>("/api/report");
  }

  /** Cluster finding, or null when the dataset carries no embeddings. */
  async strata(): Promise<Finding | null> {
    try {
      return await this.request<Finding>("/api/strata");
    } catch (error) {
      if (error instanceof ApiRequestError && error.status === 422) {
        return null;
      }
      throw error;
    }
  }

  applyTag(
    id: string,
    tag: string,
    action: TagAction,
    author: string,
  ): Promise<TagResponse> {
    return this.request<TagResponse>("/api/tags", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ id, tag, action, author }),
    });
  }
}
