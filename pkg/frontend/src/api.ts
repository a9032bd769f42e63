/**
 * Typed client for the search service.
 *
 * Search calls carry a sequence token: when a newer search starts before
 * an older one resolves, the older response comes back marked stale and
 * the caller drops it, so a slow response can never overwrite a newer
 * result list.
 */

import {
  EmptyQueryBody,
  EmptyQueryBodyT,
  FeedbackAck,
  FeedbackBodyT,
  FeedbackErrorBody,
  HealthResponse,
  SearchResponse,
  SearchResponseT,
  SuggestResponse,
  SuggestResponseT,
} from "./schema.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export type SearchReply =
  | { kind: "ok"; data: SearchResponseT }
  | { kind: "empty_query"; data: EmptyQueryBodyT }
  | { kind: "stale" }
  | { kind: "malformed"; detail: string }
  | { kind: "offline"; detail: string };

export type FeedbackReply =
  | { kind: "ok"; id: number }
  | { kind: "rejected"; detail: string }
  | { kind: "offline"; detail: string };

export class ApiClient {
  private searchSeq = 0;

  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async health(): Promise<number | null> {
    const res = await this.fetchFn(`${this.base}/api/health`);
    return HealthResponse.parse(await res.json()).snapshot_version;
  }

  async search(q: string, limit?: number): Promise<SearchReply> {
    const seq = ++this.searchSeq;
    const params = new URLSearchParams({ q });
    if (limit !== undefined) params.set("limit", String(limit));
    let res: Response;
    let body: unknown;
    try {
      res = await this.fetchFn(`${this.base}/api/search?${params}`);
      body = await res.json();
    } catch (err) {
      if (seq !== this.searchSeq) return { kind: "stale" };
      return { kind: "offline", detail: String(err) };
    }
    if (seq !== this.searchSeq) return { kind: "stale" };
    if (res.status === 422) {
      const parsed = EmptyQueryBody.safeParse(body);
      if (parsed.success) return { kind: "empty_query", data: parsed.data };
      return { kind: "malformed", detail: "unrecognized 422 body" };
    }
    const parsed = SearchResponse.safeParse(body);
    if (!parsed.success) return { kind: "malformed", detail: parsed.error.message };
    return { kind: "ok", data: parsed.data };
  }

  async suggest(q: string): Promise<SuggestResponseT> {
    const params = new URLSearchParams({ q });
    const res = await this.fetchFn(`${this.base}/api/suggest?${params}`);
    return SuggestResponse.parse(await res.json());
  }

  async sendFeedback(body: FeedbackBodyT): Promise<FeedbackReply> {
    let res: Response;
    let payload: unknown;
    try {
      res = await this.fetchFn(`${this.base}/api/feedback`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      });
      payload = await res.json();
    } catch (err) {
      return { kind: "offline", detail: String(err) };
    }
    if (res.ok) {
      const ack = FeedbackAck.safeParse(payload);
      if (ack.success) return { kind: "ok", id: ack.data.id };
      return { kind: "rejected", detail: "unrecognized acknowledgment" };
    }
    const error = FeedbackErrorBody.safeParse(payload);
    return { kind: "rejected", detail: error.success ? error.data.detail ?? error.data.error : `status ${res.status}` };
  }
}
