/** Typed client for the exploration JSON API; fetch is injectable for tests. */

export interface ResultItem {
  image_id: string;
  score: number;
}

export interface SearchResponse {
  results: ResultItem[];
  query_token: string;
}

export interface ClusterCard {
  cluster_id: string;
  image_ids: string[];
  suggestion: string | null;
  prototype_kind: string | null;
  error?: string;
}

export interface SuggestResponse {
  clusters: ClusterCard[];
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly cause_tag: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  async search(query: string, k: number, signal?: AbortSignal): Promise<SearchResponse> {
    return this.post<SearchResponse>("/api/search", { query, k }, signal);
  }

  async suggest(
    queryToken: string,
    m: number,
    method: string,
    seed: number,
    signal?: AbortSignal,
  ): Promise<SuggestResponse> {
    return this.post<SuggestResponse>(
      "/api/suggest",
      { query_token: queryToken, m, method, seed },
      signal,
    );
  }

  imageUrl(imageId: string): string {
    return `${this.baseUrl}/api/image/${encodeURIComponent(imageId)}`;
  }

  private async post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (!response.ok) {
      let causeTag = "http_error";
      let message = `${path} failed with ${response.status}`;
      try {
        const payload = (await response.json()) as { detail?: { cause?: string; message?: string } };
        causeTag = payload.detail?.cause ?? causeTag;
        message = payload.detail?.message ?? message;
      } catch {
        // non-JSON error body; keep defaults
      }
      throw new ApiError(response.status, causeTag, message);
    }
    return (await response.json()) as T;
  }
}
