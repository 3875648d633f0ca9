/** Exploration state machine: idle -> searching -> results -> suggesting -> suggestions.
 *
 * API calls are only issued from their legal states; a new search supersedes
 * (aborts) anything in flight, and a chip click is just a search with the
 * chip's text, so results are never reused stale.
 */
import { ApiClient, ClusterCard, ResultItem } from "./api.js";

export type Phase = "idle" | "searching" | "results" | "suggesting" | "suggestions" | "error";

export class IllegalStateError extends Error {
  constructor(action: string, phase: Phase) {
    super(`cannot ${action} while in state '${phase}'`);
  }
}

const SUGGEST_LEGAL: ReadonlySet<Phase> = new Set(["results", "suggestions"]);

export class Explorer {
  phase: Phase = "idle";
  query = "";
  results: ResultItem[] = [];
  clusters: ClusterCard[] = [];
  errorMessage: string | null = null;
  private token: string | null = null;
  private searchAbort: AbortController | null = null;
  private suggestAbort: AbortController | null = null;
  private listeners: Array<() => void> = [];

  constructor(
    private readonly api: ApiClient,
    public k = 30,
  ) {}

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  canSearch(query: string): boolean {
    return query.trim().length > 0;
  }

  hasToken(): boolean {
    return this.token !== null;
  }

  /** Search is legal from any state; it supersedes all in-flight requests. */
  async search(query: string): Promise<void> {
    if (!this.canSearch(query)) {
      throw new IllegalStateError("search with an empty query", this.phase);
    }
    this.searchAbort?.abort();
    this.suggestAbort?.abort();
    const abort = new AbortController();
    this.searchAbort = abort;
    this.phase = "searching";
    this.query = query;
    this.errorMessage = null;
    this.clusters = [];
    this.token = null;
    this.notify();
    try {
      const response = await this.api.search(query, this.k, abort.signal);
      if (abort.signal.aborted) return;
      this.results = response.results;
      this.token = response.query_token;
      this.phase = "results";
    } catch (error) {
      if (abort.signal.aborted) return;
      this.results = [];
      this.phase = "error";
      this.errorMessage = error instanceof Error ? error.message : String(error);
    }
    this.notify();
  }

  /** Suggest is legal only once a result set (and its token) exists. */
  async suggest(m: number, method: string, seed = 0): Promise<void> {
    if (!SUGGEST_LEGAL.has(this.phase) || this.token === null) {
      throw new IllegalStateError("request suggestions", this.phase);
    }
    this.suggestAbort?.abort();
    const abort = new AbortController();
    this.suggestAbort = abort;
    const token = this.token;
    this.phase = "suggesting";
    this.notify();
    try {
      const response = await this.api.suggest(token, m, method, seed, abort.signal);
      if (abort.signal.aborted) return;
      this.clusters = response.clusters;
      this.phase = "suggestions";
      this.errorMessage = null;
    } catch (error) {
      if (abort.signal.aborted) return;
      this.clusters = [];
      this.phase = "results";
      this.errorMessage = error instanceof Error ? error.message : String(error);
    }
    this.notify();
  }

  /** A suggestion chip feeds its text back as the next query. */
  async followSuggestion(suggestion: string): Promise<void> {
    await this.search(suggestion);
  }
}
