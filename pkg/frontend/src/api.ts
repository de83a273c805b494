// Thin typed client over the server's public /api/v1 surface.  The
// fetch function is injectable so tests can run without a network.

import type { ValidationError } from "./spans";

export interface SiteInfo {
  site_name: string;
  tagline: string;
}

export interface ArticleSummary {
  term: string;
  status: string;
  tags: string[];
  updated_at: string;
}

export interface QuestionInfo {
  slug: string;
  anchor: string;
  display_text: string;
}

export interface ArticleDetail extends ArticleSummary {
  content: string;
  questions: QuestionInfo[];
  examples: { slug: string; anchor: string }[];
}

export interface SearchResult {
  kind: string;
  term: string;
  snippet: string;
  score: number;
  slug: string | null;
  anchor: string | null;
}

export interface ReviewInfo {
  id: string;
  term: string;
  author: string;
  status: string;
  pr_url: string | null;
}

export interface ApiError {
  status: number;
  code: string;
  message: string;
  errors?: ValidationError[];
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;
  token: string | null = null;

  constructor(baseUrl = "", fetchFn: FetchLike = fetch as unknown as FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const resp = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await resp.json()) as Record<string, unknown>;
    if (resp.status >= 400) {
      throw {
        status: resp.status,
        code: (payload.code as string) ?? "Error",
        message: (payload.message as string) ?? "request failed",
        errors: payload.errors as ValidationError[] | undefined,
      } satisfies ApiError;
    }
    return payload as T;
  }

  site(): Promise<SiteInfo> {
    return this.request("GET", "/api/v1/site");
  }

  articles(): Promise<{ articles: ArticleSummary[] }> {
    return this.request("GET", "/api/v1/articles");
  }

  article(term: string): Promise<ArticleDetail> {
    return this.request("GET", `/api/v1/articles/${encodeURIComponent(term)}`);
  }

  search(query: string): Promise<{ results: SearchResult[] }> {
    return this.request("GET", `/api/v1/search?q=${encodeURIComponent(query)}`);
  }

  reviews(): Promise<{ reviews: ReviewInfo[] }> {
    return this.request("GET", "/api/v1/reviews");
  }

  login(code: string): Promise<{ api_token: string; role: string }> {
    return this.request("POST", "/api/v1/auth/token", { code });
  }

  validate(content: string): Promise<{ ok: boolean; errors: ValidationError[] }> {
    return this.request("POST", "/api/v1/validate", { content });
  }

  submitReview(term: string, content: string): Promise<ReviewInfo> {
    return this.request("POST", `/api/v1/articles/${encodeURIComponent(term)}/review`, {
      content,
    });
  }

  askQuestion(
    term: string,
    text: string,
  ): Promise<{ anchor: string; existing: boolean; issue_number: number | null }> {
    return this.request("POST", `/api/v1/articles/${encodeURIComponent(term)}/questions`, {
      text,
    });
  }
}
