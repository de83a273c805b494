import { describe, expect, it } from "vitest";

import type { ArticleDetail, ReviewInfo, SearchResult } from "../src/api";
import { articleView, errorBanner, homeView, reviewBoardView } from "../src/views";

const FEED: SearchResult[] = [
  { kind: "article", term: "hpc", snippet: "# HPC", score: 0, slug: null, anchor: null },
  {
    kind: "question",
    term: "hpc",
    snippet: "How did hpc originate",
    score: 0,
    slug: "how-did-hpc-originate",
    anchor: "question-how-did-hpc-originate",
  },
];

describe("homeView", () => {
  it("lists feed entries with deep links for questions", () => {
    const html = homeView("Ask", FEED);
    expect(html).toContain('<a href="/a/hpc">hpc</a>');
    expect(html).toContain('href="/a/hpc#question-how-did-hpc-originate"');
    expect(html).toContain("How did hpc originate");
  });

  it("renders an empty state", () => {
    expect(homeView("Ask", [])).toContain("Nothing here yet");
  });

  it("error banner escapes its message", () => {
    expect(errorBanner("<oops>")).toContain("&lt;oops&gt;");
  });
});

describe("articleView", () => {
  const article: ArticleDetail = {
    term: "hpc",
    status: "active",
    tags: ["containers"],
    updated_at: "2020-01-12T00:00:00+00:00",
    content: '# HPC\n\n<span id="question-q"></span>\nBody.\n',
    questions: [{ slug: "q", anchor: "question-q", display_text: "Q" }],
    examples: [],
  };

  it("renders content with tags and nav", () => {
    const html = articleView(article, null);
    expect(html).toContain("<h1>HPC</h1>");
    expect(html).toContain('<span class="tag">containers</span>');
    expect(html).not.toContain("highlight");
  });

  it("applies the deep-link highlight", () => {
    expect(articleView(article, "question-q")).toContain('class="highlight"');
  });

  it("missing anchors produce a notice instead of a crash", () => {
    expect(articleView(article, "question-nope")).toContain('class="notice"');
  });
});

describe("reviewBoardView", () => {
  it("shows status and PR link when present", () => {
    const reviews: ReviewInfo[] = [
      { id: "r1", term: "hpc", author: "katia", status: "open", pr_url: "http://pr/1" },
      { id: "r2", term: "hpc", author: "sam", status: "pending_dispatch", pr_url: null },
    ];
    const html = reviewBoardView(reviews);
    expect(html).toContain("hpc by katia — open");
    expect(html).toContain('<a href="http://pr/1">PR</a>');
    expect(html).toContain("pending_dispatch");
  });

  it("renders an empty state", () => {
    expect(reviewBoardView([])).toContain("No reviews yet");
  });
});
