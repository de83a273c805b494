// HTML view builders.  Views are pure string renderers over state so
// they can be asserted in tests; main.ts mounts them into the DOM.

import type { ArticleDetail, ArticleSummary, ReviewInfo, SearchResult } from "./api";
import type { EditorState } from "./editor";
import { navigateToAnchor, pageHtml, renderBlocks } from "./render";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function errorBanner(message: string): string {
  return `<div class="banner error" role="alert">${esc(message)}</div>`;
}

/** Home page: the empty-query recent feed of articles and questions. */
export function homeView(siteName: string, feed: SearchResult[]): string {
  if (feed.length === 0) {
    return `<h1>${esc(siteName)}</h1><p class="empty">Nothing here yet — register the first term.</p>`;
  }
  const items = feed
    .map((r) => {
      const href =
        r.kind === "question" && r.anchor
          ? `/a/${r.term}#${r.anchor}`
          : `/a/${r.term}`;
      const label = r.kind === "question" ? esc(r.snippet) : esc(r.term);
      return `<li class="feed-${r.kind}"><a href="${href}">${label}</a></li>`;
    })
    .join("\n");
  return `<h1>${esc(siteName)}</h1><ul class="feed">\n${items}\n</ul>`;
}

/** Article page with optional deep-link anchor highlighting. */
export function articleView(article: ArticleDetail, anchor: string | null): string {
  const page = navigateToAnchor(renderBlocks(article.content), anchor);
  const tags = article.tags.map((t) => `<span class="tag">${esc(t)}</span>`).join(" ");
  return [
    `<nav><a href="/">home</a> / ${esc(article.term)}</nav>`,
    `<div class="tags">${tags}</div>`,
    `<article>${pageHtml(page)}</article>`,
  ].join("\n");
}

export function articleListView(articles: ArticleSummary[]): string {
  const rows = articles
    .map(
      (a) =>
        `<li><a href="/a/${a.term}">${esc(a.term)}</a> <span class="status">${a.status}</span></li>`,
    )
    .join("\n");
  return `<ul class="articles">\n${rows}\n</ul>`;
}

/** Editor panel: draft textarea, helpers, validation list, submit button. */
export function editorView(state: EditorState): string {
  const report = state.validation;
  const errors = report.errors
    .map((e) => `<li class="validation-error">${e.code} (line ${e.line}): ${esc(e.detail)}</li>`)
    .join("\n");
  const disabled = state.canSubmit ? "" : " disabled";
  return [
    `<textarea id="draft" data-term="${esc(state.term)}">${esc(state.draft)}</textarea>`,
    `<div class="helpers">`,
    `<button id="insert-question">Insert question span</button>`,
    `<button id="insert-example">Insert example span</button>`,
    `</div>`,
    `<ul id="validation">${errors}</ul>`,
    `<button id="submit-review" type="submit"${disabled}>Submit for review</button>`,
  ].join("\n");
}

export function reviewBoardView(reviews: ReviewInfo[]): string {
  if (reviews.length === 0) return `<p class="empty">No reviews yet.</p>`;
  const rows = reviews
    .map((r) => {
      const link = r.pr_url ? ` <a href="${r.pr_url}">PR</a>` : "";
      return `<li class="review-${r.status}">${esc(r.term)} by ${esc(r.author)} — ${r.status}${link}</li>`;
    })
    .join("\n");
  return `<ul class="reviews">\n${rows}\n</ul>`;
}

export function askQuestionDialog(term: string): string {
  return [
    `<dialog id="ask-question" data-term="${esc(term)}">`,
    `<form method="dialog">`,
    `<label>Your question <input name="text" required></label>`,
    `<button type="submit">Ask</button>`,
    `</form>`,
    `</dialog>`,
  ].join("\n");
}
