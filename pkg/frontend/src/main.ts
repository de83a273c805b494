// Browser bootstrap: hash-free routing over /, /a/{term}#{anchor},
// /reviews, and /a/{term}/edit, all rendered into #app.  Pure view and
// state logic lives in the sibling modules; this file only touches the
// DOM, so the test suite covers everything except the wiring below.

import { ApiClient, type ApiError } from "./api";
import { EditorState } from "./editor";
import {
  articleView,
  askQuestionDialog,
  editorView,
  errorBanner,
  homeView,
  reviewBoardView,
} from "./views";

const api = new ApiClient("");

function mount(html: string): HTMLElement {
  const root = document.getElementById("app") as HTMLElement;
  root.innerHTML = html;
  return root;
}

async function renderHome(): Promise<void> {
  try {
    const [site, feed] = await Promise.all([api.site(), api.search("")]);
    mount(homeView(site.site_name, feed.results));
  } catch (err) {
    mount(errorBanner((err as ApiError).message ?? "The server is unreachable."));
  }
}

async function renderArticle(term: string, anchor: string | null): Promise<void> {
  try {
    const article = await api.article(term);
    const root = mount(articleView(article, anchor) + askQuestionDialog(term));
    const highlighted = root.querySelector(".highlight");
    highlighted?.scrollIntoView({ behavior: "smooth", block: "center" });
  } catch (err) {
    mount(errorBanner((err as ApiError).message ?? "Failed to load article."));
  }
}

async function renderEditor(term: string): Promise<void> {
  const article = await api.article(term);
  const state = new EditorState(term, article.content);
  const root = mount(editorView(state));
  const textarea = root.querySelector("#draft") as HTMLTextAreaElement;

  const refresh = () => {
    state.setDraft(textarea.value, textarea.selectionStart);
    mountEditorChrome();
  };
  const mountEditorChrome = () => {
    const html = editorView(state);
    const scroll = textarea.scrollTop;
    root.innerHTML = html;
    const next = root.querySelector("#draft") as HTMLTextAreaElement;
    next.scrollTop = scroll;
    wire(next);
  };
  const wire = (area: HTMLTextAreaElement) => {
    area.addEventListener("input", refresh);
    root.querySelector("#insert-question")?.addEventListener("click", () => {
      const text = window.prompt("Question text?") ?? "";
      state.cursor = area.selectionStart;
      state.insertSpan("question", text);
      mountEditorChrome();
    });
    root.querySelector("#insert-example")?.addEventListener("click", () => {
      const text = window.prompt("Example name?") ?? "";
      state.cursor = area.selectionStart;
      state.insertSpan("example", text);
      mountEditorChrome();
    });
    root.querySelector("#submit-review")?.addEventListener("click", async () => {
      try {
        await api.submitReview(term, state.draft);
        window.location.pathname = "/reviews";
      } catch (err) {
        const apiErr = err as ApiError;
        if (apiErr.status === 401) window.location.pathname = "/login";
        else mount(errorBanner(apiErr.message));
      }
    });
  };
  wire(textarea);
}

async function renderReviews(): Promise<void> {
  try {
    const { reviews } = await api.reviews();
    mount(reviewBoardView(reviews));
  } catch (err) {
    mount(errorBanner((err as ApiError).message ?? "Failed to load reviews."));
  }
}

export async function route(): Promise<void> {
  const path = window.location.pathname;
  const anchor = window.location.hash.replace(/^#/, "") || null;
  const articleMatch = /^\/a\/([^/]+)(\/edit)?$/.exec(path);
  if (articleMatch && articleMatch[2]) await renderEditor(articleMatch[1]);
  else if (articleMatch) await renderArticle(articleMatch[1], anchor);
  else if (path === "/reviews") await renderReviews();
  else await renderHome();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  api.token = window.localStorage.getItem("api_token");
  window.addEventListener("hashchange", route);
  void route();
}
