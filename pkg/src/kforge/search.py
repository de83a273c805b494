"""Search across articles, questions, examples, and reviews.

Case-insensitive token matching with simple weights: a token hitting an
article term counts 3, a question/example slug (or its display words) or
a tag counts 2, and plain content counts 1.  An empty query returns the
recent feed instead.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class SearchResult:
    kind: str  # article | question | example | review
    term: str
    snippet: str
    score: float
    slug: str | None = None
    anchor: str | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "term": self.term,
            "slug": self.slug,
            "snippet": self.snippet,
            "anchor": self.anchor,
            "score": self.score,
        }


def _tokens(text: str) -> list[str]:
    return re.findall(r"[a-z0-9]+", text.lower())


def _snippet_around(content: str, token: str, width: int = 80) -> str:
    lower = content.lower()
    pos = lower.find(token)
    if pos == -1:
        return content[:width].strip()
    start = max(0, pos - width // 2)
    return content[start : start + width].strip()


def search(store, query: str, kinds: tuple[str, ...] | None = None) -> list[SearchResult]:
    query_tokens = _tokens(query)
    if not query_tokens:
        results = _recent_feed(store)
    else:
        results = _scored(store, query_tokens)
    if kinds is not None:
        results = [r for r in results if r.kind in kinds]
    return results


def _scored(store, query_tokens: list[str]) -> list[SearchResult]:
    results: list[SearchResult] = []
    with store.lock:
        articles = dict(store.articles)
        reviews = list(store.reviews.values())
    for term, article in articles.items():
        term_words = set(_tokens(term))
        tag_words = set(_tokens(" ".join(article.tags)))
        content_words = set(_tokens(article.content))
        score = 0.0
        for tok in set(query_tokens):
            if tok in term_words:
                score += 3
            if tok in tag_words:
                score += 2
            if tok in content_words:
                score += 1
        if score > 0:
            results.append(
                SearchResult(
                    kind="article",
                    term=term,
                    snippet=_snippet_around(article.content, query_tokens[0]),
                    score=score,
                )
            )
        for question in article.parsed.questions:
            q_score = _anchor_score(question.slug, term_words, query_tokens)
            if q_score > 0:
                results.append(
                    SearchResult(
                        kind="question",
                        term=term,
                        slug=question.slug,
                        anchor=question.anchor,
                        snippet=question.display_text,
                        score=q_score,
                    )
                )
        for example in article.parsed.examples:
            e_score = _anchor_score(example.slug, term_words, query_tokens)
            if e_score > 0:
                results.append(
                    SearchResult(
                        kind="example",
                        term=term,
                        slug=example.slug,
                        anchor=example.anchor,
                        snippet=example.code_block[:120],
                        score=e_score,
                    )
                )
    for review in reviews:
        hits = sum(1 for tok in set(query_tokens) if tok in _tokens(review.term))
        if hits:
            results.append(
                SearchResult(
                    kind="review",
                    term=review.term,
                    snippet=f"review {review.id}: {review.status}",
                    score=float(hits),
                )
            )
    results.sort(key=lambda r: (-r.score, r.term, r.kind, r.slug or ""))
    return results


def _anchor_score(slug: str, term_words: set[str], query_tokens: list[str]) -> float:
    slug_words = set(_tokens(slug))
    score = 0.0
    for tok in set(query_tokens):
        if tok in slug_words:
            score += 2
        elif tok in term_words:
            score += 0.5  # weak association through the owning article
    # only surface anchors that matched on their own words
    if not (set(query_tokens) & slug_words):
        return 0.0
    return score


def _recent_feed(store) -> list[SearchResult]:
    with store.lock:
        articles = sorted(
            store.articles.values(), key=lambda a: a.updated_at, reverse=True
        )
    results: list[SearchResult] = []
    for article in articles:
        results.append(
            SearchResult(
                kind="article",
                term=article.term,
                snippet=article.content.strip().splitlines()[0] if article.content.strip() else "",
                score=0.0,
            )
        )
        for question in article.parsed.questions:
            results.append(
                SearchResult(
                    kind="question",
                    term=article.term,
                    slug=question.slug,
                    anchor=question.anchor,
                    snippet=question.display_text,
                    score=0.0,
                )
            )
    return results
