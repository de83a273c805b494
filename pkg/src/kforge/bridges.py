"""Inbound bridge from external discussion boards.

A board (discourse or anything that can send webhooks) posts question
content to the server; the bridge matches it against known article terms
and tags and opens a maintainer-alert issue on the best-matching repo.
Each (source, post id) pair is processed at most once, forever.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ForgePermissionDenied, ForgeUnavailable
from .forge import IssueDraft
from .registry import ACTIVE

EXCERPT_LIMIT = 500

ISSUE_LABEL = "external-knowledge"


@dataclass(frozen=True)
class ExternalPost:
    post_id: str
    source: str
    title: str
    body: str
    url: str

    def __post_init__(self):
        if not self.post_id:
            raise ValueError("post_id must be non-empty")


@dataclass(frozen=True)
class MatchResult:
    term: str
    matched_tokens: tuple[str, ...]

    @property
    def score(self) -> int:
        return len(self.matched_tokens)


@dataclass(frozen=True)
class BridgeOutcome:
    status: str  # issued | duplicate | no_match
    post_id: str
    source: str
    term: str | None = None
    issue_number: int | None = None


def _words(text: str) -> set[str]:
    return set(re.findall(r"[a-z0-9]+(?:-[a-z0-9]+)*", text.lower()))


def match_terms(post: ExternalPost, known: dict[str, set[str]]) -> list[MatchResult]:
    """Whole-word match of article terms and tags against title + body.

    `known` maps each candidate term to its tag set.  Score counts
    distinct matched tokens; ties break on term, ascending.
    """
    words = _words(post.title + "\n" + post.body)
    results = []
    for term, tags in known.items():
        tokens = {term} | {t.lower() for t in tags}
        matched = tuple(sorted(tokens & words))
        if matched:
            results.append(MatchResult(term=term, matched_tokens=matched))
    results.sort(key=lambda r: (-r.score, r.term))
    return results


class DiscourseBridge:
    def __init__(self, store, forge):
        self.store = store
        self.forge = forge

    def _known_terms(self) -> dict[str, set[str]]:
        with self.store.lock:
            return {
                term: set(article.tags)
                for term, article in self.store.articles.items()
                if article.status == ACTIVE
            }

    def handle_post(self, post: ExternalPost) -> BridgeOutcome:
        key = (post.source, post.post_id)
        with self.store.lock:
            if key in self.store.seen_posts:
                return BridgeOutcome(status="duplicate", post_id=post.post_id, source=post.source)
            self.store.seen_posts.add(key)
        matches = match_terms(post, self._known_terms())
        if not matches:
            outcome = BridgeOutcome(status="no_match", post_id=post.post_id, source=post.source)
            self._log(outcome)
            return outcome
        top = matches[0]
        article = self.store.articles[top.term]
        excerpt = post.body[:EXCERPT_LIMIT]
        draft = IssueDraft(
            target=article.repo,
            title=f"New knowledge: {post.title}",
            body=f"{excerpt}\n\nSource: {post.url}",
            labels=(ISSUE_LABEL,),
        )
        try:
            number = self.forge.open_issue(draft)
        except (ForgeUnavailable, ForgePermissionDenied):
            # allow a redelivery to retry this post
            with self.store.lock:
                self.store.seen_posts.discard(key)
            raise
        outcome = BridgeOutcome(
            status="issued",
            post_id=post.post_id,
            source=post.source,
            term=top.term,
            issue_number=number,
        )
        self._log(outcome)
        return outcome

    def _log(self, outcome: BridgeOutcome) -> None:
        with self.store.lock:
            self.store.bridge_log.append(
                {
                    "status": outcome.status,
                    "source": outcome.source,
                    "post_id": outcome.post_id,
                    "term": outcome.term,
                }
            )


def post_from_discourse_payload(payload: dict, source: str = "discourse") -> ExternalPost:
    """Fixed mapping from the discourse webhook body to an ExternalPost."""
    post = payload["post"]
    body = post.get("raw") or post.get("cooked") or ""
    # strip html tags when only the rendered body is present
    body = re.sub(r"<[^>]+>", " ", body)
    return ExternalPost(
        post_id=str(post["id"]),
        source=source,
        title=post.get("topic_title", ""),
        body=body,
        url=post.get("url", ""),
    )
