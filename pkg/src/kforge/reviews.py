"""Review lifecycle: submission, dispatch, and pull-request mirroring.

A review is the server-side mirror of a forge pull request.  Submissions
are validated, then sent to the repository as a "request-review"
dispatch; the repository automation opens the pull request and the
webhook brings its state back.  Merge means accepted, close without a
merge timestamp means rejected, and both are absorbing.
"""

from __future__ import annotations

import hashlib
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable

from . import spans
from .accounts import UserAccount, authorize
from .errors import (
    ArchivedArticle,
    Forbidden,
    ForgeUnavailable,
    UnknownTerm,
    ValidationFailed,
)
from .forge import DispatchEvent, PullRequestInfo, WebhookDelivery
from .registry import ACTIVE, ArticleRegistry

PENDING_DISPATCH = "pending_dispatch"
OPEN = "open"
ACCEPTED = "accepted"
REJECTED = "rejected"

TERMINAL = {ACCEPTED, REJECTED}

REVIEW_MARKER = "review-id: "


@dataclass
class Review:
    id: str
    term: str
    author: str
    status: str
    submitted_content_hash: str
    created_at: datetime
    updated_at: datetime
    pr: PullRequestInfo | None = None
    cause: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "term": self.term,
            "author": self.author,
            "status": self.status,
            "submitted_content_hash": self.submitted_content_hash,
            "created_at": self.created_at.isoformat(),
            "updated_at": self.updated_at.isoformat(),
            "cause": self.cause,
            "pr": None
            if self.pr is None
            else {
                "owner": self.pr.target.owner,
                "name": self.pr.target.name,
                "default_branch": self.pr.target.default_branch,
                "number": self.pr.number,
                "url": self.pr.url,
                "action": self.pr.action,
                "branch": self.pr.branch,
                "merged_at": self.pr.merged_at.isoformat() if self.pr.merged_at else None,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Review":
        from .forge import RepoRef

        pr = None
        if data.get("pr"):
            p = data["pr"]
            pr = PullRequestInfo(
                target=RepoRef(p["owner"], p["name"], p.get("default_branch", "main")),
                number=p["number"],
                url=p["url"],
                action=p["action"],
                branch=p["branch"],
                merged_at=datetime.fromisoformat(p["merged_at"]) if p.get("merged_at") else None,
            )
        return cls(
            id=data["id"],
            term=data["term"],
            author=data["author"],
            status=data["status"],
            submitted_content_hash=data["submitted_content_hash"],
            created_at=datetime.fromisoformat(data["created_at"]),
            updated_at=datetime.fromisoformat(data["updated_at"]),
            pr=pr,
            cause=data.get("cause"),
        )


def _content_hash(content: str) -> str:
    return hashlib.sha256(content.encode("utf-8")).hexdigest()


def review_id_from_pr(info: PullRequestInfo) -> str | None:
    """Recover the correlation id echoed in the PR body or branch name."""
    for line in info.body.splitlines():
        if line.startswith(REVIEW_MARKER):
            return line[len(REVIEW_MARKER):].strip()
    if info.branch.startswith("review-"):
        return info.branch.removeprefix("review-")
    return None


class ReviewEngine:
    def __init__(
        self,
        store,
        forge,
        registry: ArticleRegistry,
        notifier=None,
        pending_timeout: float = 3600.0,
        clock: Callable[[], datetime] | None = None,
    ):
        self.store = store
        self.forge = forge
        self.registry = registry
        self.notifier = notifier
        self.pending_timeout = pending_timeout
        self._clock = clock or (lambda: datetime.now(timezone.utc))

    def _notify(self, kind: str, term: str, body: str = "") -> None:
        if self.notifier is not None:
            article = self.store.articles.get(term)
            owners = article.owners if article else []
            self.notifier.emit(kind, term, owners, body)

    # -- submission ---------------------------------------------------------

    def submit_for_review(self, term: str, content: str, actor: UserAccount) -> Review:
        if not authorize(actor, "submit_for_review"):
            raise Forbidden(f"{actor.id} may not submit reviews")
        article = self.registry.get(term)
        if article.status != ACTIVE:
            raise ArchivedArticle(term)
        report = spans.validate_article(content)
        if not report.ok:
            raise ValidationFailed(report)
        now = self._clock()
        review = Review(
            id=uuid.uuid4().hex[:12],
            term=term,
            author=actor.id,
            status=PENDING_DISPATCH,
            submitted_content_hash=_content_hash(content),
            created_at=now,
            updated_at=now,
        )
        with self.store.lock:
            self.store.reviews[review.id] = review
            self.store.review_payloads[review.id] = content
        try:
            self.send_dispatch(review.id, content, actor.forge_login or actor.id)
        except ForgeUnavailable as exc:
            review.cause = f"dispatch deferred: {exc}"
        self._notify("review_requested", term, f"Review {review.id} submitted by {actor.id}")
        return review

    def send_dispatch(self, review_id: str, content: str, author: str) -> None:
        """Fire the request-review dispatch; review stays pending on outage."""
        review = self.store.reviews[review_id]
        article = self.registry.get(review.term)
        event = DispatchEvent(
            event_type="request-review",
            client_payload={"content": content, "author": author, "review_id": review_id},
            target=article.repo,
        )
        try:
            self.forge.send_dispatch(event)
        except ForgeUnavailable:
            raise  # review remains pending_dispatch; callers retry

    # -- webhook mirroring --------------------------------------------------

    def apply_pull_request_event(
        self, term: str, info: PullRequestInfo, delivery: WebhookDelivery
    ) -> Review:
        if term not in self.store.articles:
            raise UnknownTerm(term)
        review_id = review_id_from_pr(info)
        with self.store.lock:
            review = self.store.reviews.get(review_id) if review_id else None
            if review is None:
                review = self._find_by_pr(term, info)
        if review is not None and review.status in TERMINAL:
            return review  # absorbing: replays never resurrect a review
        if info.action == "opened":
            if review is None:
                review = self._orphan(term, info)
            else:
                review.status = OPEN
                review.pr = info
                review.updated_at = self._clock()
            if info.branch.startswith("update-template"):
                self._notify("template_update_opened", term, f"Template update PR {info.url}")
            return review
        if info.action == "closed":
            if review is None:
                review = self._orphan(term, info)
            review.pr = info
            review.updated_at = self._clock()
            if info.merged_at is not None:
                review.status = ACCEPTED
                if self.notifier is not None:
                    self.notifier.subscribe_contributor(review.author, term)
            else:
                review.status = REJECTED
                review.cause = "pull request closed without merge"
            return review
        # reopened / synchronized keep the mirror fresh without new states
        if review is not None:
            review.pr = info
            review.updated_at = self._clock()
            if info.action == "reopened" and review.status == PENDING_DISPATCH:
                review.status = OPEN
            return review
        return self._orphan(term, info)

    def _find_by_pr(self, term: str, info: PullRequestInfo) -> Review | None:
        for review in self.store.reviews.values():
            if review.term == term and review.pr is not None and review.pr.number == info.number:
                return review
        return None

    def _orphan(self, term: str, info: PullRequestInfo) -> Review:
        """Mirror a PR opened outside the server as an open review."""
        now = self._clock()
        review = Review(
            id=uuid.uuid4().hex[:12],
            term=term,
            author="external",
            status=OPEN,
            submitted_content_hash="",
            created_at=now,
            updated_at=now,
            pr=info,
            cause="opened directly on the forge",
        )
        with self.store.lock:
            self.store.reviews[review.id] = review
        return review

    # -- template updates ---------------------------------------------------

    def trigger_template_update(self, terms: list[str] | None, actor: UserAccount) -> int:
        if not authorize(actor, "trigger_template_update"):
            raise Forbidden(f"{actor.id} may not trigger template updates")
        selected = []
        with self.store.lock:
            for term, article in sorted(self.store.articles.items()):
                if terms is not None and term not in terms:
                    continue
                if article.status != ACTIVE:
                    continue
                selected.append(article)
        count = 0
        for article in selected:
            self.forge.send_dispatch(
                DispatchEvent(event_type="update-template", client_payload={}, target=article.repo)
            )
            count += 1
        return count

    # -- housekeeping -------------------------------------------------------

    def expire_stale(self) -> list[Review]:
        """Reject pending reviews whose dispatch never produced a PR."""
        now = self._clock()
        expired = []
        with self.store.lock:
            for review in self.store.reviews.values():
                if review.status != PENDING_DISPATCH:
                    continue
                if (now - review.created_at).total_seconds() > self.pending_timeout:
                    review.status = REJECTED
                    review.cause = "DispatchLost"
                    review.updated_at = now
                    expired.append(review)
        return expired
