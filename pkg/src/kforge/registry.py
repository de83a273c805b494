"""Article lifecycle: registration, webhook-driven sync, archive rules,
and import/export of self-contained article documents.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Callable

from . import spans
from .accounts import UserAccount, authorize
from .errors import (
    ArchivedArticle,
    Forbidden,
    ForgePermissionDenied,
    ForgeUnavailable,
    InvalidSlug,
    MalformedArchive,
    NotFound,
    StillBroken,
    TermAlreadyExists,
    UnknownTerm,
)
from .forge import ForgeClient, RepoRef, WebhookDelivery, term_from_repo_name

ACTIVE = "active"
ARCHIVED = "archived"

ARCHIVE_DOC_VERSION = 1


@dataclass
class Article:
    term: str
    repo: RepoRef
    content: str
    parsed: spans.ParsedArticle
    validation: spans.ValidationReport
    tags: set[str] = field(default_factory=set)
    status: str = ACTIVE
    owners: list[str] = field(default_factory=list)
    webhook_secret: str = ""
    consecutive_failures: int = 0
    updated_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def to_dict(self) -> dict:
        return {
            "term": self.term,
            "repo": {
                "owner": self.repo.owner,
                "name": self.repo.name,
                "default_branch": self.repo.default_branch,
            },
            "content": self.content,
            "tags": sorted(self.tags),
            "status": self.status,
            "owners": list(self.owners),
            "webhook_secret": self.webhook_secret,
            "consecutive_failures": self.consecutive_failures,
            "updated_at": self.updated_at.isoformat(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Article":
        content = data["content"]
        return cls(
            term=data["term"],
            repo=RepoRef(**data["repo"]),
            content=content,
            parsed=spans.parse_spans(content),
            validation=spans.validate_article(content),
            tags=set(data.get("tags", [])),
            status=data.get("status", ACTIVE),
            owners=list(data.get("owners", [])),
            webhook_secret=data.get("webhook_secret", ""),
            consecutive_failures=data.get("consecutive_failures", 0),
            updated_at=datetime.fromisoformat(data["updated_at"])
            if "updated_at" in data
            else datetime.now(timezone.utc),
        )


@dataclass(frozen=True)
class ArticleEvent:
    term: str
    kind: str  # registered | synced | archived | unarchived | tags_updated | noop
    at: datetime
    delivery_id: str | None = None
    detail: str = ""


@dataclass(frozen=True)
class SyncOutcome:
    kind: str  # synced | ignored_ref | fetch_failed | archived | noop
    detail: str = ""


class ArticleRegistry:
    def __init__(
        self,
        store,
        forge: ForgeClient,
        notifier=None,
        failure_threshold: int = 3,
        namespace_prefix: str = "askci-term-",
        clock: Callable[[], datetime] | None = None,
    ):
        self.store = store
        self.forge = forge
        self.notifier = notifier
        self.failure_threshold = failure_threshold
        self.namespace_prefix = namespace_prefix
        self._clock = clock or (lambda: datetime.now(timezone.utc))

    # -- helpers ------------------------------------------------------------

    def get(self, term: str) -> Article:
        article = self.store.articles.get(term)
        if article is None:
            raise UnknownTerm(term)
        return article

    def _record(self, term: str, kind: str, delivery_id: str | None = None, detail: str = "") -> None:
        with self.store.lock:
            self.store.article_events.append(
                ArticleEvent(
                    term=term, kind=kind, at=self._clock(), delivery_id=delivery_id, detail=detail
                )
            )

    def _notify(self, kind: str, article: Article, body: str = "") -> None:
        if self.notifier is not None:
            self.notifier.emit(kind, article.term, article.owners, body)

    def _archive(self, article: Article, delivery_id: str | None, cause: str) -> None:
        article.status = ARCHIVED
        article.updated_at = self._clock()
        self._record(article.term, "archived", delivery_id, cause)
        self._notify("repository_archived", article, cause)

    # -- operations ---------------------------------------------------------

    def register_term(self, term: str, actor: UserAccount) -> Article:
        if not authorize(actor, "register_term"):
            raise Forbidden(f"{actor.id} may not register terms")
        if not spans.is_valid_slug(term):
            raise InvalidSlug(term)
        with self.store.term_lock(term):
            if term in self.store.articles:
                raise TermAlreadyExists(term)
            secret = secrets.token_hex(20)
            repo = self.forge.create_repo_from_template(term, actor.forge_login, secret)
            content = self.forge.fetch_article_file(repo)
            article = Article(
                term=term,
                repo=repo,
                content=content,
                parsed=spans.parse_spans(content),
                validation=spans.validate_article(content),
                owners=[actor.id],
                webhook_secret=secret,
                updated_at=self._clock(),
            )
            with self.store.lock:
                self.store.articles[term] = article
            actor.subscriptions[term] = True
            self._record(term, "registered")
            return article

    def apply_push_event(self, term: str, delivery: WebhookDelivery) -> SyncOutcome:
        with self.store.term_lock(term):
            article = self.get(term)
            if article.status == ARCHIVED:
                self._record(term, "noop", delivery.delivery_id, "push ignored: archived")
                raise ArchivedArticle(term)
            payload = delivery.payload()
            ref = payload.get("ref", "")
            branch = ref.removeprefix("refs/heads/")
            if branch != article.repo.default_branch:
                self._record(term, "noop", delivery.delivery_id, f"push to {branch} ignored")
                return SyncOutcome(kind="ignored_ref", detail=branch)
            try:
                content = self.forge.fetch_article_file(article.repo)
            except (ForgeUnavailable, ForgePermissionDenied, NotFound) as exc:
                article.consecutive_failures += 1
                self._record(
                    term,
                    "noop",
                    delivery.delivery_id,
                    f"fetch failed ({article.consecutive_failures}): {exc}",
                )
                if article.consecutive_failures >= self.failure_threshold:
                    self._archive(article, delivery.delivery_id, "repeated fetch failures")
                    return SyncOutcome(kind="archived", detail=str(exc))
                return SyncOutcome(kind="fetch_failed", detail=str(exc))
            self._apply_content(article, content, delivery.delivery_id)
            return SyncOutcome(kind="synced")

    def _apply_content(self, article: Article, content: str, delivery_id: str | None) -> None:
        report = spans.validate_article(content)
        article.content = content
        article.validation = report
        article.consecutive_failures = 0
        article.updated_at = self._clock()
        if report.ok:
            new_parsed = spans.parse_spans(content)
            diff = spans.diff_questions(article.parsed, new_parsed)
            article.parsed = new_parsed
            self._record(
                article.term,
                "synced",
                delivery_id,
                f"+{len(diff.added)} -{len(diff.removed)} ~{len(diff.moved)} questions",
            )
        else:
            # Keep the last good index; invalid content can arrive through
            # direct pushes that bypass review-time validation.
            self._record(
                article.term,
                "synced",
                delivery_id,
                f"content stored with {len(report.errors)} validation errors; index retained",
            )

    def apply_repository_event(self, term: str, delivery: WebhookDelivery) -> SyncOutcome:
        with self.store.term_lock(term):
            article = self.get(term)
            if article.status == ARCHIVED:
                # content, tags, and index are frozen while archived, but
                # repo metadata keeps tracking so unarchive can re-validate
                payload = delivery.payload()
                repo_json = payload.get("repository", {})
                if payload.get("action") == "renamed" and repo_json.get("name"):
                    article.repo = replace(article.repo, name=repo_json["name"])
                    self._record(
                        term, "noop", delivery.delivery_id, "rename recorded while archived"
                    )
                elif payload.get("action") == "transferred":
                    new_owner = repo_json.get("owner", {}).get("login", article.repo.owner)
                    article.repo = replace(article.repo, owner=new_owner)
                    self._record(
                        term, "noop", delivery.delivery_id, "transfer recorded while archived"
                    )
                else:
                    self._record(
                        term, "noop", delivery.delivery_id, "repository event ignored: archived"
                    )
                raise ArchivedArticle(term)
            payload = delivery.payload()
            action = payload.get("action", "edited")
            repo_json = payload.get("repository", {})
            if action == "renamed":
                new_name = repo_json.get("name", "")
                article.repo = replace(article.repo, name=new_name)
                expected = self.namespace_prefix + term
                if new_name == expected:
                    self._record(term, "noop", delivery.delivery_id, "identity rename")
                    return SyncOutcome(kind="noop", detail="identity rename")
                self._archive(article, delivery.delivery_id, f"renamed to {new_name}")
                return SyncOutcome(kind="archived", detail=new_name)
            if action == "archived":
                self._archive(article, delivery.delivery_id, "repository archived on forge")
                return SyncOutcome(kind="archived", detail="forge archive")
            if action == "transferred":
                new_owner = repo_json.get("owner", {}).get("login", article.repo.owner)
                article.repo = replace(article.repo, owner=new_owner)
                self._record(term, "noop", delivery.delivery_id, f"transferred to {new_owner}")
                return SyncOutcome(kind="noop", detail=f"owner {new_owner}")
            # metadata edit: topics become tags
            topics = self.forge.fetch_topics(article.repo)
            article.tags = set(topics)
            article.updated_at = self._clock()
            self._record(term, "tags_updated", delivery.delivery_id, ",".join(topics))
            return SyncOutcome(kind="synced", detail="tags")

    def unarchive(self, term: str, actor: UserAccount) -> Article:
        if not authorize(actor, "unarchive"):
            raise Forbidden(f"{actor.id} may not unarchive")
        with self.store.term_lock(term):
            article = self.get(term)
            if term_from_repo_name(article.repo.name, self.namespace_prefix) != term:
                raise StillBroken("BadName")
            try:
                content = self.forge.fetch_article_file(article.repo)
            except (ForgeUnavailable, ForgePermissionDenied, NotFound) as exc:
                raise StillBroken(f"FetchFailed: {exc}") from exc
            article.status = ACTIVE
            article.consecutive_failures = 0
            self._apply_content(article, content, None)
            self._record(term, "unarchived")
            return article

    # -- import / export ----------------------------------------------------

    def export_article(self, term: str) -> dict:
        article = self.get(term)
        return {
            "version": ARCHIVE_DOC_VERSION,
            "term": article.term,
            "repo": {
                "owner": article.repo.owner,
                "name": article.repo.name,
                "default_branch": article.repo.default_branch,
            },
            "content": article.content,
            "tags": sorted(article.tags),
            "owners": list(article.owners),
        }

    def import_article(self, doc: dict) -> Article:
        """Reconstruct an article from an export document, offline.

        Content is re-parsed locally and never fetched from the forge; a
        document whose content fails validation is imported as archived
        with the errors attached.
        """
        if not isinstance(doc, dict):
            raise MalformedArchive("archive document must be a JSON object")
        for key in ("version", "term", "repo", "content"):
            if key not in doc:
                raise MalformedArchive(f"missing field {key!r}")
        if doc["version"] != ARCHIVE_DOC_VERSION:
            raise MalformedArchive(f"unsupported version {doc['version']!r}")
        repo_doc = doc["repo"]
        for key in ("owner", "name"):
            if key not in repo_doc:
                raise MalformedArchive(f"missing repo field {key!r}")
        term = doc["term"]
        if not spans.is_valid_slug(term):
            raise MalformedArchive(f"term {term!r} violates the slug grammar")
        with self.store.term_lock(term):
            if term in self.store.articles:
                raise TermAlreadyExists(term)
            content = doc["content"]
            report = spans.validate_article(content)
            article = Article(
                term=term,
                repo=RepoRef(
                    owner=repo_doc["owner"],
                    name=repo_doc["name"],
                    default_branch=repo_doc.get("default_branch", "main"),
                ),
                content=content,
                parsed=spans.parse_spans(content),
                validation=report,
                tags=set(doc.get("tags", [])),
                status=ACTIVE if report.ok else ARCHIVED,
                owners=list(doc.get("owners", [])),
                webhook_secret=secrets.token_hex(20),
                updated_at=self._clock(),
            )
            with self.store.lock:
                self.store.articles[term] = article
            self._record(term, "registered", detail="imported")
            return article

    def rotate_webhook_secret(self, term: str, actor: UserAccount) -> str:
        if not authorize(actor, "webhook_admin"):
            raise Forbidden(f"{actor.id} may not manage webhooks")
        with self.store.term_lock(term):
            article = self.get(term)
            secret = secrets.token_hex(20)
            self.forge.rotate_webhook_secret(article.repo, secret)
            article.webhook_secret = secret
            self._record(term, "noop", detail="webhook secret rotated")
            return secret
