"""Composition root: wires the store, forge client, queue, and services.

The Server owns webhook intake (verify, dedup, enqueue) and the glue
between modules; the HTTP layer in api.py is a thin shell around it.
"""

from __future__ import annotations

import base64
import uuid
from dataclasses import dataclass

from .accounts import AccountService, UserAccount, authorize
from .bridges import DiscourseBridge, post_from_discourse_payload
from .config import ServerConfig
from .errors import (
    ArchivedArticle,
    EmptyQuestion,
    Forbidden,
    ForgeUnavailable,
    UnknownTerm,
)
from .forge import (
    ForgeClient,
    ForgeSimulator,
    HttpForgeClient,
    IssueDraft,
    WebhookDelivery,
    pull_request_info_from_payload,
    verify_signature,
)
from .notify import MailSender, Notifier, RecordingMailSink, SmtpSender
from .registry import ACTIVE, ArticleRegistry
from .reviews import ReviewEngine
from .search import SearchResult, search
from .spans import slugify
from .store import Store
from .tasks import TaskQueue


@dataclass(frozen=True)
class QuestionAsked:
    term: str
    slug: str
    anchor: str
    existing: bool
    issue_number: int | None


class Server:
    def __init__(
        self,
        config: ServerConfig,
        store: Store | None = None,
        forge: ForgeClient | None = None,
        mail_sender: MailSender | None = None,
        queue: TaskQueue | None = None,
        clock=None,
    ):
        self.config = config
        self.store = store or (
            Store.load(config.store_path) if config.store_path else Store()
        )
        self.forge = forge or self._build_forge(config)
        self.mail_sender = mail_sender or self._build_mail(config)
        self.queue = queue or TaskQueue()
        self.notifier = Notifier(self.store, self.mail_sender)
        self.accounts = AccountService(self.store, self.forge, config.admin_logins)
        self.registry = ArticleRegistry(
            self.store,
            self.forge,
            notifier=self.notifier,
            failure_threshold=config.failure_threshold,
            namespace_prefix=config.namespace_prefix,
            clock=clock,
        )
        self.reviews = ReviewEngine(
            self.store,
            self.forge,
            self.registry,
            notifier=self.notifier,
            pending_timeout=config.review_pending_timeout,
            clock=clock,
        )
        self.bridge = DiscourseBridge(self.store, self.forge)
        self.queue.register("webhook", self._handle_webhook_task)
        self.queue.register("discourse", self._handle_discourse_task)
        self.queue.register("review_dispatch", self._handle_review_dispatch)

    @staticmethod
    def _build_forge(config: ServerConfig) -> ForgeClient:
        if config.forge_api_base.startswith("sim://"):
            return ForgeSimulator(
                content_file=config.content_file,
                namespace_prefix=config.namespace_prefix,
            )
        return HttpForgeClient(
            api_base=config.forge_api_base,
            token=config.forge_token,
            webhook_base_url=config.base_url,
            template_repo=config.template_repo,
            content_file=config.content_file,
            namespace_prefix=config.namespace_prefix,
            oauth_token_url=config.forge_oauth_token_url,
            oauth_client_id=config.forge_oauth_client_id,
            oauth_client_secret=config.forge_oauth_client_secret,
        )

    @staticmethod
    def _build_mail(config: ServerConfig) -> MailSender:
        if config.mail_backend == "smtp":
            return SmtpSender(config.mail_url, config.mail_from)
        return RecordingMailSink()

    # -- webhook intake (the trust boundary) --------------------------------

    def receive_webhook(self, term: str, delivery: WebhookDelivery) -> int:
        """Returns the HTTP status for an inbound forge delivery."""
        article = self.store.articles.get(term)
        if article is None:
            return 404
        if not verify_signature(delivery, article.webhook_secret):
            return 401
        with self.store.lock:
            if delivery.delivery_id in self.store.seen_deliveries:
                return 202
            self.store.seen_deliveries.add(delivery.delivery_id)
        self.queue.enqueue(
            "webhook",
            {
                "term": term,
                "delivery_id": delivery.delivery_id,
                "event_kind": delivery.event_kind,
                "signature_header": delivery.signature_header,
                "raw_body": base64.b64encode(delivery.raw_body).decode("ascii"),
                "received_at": delivery.received_at.isoformat(),
            },
            dedup_key=delivery.delivery_id,
            term=term,
        )
        return 202

    def _handle_webhook_task(self, payload: dict) -> None:
        from datetime import datetime

        delivery = WebhookDelivery(
            delivery_id=payload["delivery_id"],
            event_kind=payload["event_kind"],
            signature_header=payload["signature_header"],
            raw_body=base64.b64decode(payload["raw_body"]),
            received_at=datetime.fromisoformat(payload["received_at"]),
        )
        term = payload["term"]
        try:
            if delivery.event_kind == "push":
                self.registry.apply_push_event(term, delivery)
            elif delivery.event_kind == "pull_request":
                info = pull_request_info_from_payload(delivery.payload())
                self.reviews.apply_pull_request_event(term, info, delivery)
            elif delivery.event_kind == "repository":
                self.registry.apply_repository_event(term, delivery)
        except (ArchivedArticle, UnknownTerm):
            pass  # audited no-ops, not retryable failures

    def receive_discourse(self, raw_body: bytes, signature_header: str) -> int:
        import json

        probe = WebhookDelivery(
            delivery_id="-",
            event_kind="push",
            signature_header=signature_header,
            raw_body=raw_body,
            received_at=_utcnow(),
        )
        if not verify_signature(probe, self.config.discourse_secret):
            return 401
        try:
            payload = json.loads(raw_body.decode("utf-8"))
            post = post_from_discourse_payload(payload)
        except (ValueError, KeyError):
            return 400
        self.queue.enqueue(
            "discourse",
            {"post": {
                "post_id": post.post_id,
                "source": post.source,
                "title": post.title,
                "body": post.body,
                "url": post.url,
            }},
            dedup_key=f"discourse-{uuid.uuid4().hex}",
        )
        return 202

    def _handle_discourse_task(self, payload: dict) -> None:
        from .bridges import ExternalPost

        self.bridge.handle_post(ExternalPost(**payload["post"]))

    # -- user-facing operations ---------------------------------------------

    def submit_for_review(self, term: str, content: str, actor: UserAccount):
        review = self.reviews.submit_for_review(term, content, actor)
        if review.status == "pending_dispatch" and review.cause:
            # dispatch failed transiently; the queue keeps trying
            self.queue.enqueue(
                "review_dispatch",
                {"review_id": review.id, "author": actor.forge_login or actor.id},
                dedup_key=f"dispatch-{review.id}",
                term=term,
            )
        return review

    def _handle_review_dispatch(self, payload: dict) -> None:
        review_id = payload["review_id"]
        review = self.store.reviews.get(review_id)
        if review is None or review.status != "pending_dispatch":
            return
        content = self.store.review_payloads.get(review_id, "")
        self.reviews.send_dispatch(review_id, content, payload["author"])
        review.cause = None

    def ask_question(self, term: str, text: str, actor: UserAccount) -> QuestionAsked:
        if not authorize(actor, "ask_question"):
            raise Forbidden(f"{actor.id} may not ask questions")
        article = self.registry.get(term)
        if article.status != ACTIVE:
            raise ArchivedArticle(term)
        if not text.strip():
            raise EmptyQuestion("question text must be non-empty")
        slug = slugify(text)
        if not slug:
            raise EmptyQuestion("question text has no indexable words")
        existing = {q.slug for q in article.parsed.questions}
        if slug in existing:
            return QuestionAsked(
                term=term, slug=slug, anchor=f"question-{slug}", existing=True, issue_number=None
            )
        number = self.forge.open_issue(
            IssueDraft(
                target=article.repo,
                title=f"Question: {text.strip()}",
                body=f"Asked by {actor.id} through the server.",
                labels=("question",),
            )
        )
        self.notifier.emit(
            "question_asked", term, article.owners, f"{actor.id} asked: {text.strip()}"
        )
        return QuestionAsked(
            term=term, slug=slug, anchor=f"question-{slug}", existing=False, issue_number=number
        )

    def search(self, query: str, kinds: tuple[str, ...] | None = None) -> list[SearchResult]:
        return search(self.store, query, kinds=kinds)

    # -- test/ops helpers ---------------------------------------------------

    def pump_forge(self, max_rounds: int = 10) -> int:
        """Deliver queued simulator webhooks and process them to quiescence."""
        if not isinstance(self.forge, ForgeSimulator):
            raise RuntimeError("pump_forge only works against the simulator")
        delivered = 0
        for _ in range(max_rounds):
            items = self.forge.take_deliveries()
            if not items:
                break
            for item in items:
                term = item.url.rsplit("/", 1)[-1]
                self.receive_webhook(term, item.delivery)
                delivered += 1
            self.queue.run_until_idle()
        self.queue.run_until_idle()
        return delivered

    def save(self) -> None:
        if self.config.store_path:
            self.store.save(self.config.store_path)


def _utcnow():
    from datetime import datetime, timezone

    return datetime.now(timezone.utc)
