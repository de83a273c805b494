"""Transactional in-memory store with optional JSON snapshot persistence.

The store is the single authority for server state: articles, reviews,
accounts, audit events, and the dedup tables that make webhook and
bridge processing idempotent.  Any store with read-committed semantics
would satisfy the same contract; this one serializes article mutations
with per-term locks and can snapshot to a JSON file for the CLI.
"""

from __future__ import annotations

import json
import threading
from collections import defaultdict
from pathlib import Path


class Store:
    def __init__(self):
        self.lock = threading.RLock()
        self._term_locks: dict[str, threading.RLock] = defaultdict(threading.RLock)
        self.articles: dict[str, object] = {}
        self.article_events: list[object] = []
        self.reviews: dict[str, object] = {}
        self.review_payloads: dict[str, str] = {}
        self.accounts: dict[str, object] = {}
        self.tokens: dict[str, str] = {}
        self.seen_deliveries: set[str] = set()
        self.seen_posts: set[tuple[str, str]] = set()
        self.bridge_log: list[dict] = []
        self.notifications_sent: set[tuple[str, str]] = set()
        self.pending_notifications: list[object] = []

    def term_lock(self, term: str) -> threading.RLock:
        with self.lock:
            return self._term_locks[term]

    # -- persistence --------------------------------------------------------

    def save(self, path: str | Path) -> None:
        with self.lock:
            snapshot = {
                "version": 1,
                "articles": [a.to_dict() for a in self.articles.values()],
                "reviews": [r.to_dict() for r in self.reviews.values()],
                "accounts": [a.to_dict() for a in self.accounts.values()],
                "seen_deliveries": sorted(self.seen_deliveries),
                "seen_posts": sorted(list(p) for p in self.seen_posts),
                "notifications_sent": sorted(list(p) for p in self.notifications_sent),
            }
        Path(path).write_text(json.dumps(snapshot, indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "Store":
        from .accounts import UserAccount
        from .registry import Article
        from .reviews import Review

        store = cls()
        if not Path(path).exists():
            return store
        snapshot = json.loads(Path(path).read_text())
        for data in snapshot.get("articles", []):
            article = Article.from_dict(data)
            store.articles[article.term] = article
        for data in snapshot.get("reviews", []):
            review = Review.from_dict(data)
            store.reviews[review.id] = review
        for data in snapshot.get("accounts", []):
            account = UserAccount.from_dict(data)
            store.accounts[account.id] = account
            if account.api_token:
                store.tokens[account.api_token] = account.id
        store.seen_deliveries = set(snapshot.get("seen_deliveries", []))
        store.seen_posts = {tuple(p) for p in snapshot.get("seen_posts", [])}
        store.notifications_sent = {tuple(p) for p in snapshot.get("notifications_sent", [])}
        return store
